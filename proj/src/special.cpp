#include "pmspec/special.hpp"

#include <cmath>
#include <numbers>

namespace pmspec {

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

std::array<double, 4> sinc_derivatives(double x) {
  if (std::abs(x) < 0.5) {
    // termwise derivatives of sum_n (-1)^n x^(2n) / (2n+1)!
    std::array<double, 4> d{0.0, 0.0, 0.0, 0.0};
    double fact = 1.0;  // (2n+1)!
    for (int n = 0; n < 12; ++n) {
      if (n > 0) fact *= (2.0 * n) * (2.0 * n + 1.0);
      const double c = (n % 2 ? -1.0 : 1.0) / fact;
      const int p = 2 * n;
      d[0] += c * std::pow(x, p);
      if (p >= 1) d[1] += c * p * std::pow(x, p - 1);
      if (p >= 2) d[2] += c * p * (p - 1) * std::pow(x, p - 2);
      if (p >= 3) d[3] += c * p * (p - 1) * (p - 2) * std::pow(x, p - 3);
    }
    return d;
  }
  const double s = std::sin(x), c = std::cos(x);
  const double x2 = x * x, x3 = x2 * x, x4 = x3 * x;
  return {s / x,
          (x * c - s) / x2,
          ((2.0 - x2) * s - 2.0 * x * c) / x3,
          ((3.0 * x2 - 6.0) * s + (6.0 * x - x3) * c) / x4};
}

double dawson(double x) {
  const double ax = std::abs(x);
  if (ax < 0.2) {
    // F(x) = sum_k (-2)^k x^(2k+1) / (2k+1)!!
    const double x2 = x * x;
    double term = x, sum = x;
    for (int k = 1; k < 12; ++k) {
      term *= -2.0 * x2 / (2.0 * k + 1.0);
      sum += term;
    }
    return sum;
  }
  // Rybicki's sampling-theorem series, error ~ exp(-(pi / 2h)^2)
  constexpr double h = 0.2;
  constexpr int kTerms = 40;
  const int n0 = 2 * static_cast<int>(std::lround(0.5 * ax / h));
  const double xp = ax - n0 * h;
  const double e1 = std::exp(2.0 * xp * h);
  const double e2 = e1 * e1;
  double d1 = n0 + 1.0, d2 = d1 - 2.0;
  double sum = 0.0;
  double ep = std::exp(-xp * xp);
  // c_k = exp(-((2k+1) h)^2) applied symmetrically around the shifted origin
  double up = e1, down = 1.0 / e1;
  for (int k = 0; k < kTerms; ++k) {
    const double odd = (2.0 * k + 1.0) * h;
    const double ck = std::exp(-odd * odd);
    sum += ck * (up / d1 + down / d2);
    d1 += 2.0;
    d2 -= 2.0;
    up *= e2;
    down /= e2;
  }
  const double f = sum * ep / std::sqrt(std::numbers::pi);
  return x < 0 ? -f : f;
}

}  // namespace pmspec
