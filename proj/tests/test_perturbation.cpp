#include "doctest.h"

#include "pmspec/perturbation.hpp"
#include "pmspec/special.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

using namespace pmspec;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
struct GaussLegendre {
  std::vector<double> x, w;
  explicit GaussLegendre(int n) : x(n), w(n) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
  template <typename F>
  auto integrate(F f, double a, double b, int panels = 1) const {
    using R = decltype(f(a));
    R sum{};
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double lo = a + p * h;
      for (std::size_t i = 0; i < x.size(); ++i) sum += w[i] * 0.5 * h * f(lo + 0.5 * h * (x[i] + 1.0));
    }
    return sum;
  }
};

const GaussLegendre& gl() {
  static const GaussLegendre g(32);
  return g;
}

Envelope rectangular(double delta, double e0) {
  Envelope env;
  env.shape = Rectangular{delta};
  env.e0 = e0;
  return env;
}

Envelope gaussian(double sigma, double e0) {
  Envelope env;
  env.shape = Gaussian{sigma};
  env.e0 = e0;
  return env;
}

// Independent nested oracle for the time-ordered double amplitude.
cplx nested_oracle(const Envelope& env, double wl, double wf, double wi, int panels) {
  const double a = wf - wi - wl, b = wi - wl;
  const double half = env.support_halfwidth();
  auto amp = [&](double t) { return env.is_gaussian() ? env(t) : env.e0; };
  return gl().integrate(
      [&](double t1) {
        const int inner = std::max(1, static_cast<int>(std::ceil(panels * (t1 + half) / (2.0 * half))));
        const cplx in = gl().integrate([&](double t2) { return amp(t2) * std::exp(kI * (b * t2)); }, -half, t1, inner);
        return amp(t1) * std::exp(kI * (a * t1)) * in;
      },
      -half, half, panels);
}

DimerSystem dimer(double vee, double vff) {
  DimerSystem s;
  s.v_ee = vee;
  s.v_ff = vff;
  return s;
}

PulseTrainConfig train_with(const Envelope& env) {
  PulseTrainConfig c;
  c.envelope = env;
  return c;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_SUITE("perturbation") {
  TEST_CASE("special functions") {
    CHECK(sinc(0.0) == 1.0);
    CHECK(sinc(kPi) == doctest::Approx(0.0).epsilon(1e-15).scale(1.0));
    for (double x : {0.0, 1e-5, 0.3, 2.0, -4.7}) {
      const auto d = sinc_derivatives(x);
      const double h = 1e-3;
      CHECK(d[0] == doctest::Approx(sinc(x)).epsilon(1e-15));
      CHECK(d[1] == doctest::Approx((sinc(x + h) - sinc(x - h)) / (2 * h)).epsilon(1e-6).scale(1.0));
      CHECK(d[2] == doctest::Approx((sinc(x + h) - 2 * sinc(x) + sinc(x - h)) / (h * h)).epsilon(1e-5).scale(1.0));
      const double d3 = (sinc(x + 2 * h) - 2 * sinc(x + h) + 2 * sinc(x - h) - sinc(x - 2 * h)) / (2 * h * h * h);
      CHECK(d[3] == doctest::Approx(d3).epsilon(1e-4).scale(1.0));
    }
    for (double x : {0.0, 0.01, 0.5, 0.9241, 2.0, 5.5, 12.0, 20.0, -3.0}) {
      const double q = std::exp(-x * x) * gl().integrate([](double t) { return std::exp(t * t); }, 0.0, x, 64);
      CHECK(dawson(x) == doctest::Approx(q).epsilon(1e-12).scale(1e-300));
    }
  }

  TEST_CASE("single amplitude") {
    const auto r = rectangular(3.0, 0.2);
    CHECK(single_amplitude(r, 1.5, 1.5) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(std::abs(single_amplitude(r, 1.5, 1.5 + 2.0 * kPi / 3.0)) < 1e-15);
    const auto g = gaussian(10.4, 0.00384);
    for (double w : {1.5, 1.525, 1.56974, 1.7}) {
      // untruncated Gaussian
      auto a = [&](double t) { return 0.00384 * std::exp(-t * t / (2 * 10.4 * 10.4)); };
      const cplx q = gl().integrate([&](double t) { return a(t) * std::exp(kI * ((w - 1.525) * t)); }, -150.0, 150.0, 60);
      CHECK(std::abs(single_amplitude(g, 1.525, w) - q) < 1e-10 * std::abs(q) + 1e-14);
    }
  }

  TEST_CASE("rectangular double amplitude: closed form against nested quadrature") {
    const double wl = 1.525;
    for (double delta : {0.5, 2.0, 7.0}) {
      const auto env = rectangular(delta, 0.3);
      for (double dwi : {-0.3, -0.05, -1e-5 / delta, 0.0, 2e-6, 0.02, 0.4}) {
        for (double wf : {2 * wl - 0.1, 2 * wl, 2 * wl + 0.07, 3.05}) {
          const cplx closed = double_amplitude(env, wl, wf, wl + dwi);
          const cplx oracle = nested_oracle(env, wl, wf, wl + dwi, 4);
          CHECK(rel(closed, oracle) < 1e-8);
          const auto lib = double_amplitude_quadrature(env, wl, wf, wl + dwi, 1e-11);
          CHECK(rel(closed, lib.value) < 1e-8);
        }
      }
    }
  }

  TEST_CASE("rectangular double amplitude is continuous through omega_i = omega_L") {
    const auto env = rectangular(4.0, 0.1);
    const double wl = 1.525, wf = 3.04;
    const cplx centre = double_amplitude(env, wl, wf, wl);
    CHECK(std::isfinite(centre.real()));
    CHECK(std::isfinite(centre.imag()));
    // either side of the series switch at |b| Delta = 1e-4
    for (double bd : {0.99e-4, 1.01e-4, 3e-4, 1e-6}) {
      for (double sgn : {-1.0, 1.0}) {
        const double wi = wl + sgn * bd / 4.0;
        const cplx oracle = nested_oracle(env, wl, wf, wi, 4);
        CHECK(rel(double_amplitude(env, wl, wf, wi), oracle) < 1e-10);
      }
    }
  }

  TEST_CASE("Gaussian double amplitude against an independent nested quadrature") {
    const auto env = gaussian(10.4, 0.00384);
    const double wl = 1.525;
    const double scale = std::pow(envelope_area(env), 2);
    for (auto [wf, wi] : {std::pair{3.0, 1.51}, {3.05, 1.56974}, {3.1, 1.57}, {3.05, 1.51}}) {
      const cplx v = double_amplitude(env, wl, wf, wi);
      const cplx oracle = nested_oracle(env, wl, wf, wi, 48);
      CHECK(std::abs(v - oracle) < 1e-8 * scale);
    }
    const auto q = double_amplitude_quadrature(env, wl, 3.05, 1.51);
    CHECK(q.change < 1e-9);
    CHECK_THROWS_AS(double_amplitude_quadrature(env, wl, 3.05, 1.51, 1e-30, 101, 1), QuadratureError);
  }

  TEST_CASE("time-ordering identity") {
    const double wl = 1.525;
    for (const auto& env : {gaussian(6.0, 0.01), rectangular(3.0, 0.2)}) {
      for (auto [wf, wi] : {std::pair{3.05, 1.51}, {3.0, 1.5}, {3.1, 1.60}}) {
        const cplx both = double_amplitude(env, wl, wf, wi) + double_amplitude(env, wl, wf, wf - wi);
        // unordered product: the full square of two single integrals
        const cplx product = single_amplitude(env, wl, wf - wi) * single_amplitude(env, wl, wi);
        CHECK(std::abs(both - product) < 1e-8 * std::pow(envelope_area(env), 2));
      }
    }
  }

  TEST_CASE("amplitude bank") {
    const double wl = 1.525;
    const auto r = rectangular(2.0, 0.05);
    const auto uncoupled = amplitude_bank(dimer(0.0, 0.0), r, wl);
    const double we = DimerSystem{}.particle.omega_eg(), wf = DimerSystem{}.particle.omega_fg();
    // both time orderings of the ef pathway add up to the unordered product
    CHECK(std::abs(uncoupled.mixed[0] + uncoupled.mixed[1] -
                   single_amplitude(r, wl, we) * single_amplitude(r, wl, wf)) < 1e-12);
    CHECK(std::abs(uncoupled.triple_ge2 - single_amplitude(r, wl, wf) * uncoupled.mixed[0]) < 1e-15);
    const auto sys = dimer(0.01, 0.01974);
    const auto b = amplitude_bank(sys, r, wl);
    const double detuning = sys.particle.omega_eg() - wl;
    CHECK(b.single[0] == doctest::Approx(0.05 * 2.0 * sinc((detuning + 0.01) * 2.0 / 2.0)).epsilon(1e-14));

    // Gaussian bank reproducible between quadrature refinements
    const auto g = normalize_to_area(0.1, gaussian(10.4, 1.0));
    const auto gb = amplitude_bank(sys, g, wl);
    const double scale = std::pow(envelope_area(g), 2);
    const double w0 = sys.particle.omega_eg(), w1 = sys.particle.omega_fg();
    const auto finer = double_amplitude_quadrature(g, wl, 2 * w0, w0 + 0.01, 1e-12, 8001);
    CHECK(std::abs(gb.pair[0] - finer.value) < 1e-9 * scale);
    const auto finer_mixed = double_amplitude_quadrature(g, wl, w0 + w1, w1 + 0.01974, 1e-12, 8001);
    CHECK(std::abs(gb.mixed[1] - finer_mixed.value) < 1e-9 * scale);
    for (const cplx v : {gb.pair[0], gb.pair[1], gb.mixed[0], gb.mixed[1], gb.triple_ge2, gb.triple_gf2bar}) {
      CHECK(std::isfinite(std::abs(v)));
    }
  }

  TEST_CASE("first harmonic signal") {
    const auto env = normalize_to_area(0.1, gaussian(10.4, 1.0));
    const auto sys = dimer(0.01, 0.01974);
    const auto t = std::vector<double>{0.0, 10.0, 37.5};
    const auto s1 = first_harmonic_signal(sys, train_with(env), t);
    CHECK(s1.term("e").omega0 == doctest::Approx(sys.particle.omega_eg() + 0.01));
    CHECK(s1.term("f").omega0 == doctest::Approx(sys.particle.omega_fg() + 0.01974));
    CHECK(s1.term("e").amplitude.imag() == 0.0);
    CHECK(s1.term("f").amplitude.imag() == 0.0);
    Envelope doubled = env;
    doubled.e0 *= 2.0;
    const auto s2 = first_harmonic_signal(sys, train_with(doubled), t);
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(s2.values[i] == doctest::Approx(4.0 * s1.values[i]).epsilon(1e-12));
    const auto shifted = first_harmonic_signal(sys, train_with(env), t, 1.4);
    CHECK(shifted.term("e").omega0 == doctest::Approx(sys.particle.omega_eg() + 0.01 - 1.4));
  }

  TEST_CASE("second harmonic signal") {
    const auto env = normalize_to_area(0.1, gaussian(10.4, 1.0));
    const std::vector<double> t{0.0, 5.0};
    const auto on = second_harmonic_signal(dimer(0.01, 0.01974), train_with(env), t);
    const auto off = second_harmonic_signal(dimer(0.0, 0.0), train_with(env), t);
    const auto flipped = second_harmonic_signal(dimer(-0.01, -0.01974), train_with(env), t);
    const auto& p = DimerSystem{}.particle;
    const double freqs[3] = {2 * p.omega_eg(), p.omega_eg() + p.omega_fg(), 2 * p.omega_fg()};
    for (int k = 0; k < 3; ++k) {
      CHECK(on.terms[k].omega0 == doctest::Approx(freqs[k]));
      CHECK(flipped.terms[k].omega0 == doctest::Approx(freqs[k]));
      CHECK(std::abs(off.terms[k].amplitude) < 1e-7 * std::abs(on.terms[k].amplitude));
    }
    for (const char* label : {"ee", "ff"}) {
      const cplx a = on.term(label).amplitude, b = flipped.term(label).amplitude;
      CHECK(a.imag() < 0.0);
      CHECK(b.imag() > 0.0);
      CHECK(std::abs(a) == doctest::Approx(std::abs(b)).epsilon(1e-6));
    }
    const cplx ef_on = on.term("ef").amplitude, ef_flip = flipped.term("ef").amplitude;
    CHECK(std::abs(std::abs(ef_flip) - std::abs(ef_on)) > 0.01 * std::abs(ef_on));

    Envelope doubled = env;
    doubled.e0 *= 2.0;
    const auto strong = second_harmonic_signal(dimer(0.01, 0.01974), train_with(doubled), t);
    for (int k = 0; k < 3; ++k) {
      CHECK(rel(strong.terms[k].amplitude, 16.0 * on.terms[k].amplitude) < 1e-8);
    }
  }

  TEST_CASE("closed-form spectrum of harmonic terms") {
    const double sigma = 120.0, w0 = 1.5;
    auto gauss = [&](double d) { return std::exp(-0.5 * d * d * sigma * sigma); };
    const HarmonicTerm cosine{"c", cplx(2.0, 0.0), w0};
    const HarmonicTerm sine{"s", cplx(0.0, -1.0), w0};  // Re[-i e^{i w0 t}] = sin(w0 t)
    const std::vector<double> probe{w0, -w0, w0 + 0.004, w0 - 0.011, 0.7};
    const auto c = analytic_term_spectrum(cosine, sigma, probe);
    const auto s = analytic_term_spectrum(sine, sigma, probe);
    for (std::size_t k = 0; k < probe.size(); ++k) {
      const double w = probe[k];
      CHECK(c[k].real() == doctest::Approx(2.0 * sigma / 4.0 * (gauss(w - w0) + gauss(w + w0))).epsilon(1e-12).scale(1e-12));
      CHECK(s[k].imag() == doctest::Approx(sigma / 4.0 * (gauss(w + w0) - gauss(w - w0))).epsilon(1e-12).scale(1e-12));
    }

    // against the transform of the time-domain signal on a fine axis
    const auto t = uniform_axis(0.0, 0.01, 120000);
    HarmonicSignal sig;
    sig.kappa = 2;
    sig.terms = {{"a", cplx(0.3, -0.8), 3.0}, {"b", cplx(-0.1, 0.2), 3.05}};
    std::vector<double> trace(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) trace[i] = sig.terms[0](t[i]) + sig.terms[1](t[i]);
    const std::vector<double> at{3.0, 3.05, 3.02};
    const auto numeric = spectrum_at(t, trace, sigma, at);
    const auto closed = analytic_spectrum(sig, sigma, at);
    for (std::size_t k = 0; k < at.size(); ++k) CHECK(rel(closed.values[k], numeric[k]) < 1e-6);
  }

  TEST_CASE("expansion in V over detuning") {
    const double wl = 1.525;
    const auto env = rectangular(6.0, 0.02);
    auto exact = [&](double v) { return signal_coefficients(amplitude_bank(dimer(v, 1.974 * v), env, wl)); };
    auto approx = [&](double v) { return expansion_small_V_over_detuning(dimer(v, 1.974 * v), env, wl); };

    const auto zero = approx(0.0);
    CHECK(zero.lambda2[0] == cplx(0.0, 0.0));
    CHECK(zero.lambda_ef == cplx(0.0, 0.0));
    CHECK(std::abs(exact(0.0).lambda2[0]) < 1e-15);
    CHECK(std::abs(exact(0.0).lambda_ef) < 1e-15);

    const double de = DimerSystem{}.particle.omega_eg() - wl;  // -0.025
    const double v = 0.05 * std::abs(de);
    const auto e = exact(v);
    const auto a = approx(v);
    CHECK(a.lambda2[0].real() == 0.0);
    CHECK(a.lambda2[0].imag() < 0.0);
    CHECK(rel(a.lambda2[0], e.lambda2[0]) < 3.0 * 0.05);
    CHECK(rel(a.lambda_ef, e.lambda_ef) < 3.0 * 0.05);
    CHECK(std::abs(a.lambda1[0] - e.lambda1[0]) < 3.0 * 0.05 * 0.05 * std::abs(e.lambda1[0]));

    // first-order expansion: the error is second order, so it falls by ~4 per halving
    auto err2 = [&](double vv) { return std::abs(approx(vv).lambda2[0] - exact(vv).lambda2[0]); };
    auto err_ef = [&](double vv) { return std::abs(approx(vv).lambda_ef - exact(vv).lambda_ef); };
    for (double vv : {0.004, 0.002}) {
      CHECK(err2(vv) / err2(vv / 2) == doctest::Approx(4.0).epsilon(0.15));
      CHECK(err_ef(vv) / err_ef(vv / 2) == doctest::Approx(4.0).epsilon(0.15));
    }

    // slope at V = 0 matches the expansion coefficient
    const double h = 1e-7;
    const cplx slope = (exact(h).lambda2[0] - exact(-h).lambda2[0]) / (2 * h);
    CHECK(rel(approx(1.0).lambda2[0], slope) < 0.01);
    const cplx slope_ef = (exact(h).lambda_ef - exact(-h).lambda_ef) / (2 * h);
    CHECK(rel(approx(1.0).lambda_ef, slope_ef) < 0.01);

    CHECK(approx(0.1 * std::abs(de)).warnings.empty());
    CHECK_FALSE(approx(0.5 * std::abs(de)).warnings.empty());
    CHECK_THROWS_AS(expansion_small_V_over_detuning(dimer(0.01, 0.02), env, DimerSystem{}.particle.omega_eg()),
                    std::domain_error);
    CHECK_THROWS_AS(expansion_small_V_over_detuning(dimer(0.01, 0.02), gaussian(5.0, 0.01), wl),
                    std::invalid_argument);
  }

  TEST_CASE("expansion in V Delta for short pulses") {
    const double wl = 1.525;
    const auto sys = dimer(0.01, 0.01974);
    const double area = 0.1;
    auto exact = [&](double delta) { return signal_coefficients(amplitude_bank(sys, rectangular(delta, area / delta), wl)); };
    auto approx = [&](double delta) { return expansion_small_V_delta(sys, rectangular(delta, area / delta), wl); };

    // at fixed area the 2HD coefficients vanish linearly with the pulse length
    const double a4 = std::pow(area, 4);
    const cplx r1 = exact(0.5).lambda2[0] / a4, r2 = exact(0.25).lambda2[0] / a4;
    CHECK(std::abs(r1) / std::abs(r2) == doctest::Approx(2.0).epsilon(0.01));
    CHECK(std::abs(exact(0.01).lambda2[1]) < 1e-2 * a4 * 0.01974);

    const cplx lead = -kI / 3.0 * a4 * (sys.v_ee + sys.v_ff) * 0.01;
    CHECK(rel(approx(0.01).lambda_ef, lead) < 1e-3);
    CHECK(rel(exact(0.01).lambda_ef, lead) < 1e-3);

    auto flip = dimer(-0.01, -0.01974);
    const auto plus = approx(2.0), minus = expansion_small_V_delta(flip, rectangular(2.0, area / 2.0), wl);
    CHECK(plus.lambda2[0].imag() == doctest::Approx(-minus.lambda2[0].imag()).epsilon(1e-14));

    // third-order expansion: the error falls by ~16 per halving of Delta
    auto err2 = [&](double d) { return std::abs(approx(d).lambda2[1] - exact(d).lambda2[1]); };
    auto err_ef = [&](double d) { return std::abs(approx(d).lambda_ef - exact(d).lambda_ef); };
    for (double d : {4.0, 2.0}) {
      CHECK(err2(d) / err2(d / 2) == doctest::Approx(16.0).epsilon(0.15));
      CHECK(err_ef(d) / err_ef(d / 2) == doctest::Approx(16.0).epsilon(0.15));
    }
    CHECK_THROWS_AS(expansion_small_V_delta(sys, gaussian(5.0, 0.01), wl), std::invalid_argument);
  }
}
