#include "pmspec/perturbation.hpp"

#include "pmspec/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pmspec {

namespace {

constexpr cplx kI{0.0, 1.0};
const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

const Rectangular& require_rectangular(const Envelope& env, const char* who) {
  if (env.is_gaussian()) throw std::invalid_argument(std::string(who) + ": expansion needs a rectangular envelope");
  return std::get<Rectangular>(env.shape);
}

// single-amplitude magnitude at resonance, used to scale quadrature tolerances
double amplitude_scale(const Envelope& env) {
  return env.is_gaussian() ? env.e0 * env.width() * kSqrt2Pi : env.e0 * env.width();
}

// Envelope on the closed support interval; the rectangular edges count as inside.
double quadrature_envelope(const Envelope& env, double s) {
  if (env.is_gaussian()) return env(s);
  return std::abs(s) <= 0.5 * env.width() ? env.e0 : 0.0;
}

cplx nested_trapezoid(const Envelope& env, double alpha, double beta, long n) {
  const double half = env.support_halfwidth();
  const double h = 2.0 * half / static_cast<double>(n - 1);
  cplx inner{0.0, 0.0}, outer{0.0, 0.0}, g_prev{0.0, 0.0};
  for (long k = 0; k < n; ++k) {
    const double t = -half + h * static_cast<double>(k);
    const double a = quadrature_envelope(env, t);
    const cplx g = a * std::polar(1.0, beta * t);
    if (k > 0) inner += 0.5 * h * (g_prev + g);
    g_prev = g;
    const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
    outer += w * a * std::polar(1.0, alpha * t) * inner;
  }
  return outer * h;
}

cplx rectangular_double(double e0, double delta, double omega_L, double omega_f, double omega_i) {
  const double b = omega_i - omega_L;
  const double x = 0.5 * b * delta;
  const double c = 0.5 * (omega_f - 2.0 * omega_L) * delta;
  const double scale = e0 * e0 * delta * delta;
  if (std::abs(b) * delta < 1e-4) {
    // removable singularity at omega_i = omega_L
    const auto [s0, s1, s2, s3] = sinc_derivatives(c);
    const cplx series = (kI * s0 + s1) + x * (0.5 * s0 - kI * s1 - 0.5 * s2) +
                        x * x * (-kI * s0 / 6.0 - 0.5 * s1 + 0.5 * kI * s2 + s3 / 6.0);
    return scale / (2.0 * kI) * series;
  }
  return e0 * e0 * delta / (kI * b) * (sinc(c) - sinc(c - x) * std::polar(1.0, -x));
}

double first_order_sinc_correction(double y) {
  // (2 - 2 cos y - y sin y) / y^2
  if (std::abs(y) < 1e-3) return y * y / 12.0;
  return (2.0 - 2.0 * std::cos(y) - y * std::sin(y)) / (y * y);
}

}  // namespace

double single_amplitude(const Envelope& env, double omega_L, double omega) {
  env.validate();
  const double d = omega - omega_L;
  if (const auto* g = std::get_if<Gaussian>(&env.shape)) {
    return env.e0 * g->sigma * kSqrt2Pi * std::exp(-0.5 * d * d * g->sigma * g->sigma);
  }
  const double delta = env.width();
  return env.e0 * delta * sinc(0.5 * d * delta);
}

QuadratureResult double_amplitude_quadrature(const Envelope& env, double omega_L, double omega_f, double omega_i,
                                             double rel_tol, long initial_points, int max_doublings) {
  env.validate();
  if (initial_points < 3 || initial_points % 2 == 0) {
    throw std::invalid_argument("double_amplitude_quadrature: initial grid size must be odd and >= 3");
  }
  const double alpha = omega_f - omega_i - omega_L;
  const double beta = omega_i - omega_L;
  const double scale = std::pow(amplitude_scale(env), 2);
  if (scale == 0.0) return {cplx{0.0, 0.0}, 0.0, initial_points};

  // Romberg table over successive halvings of the step
  std::vector<cplx> prev_row, row;
  long n = initial_points;
  double change = std::numeric_limits<double>::infinity();
  for (int level = 0; level <= max_doublings; ++level, n = 2 * n - 1) {
    row.assign(level + 1, cplx{});
    row[0] = nested_trapezoid(env, alpha, beta, n);
    for (int j = 1; j <= level; ++j) {
      row[j] = row[j - 1] + (row[j - 1] - prev_row[j - 1]) / (std::pow(4.0, j) - 1.0);
    }
    if (level > 0) {
      change = std::abs(row[level] - prev_row[level - 1]) / scale;
      if (change < rel_tol) return {row[level], change, n};
    }
    prev_row = row;
  }
  std::ostringstream os;
  os << "double_amplitude_quadrature: no convergence to " << rel_tol << " (achieved " << change << ")";
  throw QuadratureError(os.str());
}

cplx double_amplitude(const Envelope& env, double omega_L, double omega_f, double omega_i) {
  env.validate();
  if (!env.is_gaussian()) return rectangular_double(env.e0, env.width(), omega_L, omega_f, omega_i);
  return double_amplitude_quadrature(env, omega_L, omega_f, omega_i).value;
}

AmplitudeBank amplitude_bank(const DimerSystem& sys, const Envelope& env, double omega_L) {
  sys.validate();
  const auto& p = sys.particle;
  const std::array<double, 2> w{p.omega_eg(), p.omega_fg()};
  const std::array<double, 2> v{sys.v_ee, sys.v_ff};
  const double sum = w[0] + w[1];
  auto single = [&](double omega) { return single_amplitude(env, omega_L, omega); };
  auto twice = [&](double omega_f, double omega_i) { return double_amplitude(env, omega_L, omega_f, omega_i); };

  AmplitudeBank bank;
  std::array<cplx, 2> to_sum{};
  for (int a = 0; a < 2; ++a) {
    bank.single[a] = single(w[a] + v[a]);
    bank.pair[a] = twice(2.0 * w[a], w[a] + v[a]);
    // the intermediate state of the ef pathway is the alpha manifold itself
    to_sum[a] = twice(sum, w[a] + v[a]);
    bank.mixed[a] = to_sum[a];
    bank.triple_same[a] = single(w[a] - v[a]) * bank.pair[a];
  }
  // pairings transcribed as published
  bank.triple_ge2 = single(w[1] - v[0]) * to_sum[0];
  bank.triple_gf2bar = single(w[0] - v[1]) * to_sum[0];
  bank.triple_ge2bar = single(w[1] - v[0]) * to_sum[1];
  bank.triple_gf2 = single(w[0] - v[1]) * to_sum[1];
  return bank;
}

SignalCoefficients signal_coefficients(const AmplitudeBank& b) {
  SignalCoefficients s;
  for (int a = 0; a < 2; ++a) {
    s.lambda1[a] = b.single[a] * b.single[a];
    s.lambda2[a] = 2.0 * std::conj(b.pair[a]) * b.pair[a] - b.single[a] * std::conj(b.triple_same[a]);
  }
  const cplx m1 = b.mixed[0], m2 = b.mixed[1];
  s.lambda_ef = 2.0 * std::conj(m1) * m1 + 2.0 * std::conj(m2) * m2 + 2.0 * m1 * std::conj(m2) +
                2.0 * std::conj(m1) * m2 - b.single[0] * (std::conj(b.triple_ge2) + std::conj(b.triple_ge2bar)) -
                b.single[1] * (std::conj(b.triple_gf2) + std::conj(b.triple_gf2bar));
  return s;
}

double HarmonicTerm::operator()(double t21) const {
  return (amplitude * std::polar(1.0, omega0 * t21)).real();
}

std::vector<double> HarmonicSignal::component(const std::string& label) const {
  const HarmonicTerm& t = term(label);
  std::vector<double> out(t21.size());
  for (std::size_t i = 0; i < t21.size(); ++i) out[i] = t(t21[i]);
  return out;
}

const HarmonicTerm& HarmonicSignal::term(const std::string& label) const {
  for (const auto& t : terms) {
    if (t.label == label) return t;
  }
  throw std::out_of_range("HarmonicSignal: no component '" + label + "'");
}

namespace {

HarmonicSignal assemble(int kappa, std::span<const double> t21, std::vector<HarmonicTerm> terms) {
  HarmonicSignal sig;
  sig.kappa = kappa;
  sig.t21.assign(t21.begin(), t21.end());
  sig.terms = std::move(terms);
  sig.values.assign(t21.size(), 0.0);
  for (std::size_t i = 0; i < t21.size(); ++i) {
    for (const auto& t : sig.terms) sig.values[i] += t(t21[i]);
  }
  return sig;
}

}  // namespace

HarmonicSignal first_harmonic_signal(const DimerSystem& sys, const PulseTrainConfig& cfg,
                                     std::span<const double> t21, double omega_M) {
  const auto lam = signal_coefficients(amplitude_bank(sys, cfg.envelope, cfg.omega_L));
  const auto& p = sys.particle;
  return assemble(1, t21,
                  {{"e", p.mu_e * p.mu_e * lam.lambda1[0], p.omega_eg() + sys.v_ee - omega_M},
                   {"f", p.mu_f * p.mu_f * lam.lambda1[1], p.omega_fg() + sys.v_ff - omega_M}});
}

HarmonicSignal second_harmonic_signal(const DimerSystem& sys, const PulseTrainConfig& cfg,
                                      std::span<const double> t21, double omega_M) {
  const auto lam = signal_coefficients(amplitude_bank(sys, cfg.envelope, cfg.omega_L));
  const auto& p = sys.particle;
  const double me2 = p.mu_e * p.mu_e, mf2 = p.mu_f * p.mu_f;
  return assemble(2, t21,
                  {{"ee", 0.5 * me2 * me2 * lam.lambda2[0], 2.0 * p.omega_eg() - 2.0 * omega_M},
                   {"ef", 0.25 * me2 * mf2 * lam.lambda_ef, p.omega_eg() + p.omega_fg() - 2.0 * omega_M},
                   {"ff", 0.5 * mf2 * mf2 * lam.lambda2[1], 2.0 * p.omega_fg() - 2.0 * omega_M}});
}

std::vector<cplx> analytic_term_spectrum(const HarmonicTerm& term, double window_sigma,
                                         std::span<const double> omega) {
  if (!(window_sigma > 0)) throw std::invalid_argument("analytic_spectrum: window width must be positive");
  const double s = window_sigma;
  const double w0 = term.omega0;
  const double quarter = 0.25 * s;
  const double disp = s / (2.0 * std::sqrt(std::numbers::pi));
  const double k = s / std::sqrt(2.0);
  auto gauss = [&](double d) { return std::exp(-0.5 * d * d * s * s); };
  std::vector<cplx> out(omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) {
    const double w = omega[i];
    // windowed one-sided transforms of cos(w0 t) and sin(w0 t)
    const cplx fc{quarter * (gauss(w + w0) + gauss(w - w0)), -disp * (dawson((w + w0) * k) + dawson((w - w0) * k))};
    const cplx fs{disp * (dawson((w0 + w) * k) + dawson((w0 - w) * k)), quarter * (gauss(w + w0) - gauss(w - w0))};
    out[i] = term.amplitude.real() * fc - term.amplitude.imag() * fs;
  }
  return out;
}

ComplexSpectrum analytic_spectrum(const HarmonicSignal& sig, double window_sigma, std::span<const double> omega) {
  ComplexSpectrum spec;
  spec.kappa = sig.kappa;
  spec.window_sigma = window_sigma;
  spec.omega.assign(omega.begin(), omega.end());
  spec.values.assign(omega.size(), cplx{});
  for (const auto& t : sig.terms) {
    const auto part = analytic_term_spectrum(t, window_sigma, omega);
    for (std::size_t i = 0; i < part.size(); ++i) spec.values[i] += part[i];
  }
  return spec;
}

SmallCouplingExpansion expansion_small_V_over_detuning(const DimerSystem& sys, const Envelope& env, double omega_L) {
  const double delta = require_rectangular(env, "expansion_small_V_over_detuning").delta;
  sys.validate();
  const double de = sys.particle.omega_eg() - omega_L;
  const double df = sys.particle.omega_fg() - omega_L;
  if (de == 0.0 || df == 0.0) {
    throw std::domain_error("expansion_small_V_over_detuning: zero detuning, expansion in V / detuning invalid");
  }
  const std::array<double, 2> d{de, df};
  const std::array<double, 2> v{sys.v_ee, sys.v_ff};
  const double a2 = std::pow(env.e0 * delta, 2);

  SmallCouplingExpansion out;
  for (int a = 0; a < 2; ++a) {
    const double ratio = v[a] / d[a];
    if (std::abs(ratio) > 0.3) {
      std::ostringstream os;
      os << "|V/detuning| = " << std::abs(ratio) << " for manifold " << (a == 0 ? "e" : "f")
         << " exceeds 0.3; first-order expansion unreliable";
      out.warnings.push_back(os.str());
    }
    const double y = delta * d[a];
    const double s = sinc(0.5 * y);
    out.lambda1[a] = a2 * s * s - 2.0 * a2 * first_order_sinc_correction(y) * ratio;
    out.lambda2[a] = -kI * a2 * a2 * s * s * (1.0 - sinc(y)) / y * ratio;
  }
  const double diff = df - de;
  out.C = 2.0 * std::cos(0.5 * delta * diff) + 2.0 * diff / (delta * de * df) * std::sin(0.5 * delta * diff) -
          (df * df + de * de) / (de * df) * sinc(0.5 * delta * (df + de));
  // sqrt(de df) appears twice and combines to de df, also for opposite-sign detunings
  out.lambda_ef = -kI * a2 * a2 * sinc(0.5 * delta * de) * sinc(0.5 * delta * df) * out.C *
                  (sys.v_ee + sys.v_ff) / (delta * de * df);
  return out;
}

ShortPulseExpansion expansion_small_V_delta(const DimerSystem& sys, const Envelope& env, double omega_L) {
  const double delta = require_rectangular(env, "expansion_small_V_delta").delta;
  sys.validate();
  const double weg = sys.particle.omega_eg(), wfg = sys.particle.omega_fg();
  const std::array<double, 2> d{weg - omega_L, wfg - omega_L};
  const std::array<double, 2> v{sys.v_ee, sys.v_ff};
  const double a2 = std::pow(env.e0 * delta, 2);

  ShortPulseExpansion out;
  for (int a = 0; a < 2; ++a) {
    const double vd = v[a] * delta;
    out.lambda1[a] = a2 * (1.0 - delta * delta * std::pow(d[a] + v[a], 2) / 12.0);
    out.lambda2[a] = -kI / 6.0 * a2 * a2 * vd *
                     (1.0 + kI / 3.0 * vd - 6.0 / 45.0 * (v[a] * v[a] + d[a] * d[a]) * delta * delta);
  }
  const double vee = sys.v_ee, vff = sys.v_ff;
  out.B = 11.0 * (vee * vee + vff * vff + weg * weg + wfg * wfg) - 6.0 * (vee * vff + weg * wfg) +
          14.0 * (vff - vee) * (wfg - weg) + 16.0 * omega_L * (omega_L - weg - wfg);
  const double vs = (vee + vff) * delta;
  out.lambda_ef = -kI / 3.0 * a2 * a2 * vs * (1.0 + kI / 6.0 * vs - out.B * delta * delta / 120.0);
  return out;
}

}  // namespace pmspec
