#include "pmspec/pulses.hpp"

#include <cmath>
#include <type_traits>
#include <stdexcept>

namespace pmspec {

namespace {
constexpr double kSqrt2Pi = 2.5066282746310002;
}

double Envelope::width() const {
  return std::visit([](const auto& s) {
    if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Gaussian>) return s.sigma;
    else return s.delta;
  }, shape);
}

double Envelope::support_halfwidth() const {
  return is_gaussian() ? kGaussianCutoff * width() : 0.5 * width();
}

double Envelope::operator()(double s) const {
  if (const auto* g = std::get_if<Gaussian>(&shape)) {
    if (std::abs(s) > kGaussianCutoff * g->sigma) return 0.0;
    return e0 * std::exp(-s * s / (2.0 * g->sigma * g->sigma));
  }
  const double half = 0.5 * std::get<Rectangular>(shape).delta;
  return (s > -half && s < half) ? e0 : 0.0;
}

Envelope Envelope::with_width(double w) const {
  Envelope out = *this;
  if (auto* g = std::get_if<Gaussian>(&out.shape)) g->sigma = w;
  else std::get<Rectangular>(out.shape).delta = w;
  return out;
}

void Envelope::validate() const {
  if (!(width() > 0) || !std::isfinite(width())) {
    throw std::invalid_argument("Envelope: width must be positive");
  }
  if (!(e0 >= 0) || !std::isfinite(e0)) {
    throw std::invalid_argument("Envelope: E0 must be non-negative");
  }
}

double envelope_area(const Envelope& env) {
  env.validate();
  return env.is_gaussian() ? env.e0 * env.width() * kSqrt2Pi : env.e0 * env.width();
}

Envelope normalize_to_area(double target_area, const Envelope& env) {
  if (!(target_area > 0)) throw std::invalid_argument("normalize_to_area: target area must be positive");
  Envelope out = env;
  out.e0 = 1.0;
  out.e0 = target_area / envelope_area(out);
  return out;
}

double PulseTrainConfig::carrier(int j) const {
  const double sweep = j == 0 ? omega_1 : omega_2;
  return clock == PhaseClock::kLabTime ? omega_L + sweep : omega_L;
}

double PulseTrainConfig::phase(int j, int m) const {
  const double sweep = j == 0 ? omega_1 : omega_2;
  const double offset = j == 0 ? phi1_0 : phi2_0;
  const double clock_time = clock == PhaseClock::kLabTime ? arrival(j) + tau(m) : tau(m);
  return sweep * clock_time + offset;
}

void PulseTrainConfig::validate() const {
  envelope.validate();
  if (!(t21 >= 0)) throw std::invalid_argument("PulseTrainConfig: t2 must not precede t1");
  if (!(t_rep > 0)) throw std::invalid_argument("PulseTrainConfig: T_rep must be positive");
  if (pair_count < 1) throw std::invalid_argument("PulseTrainConfig: need at least one pulse pair");
  if (!(omega_L > 0)) throw std::invalid_argument("PulseTrainConfig: carrier frequency must be positive");
}

double pulse_field(const PulseTrainConfig& cfg, int j, int m, double t) {
  if (!cfg.enabled[j]) return 0.0;
  const double s = t - cfg.arrival(j);
  const double a = cfg.envelope(s);
  if (a == 0.0) return 0.0;
  return a * std::cos(cfg.carrier(j) * s + cfg.phase(j, m));
}

double field_value(const PulseTrainConfig& cfg, int m, double t) {
  if (m < 0 || m >= cfg.pair_count) throw std::out_of_range("field_value: pair index out of range");
  return pulse_field(cfg, 0, m, t) + pulse_field(cfg, 1, m, t);
}

}  // namespace pmspec
