// pulses.hpp - phase-modulated pulse-pair field

#pragma once

#include <array>
#include <numbers>
#include <variant>

namespace pmspec {

struct Gaussian {
  double sigma{10.4};
};

struct Rectangular {
  double delta{1.0};
};

/// Pulse envelope A(s) with peak amplitude e0. Gaussian envelopes are cut to
/// zero beyond |s| > kGaussianCutoff * sigma.
struct Envelope {
  static constexpr double kGaussianCutoff = 6.0;

  std::variant<Gaussian, Rectangular> shape{Gaussian{}};
  double e0{0.00384};

  bool is_gaussian() const { return std::holds_alternative<Gaussian>(shape); }
  /// sigma for Gaussian, delta for rectangular
  double width() const;
  /// half-length of the interval outside which A(s) is identically zero
  double support_halfwidth() const;
  double operator()(double s) const;
  Envelope with_width(double w) const;

  void validate() const;
};

double envelope_area(const Envelope& env);
Envelope normalize_to_area(double target_area, const Envelope& env);

/// How the linear phase sweep Omega_j t is clocked.
///
/// kPairIndex: each pulse carries the phase Omega_j tau_m + phi_j (the sweep
/// is constant across one pair). kLabTime: Omega_j (t + tau_m) with t the time
/// inside the pair, which also shifts the carrier of pulse j by Omega_j.
enum class PhaseClock { kPairIndex, kLabTime };

struct PulseTrainConfig {
  Envelope envelope{};
  double omega_L{1.525};
  double t1{0.0};
  double t21{0.0};
  double omega_1{0.0};
  double omega_2{2.0 * std::numbers::pi * 1e-3};
  double phi1_0{0.0};
  double phi2_0{0.0};
  double t_rep{1.0};
  int pair_count{1000};
  std::array<bool, 2> enabled{true, true};
  PhaseClock clock{PhaseClock::kPairIndex};

  double t2() const { return t1 + t21; }
  double omega21() const { return omega_2 - omega_1; }
  double phi21_0() const { return phi2_0 - phi1_0; }
  double tau(int m) const { return m * t_rep; }

  /// arrival time of pulse j (0 or 1) inside a pair
  double arrival(int j) const { return j == 0 ? t1 : t2(); }
  /// carrier frequency of pulse j relative to its own arrival time
  double carrier(int j) const;
  /// carrier phase of pulse j at its envelope peak in pair m
  double phase(int j, int m) const;

  void validate() const;
};

/// Field of pulse pair m at time t measured inside the pair.
double field_value(const PulseTrainConfig& cfg, int m, double t);

/// Contribution of a single pulse j (0 or 1).
double pulse_field(const PulseTrainConfig& cfg, int j, int m, double t);

}  // namespace pmspec
