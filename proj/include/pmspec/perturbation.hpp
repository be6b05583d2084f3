// perturbation.hpp - lowest-order 1HD/2HD signals from spectral amplitudes of
// the pulse envelope, their closed-form windowed spectra, and the weak-coupling
// expansions for rectangular pulses

#pragma once

#include "pmspec/demod.hpp"
#include "pmspec/model.hpp"
#include "pmspec/pulses.hpp"

#include <array>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmspec {

using cplx = std::complex<double>;

/// int A(t) exp(i (omega - omega_L) t) dt for an envelope centred at t = 0.
double single_amplitude(const Envelope& env, double omega_L, double omega);

/// Time-ordered int dt' int^{t'} dt'' A(t') A(t'') exp(i (omega_f - omega_i - omega_L) t')
/// exp(i (omega_i - omega_L) t''). Closed form for rectangular pulses, nested
/// quadrature otherwise.
cplx double_amplitude(const Envelope& env, double omega_L, double omega_f, double omega_i);

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureResult {
  cplx value;
  double change;  // last refinement change relative to the amplitude scale
  long points;    // outer grid size of the final level
};

/// Nested cumulative trapezoid over the envelope support, refined by doubling
/// with Richardson extrapolation until the change drops below rel_tol.
QuadratureResult double_amplitude_quadrature(const Envelope& env, double omega_L, double omega_f, double omega_i,
                                             double rel_tol = 1e-9, long initial_points = 4001,
                                             int max_doublings = 10);

/// Spectral amplitudes entering the lowest-order signals. Index 0 is the e
/// manifold, 1 the f manifold. Both pulses share the envelope, so pulse 1 and
/// pulse 2 amplitudes coincide.
struct AmplitudeBank {
  std::array<double, 2> single{};     // A_j^(g alpha,1)
  std::array<cplx, 2> pair{};         // A_jj^(alpha alpha)
  std::array<cplx, 2> mixed{};        // A_jj^(ef,alpha)
  std::array<cplx, 2> triple_same{};  // A_211^(g alpha,3)
  cplx triple_ge2{}, triple_ge2bar{}, triple_gf2{}, triple_gf2bar{};
};

AmplitudeBank amplitude_bank(const DimerSystem& sys, const Envelope& env, double omega_L);

struct SignalCoefficients {
  std::array<double, 2> lambda1{};  // Lambda_e, Lambda_f
  std::array<cplx, 2> lambda2{};    // Lambda_ee, Lambda_ff
  cplx lambda_ef{};
};

SignalCoefficients signal_coefficients(const AmplitudeBank& bank);

/// One contribution Re[amplitude exp(i omega0 t21)].
struct HarmonicTerm {
  std::string label;
  cplx amplitude;
  double omega0;

  double operator()(double t21) const;
};

struct HarmonicSignal {
  int kappa{1};
  std::vector<double> t21;
  std::vector<HarmonicTerm> terms;  // e, f or ee, ef, ff
  std::vector<double> values;       // sum of all terms on t21

  std::vector<double> component(const std::string& label) const;
  const HarmonicTerm& term(const std::string& label) const;
};

HarmonicSignal first_harmonic_signal(const DimerSystem& sys, const PulseTrainConfig& cfg,
                                     std::span<const double> t21, double omega_M = 0.0);
HarmonicSignal second_harmonic_signal(const DimerSystem& sys, const PulseTrainConfig& cfg,
                                      std::span<const double> t21, double omega_M = 0.0);

/// Closed-form one-sided Gaussian-windowed spectrum of the signal's terms,
/// with the same normalisation as `spectrum`.
ComplexSpectrum analytic_spectrum(const HarmonicSignal& sig, double window_sigma, std::span<const double> omega);
std::vector<cplx> analytic_term_spectrum(const HarmonicTerm& term, double window_sigma,
                                         std::span<const double> omega);

/// First order in V / detuning, rectangular pulses.
struct SmallCouplingExpansion {
  std::array<double, 2> lambda1{};
  std::array<cplx, 2> lambda2{};
  cplx lambda_ef{};
  double C{};
  std::vector<std::string> warnings;
};

SmallCouplingExpansion expansion_small_V_over_detuning(const DimerSystem& sys, const Envelope& env, double omega_L);

/// Third order in V Delta and detuning times Delta, rectangular pulses.
struct ShortPulseExpansion {
  std::array<double, 2> lambda1{};
  std::array<cplx, 2> lambda2{};
  cplx lambda_ef{};
  double B{};
};

ShortPulseExpansion expansion_small_V_delta(const DimerSystem& sys, const Envelope& env, double omega_L);

}  // namespace pmspec
