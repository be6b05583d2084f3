// demod.hpp - lock-in demodulation of the fluorescence grid and the
// windowed one-sided spectrum of the demodulated trace

#pragma once

#include "pmspec/propagator.hpp"
#include "pmspec/pulses.hpp"

#include <complex>
#include <span>
#include <vector>

namespace pmspec {

enum class DemodMode {
  kProjection,   // average over an integer number of reference periods
  kExponential,  // first-order low-pass with time constant tau_LI
};

struct DemodSettings {
  int kappa{1};
  /// Rotating-frame frequency removed from the t21 dependence.
  double omega_M{0.0};
  /// Low-pass time constant of the exponential mode; <= 0 selects one
  /// modulation period 2 pi / Omega21.
  double tau_LI{0.0};
  DemodMode mode{DemodMode::kProjection};
  /// Reference phase offset; matches the optical phi21 for a phase-locked reference.
  double phi21_ref{0.0};

  void validate() const;
};

/// Complex lock-in output X(t21). A term cos(kappa Omega21 tau + phi) in S
/// maps to exp(i phi) / 2.
struct DemodSignal {
  std::vector<double> t21;
  std::vector<std::complex<double>> values;
  int kappa{1};
};

DemodSignal demodulate(const SignalGrid& grid, const PulseTrainConfig& cfg, const DemodSettings& settings);

/// Real kappa-harmonic trace 2 Re X(t21).
std::vector<double> in_phase_trace(const DemodSignal& signal);

struct ComplexSpectrum {
  std::vector<double> omega;
  std::vector<std::complex<double>> values;
  int kappa{1};
  double window_sigma{0.0};

  /// Full width at half maximum of a single windowed line.
  double fwhm() const;
};

/// (2 pi)^(-1/2) int_0^inf f(t) exp(-t^2 / (2 sigma^2)) exp(-i omega t) dt on the
/// uniform axis t (starting at 0), by zero-padded FFT. Frequencies are sorted
/// over [-pi/h, pi/h).
ComplexSpectrum spectrum(std::span<const double> t, std::span<const double> trace, double window_sigma,
                         int kappa = 1, int padding = 4);

/// Shape of one line exp(i p t) in that transform, as a function of
/// y = (omega - p) sigma and up to the factor sigma / (2 sqrt(2 pi)):
/// sqrt(pi/2) exp(-y^2/2) - i sqrt(2) F(y / sqrt(2)), F the Dawson integral.
std::complex<double> windowed_line(double y);

/// Frequency axis produced by `spectrum` for `samples` points of spacing `step`.
std::vector<double> spectrum_frequencies(std::size_t samples, double step, int padding = 4);

/// Same transform evaluated by direct summation at arbitrary frequencies.
std::vector<std::complex<double>> spectrum_at(std::span<const double> t, std::span<const double> trace,
                                              double window_sigma, std::span<const double> omega);

struct BackgroundSettings {
  double window_fwhm{50.0};     // moving-median window, in line widths
  double exclusion_fwhm{5.0};   // half-width excluded around each expected peak
  double max_excluded{0.5};     // fraction of the grid that may be excluded
  double bridge_flank_fwhm{16.0};  // unmasked span on each side used to bridge an excluded stretch
  int bridge_degree{10};           // Legendre degree of that bridge
};

/// Removes a slowly varying background from Re and Im separately. Outside the
/// excluded neighbourhoods of the expected peaks it is a moving median; across
/// each excluded stretch it is a least-squares Legendre fit to the flanking
/// unmasked spectrum, which follows the curvature of broad pulse-overlap bumps.
ComplexSpectrum subtract_background(const ComplexSpectrum& spec, std::span<const double> peak_omegas,
                                    const BackgroundSettings& settings = {});

}  // namespace pmspec
