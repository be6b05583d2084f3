// sweep.hpp - peak extraction, numeric/analytic spectrum pipelines and
// parameter sweeps producing peak tables

#pragma once

#include "pmspec/config.hpp"
#include "pmspec/demod.hpp"
#include "pmspec/perturbation.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace pmspec {

struct PeakEstimate {
  double omega;
  cplx value;
};

/// Line near the predicted frequency. The strict local maximum of |S| within
/// one FWHM seeds a least-squares fit of the windowed line shape with a local
/// complex offset and slope; the result is the fitted centre and the line's own
/// value there, free of neighbouring tails.
PeakEstimate extract_peak(const ComplexSpectrum& spec, double predicted_omega);

struct PredictedPeak {
  std::string label;  // S_e, S_f, S_ee, S_ef, S_ff
  int kappa;
  double omega;
};

std::vector<PredictedPeak> predicted_peaks(const DimerSystem& sys, double omega_M = 0.0);
std::vector<double> predicted_frequencies(const DimerSystem& sys, int kappa, double omega_M = 0.0);

struct PeakRow {
  double sweep_value{0.0};
  std::string label;
  int kappa{1};
  double omega{0.0};
  cplx value{};
  Route route{Route::kNumeric};

  /// Peak amplitude |S|, signed by the absorptive part (Re for the first
  /// harmonic, Im for the second).
  double height() const { return std::copysign(std::abs(value), kappa == 1 ? value.real() : value.imag()); }
};

struct SpectraResult {
  std::array<ComplexSpectrum, 2> spectra;  // kappa = 1, 2
  std::vector<PeakRow> peaks;     // peaks without a local maximum are omitted
  std::vector<std::string> warnings;
};

struct NumericResult : SpectraResult {
  SignalGrid grid;
  std::array<DemodSignal, 2> demodulated;
};

/// Full propagation, lock-in demodulation, windowed spectrum, optional
/// background removal and peak extraction. A precomputed grid may be supplied.
NumericResult numeric_spectra(const RunConfig& cfg, const SignalGrid* grid = nullptr);
SpectraResult numeric_spectra_from_grid(const RunConfig& cfg, const SignalGrid& grid,
                                        std::array<DemodSignal, 2>* demodulated = nullptr);

/// Perturbative spectra on the same frequency axis as the numeric route, with
/// the same background treatment.
SpectraResult analytic_spectra(const RunConfig& cfg);
std::array<HarmonicSignal, 2> analytic_signals(const RunConfig& cfg);

/// Base config with one sweep value applied.
RunConfig apply_sweep_value(const RunConfig& base, const SweepSpec& spec, double value);

/// Runs every sweep value through the requested routes; rows ordered by
/// value, route (numeric first) and label.
std::vector<PeakRow> run_sweep(const RunConfig& base, const SweepSpec& spec);

const PeakRow& find_peak(const std::vector<PeakRow>& rows, const std::string& label, Route route,
                         std::optional<double> sweep_value = std::nullopt);

}  // namespace pmspec
