#include "pmspec/sweep.hpp"

#include <Eigen/QR>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pmspec {

namespace {

// 5-point Lagrange weights at offset x from the centre node (nodes -2..2)
std::array<double, 5> lagrange5(double x) {
  std::array<double, 5> w{};
  for (int k = -2; k <= 2; ++k) {
    double l = 1.0;
    for (int j = -2; j <= 2; ++j) {
      if (j != k) l *= (x - j) / static_cast<double>(k - j);
    }
    w[k + 2] = l;
  }
  return w;
}

}  // namespace

PeakEstimate extract_peak(const ComplexSpectrum& spec, double predicted_omega) {
  const std::size_t n = spec.omega.size();
  if (n < 5) throw std::invalid_argument("extract_peak: spectrum too short");
  const double fwhm = spec.fwhm();
  if (spec.omega.front() > predicted_omega - 3.0 * fwhm || spec.omega.back() < predicted_omega + 3.0 * fwhm) {
    throw std::invalid_argument("extract_peak: spectrum does not cover the predicted frequency +/- 3 FWHM");
  }
  std::optional<std::size_t> best;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    if (std::abs(spec.omega[i] - predicted_omega) > fwhm) continue;
    const double y = std::abs(spec.values[i]);
    if (y > std::abs(spec.values[i - 1]) && y > std::abs(spec.values[i + 1]) &&
        (!best || y > std::abs(spec.values[*best]))) {
      best = i;
    }
  }
  if (!best) {
    std::ostringstream os;
    os << "extract_peak: no local maximum of |S| within one FWHM of omega = " << predicted_omega;
    throw std::runtime_error(os.str());
  }
  const std::size_t i = *best;
  const double ym = std::abs(spec.values[i - 1]), y0 = std::abs(spec.values[i]), yp = std::abs(spec.values[i + 1]);
  const double denom = ym - 2.0 * y0 + yp;
  const double offset = denom < 0.0 ? 0.5 * (ym - yp) / denom : 0.0;
  const double apex = spec.omega[i] + offset * (spec.omega[i + 1] - spec.omega[i]);

  // The apex of |S| is pulled off centre when a neighbour's dispersive tail
  // adds a quadrature offset, so refine by fitting the windowed line shape
  // plus a complex quadratic over +-1.5 FWHM.
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(spec.omega[k] - apex) <= 1.5 * fwhm) idx.push_back(k);
  }
  if (idx.size() < 8) {
    const auto w = lagrange5(offset);
    cplx value{};
    for (int k = 0; k < 5; ++k) value += w[k] * spec.values[i - 2 + k];
    return {apex, value};
  }
  Eigen::MatrixXcd design(static_cast<Eigen::Index>(idx.size()), 4);
  Eigen::VectorXcd rhs(design.rows());
  for (Eigen::Index r = 0; r < design.rows(); ++r) rhs(r) = spec.values[idx[r]];
  auto solve = [&](double centre, Eigen::VectorXcd& coef) {
    for (Eigen::Index r = 0; r < design.rows(); ++r) {
      const double d = spec.omega[idx[r]] - centre;
      design(r, 0) = windowed_line(d * spec.window_sigma);
      design(r, 1) = 1.0;
      design(r, 2) = d / fwhm;
      design(r, 3) = (d / fwhm) * (d / fwhm);
    }
    coef = design.colPivHouseholderQr().solve(rhs);
    return (design * coef - rhs).squaredNorm();
  };
  // golden-section search for the centre within half a line width of the apex
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = apex - 0.5 * fwhm, hi = apex + 0.5 * fwhm;
  double c1 = hi - g * (hi - lo), c2 = lo + g * (hi - lo);
  Eigen::VectorXcd coef;
  double f1 = solve(c1, coef), f2 = solve(c2, coef);
  while (hi - lo > 1e-7 * fwhm) {
    if (f1 < f2) {
      hi = c2, c2 = c1, f2 = f1;
      c1 = hi - g * (hi - lo);
      f1 = solve(c1, coef);
    } else {
      lo = c1, c1 = c2, f1 = f2;
      c2 = lo + g * (hi - lo);
      f2 = solve(c2, coef);
    }
  }
  const double centre = 0.5 * (lo + hi);
  solve(centre, coef);
  return {centre, coef(0) * windowed_line(0.0)};
}

std::vector<PredictedPeak> predicted_peaks(const DimerSystem& sys, double omega_M) {
  const double weg = sys.particle.omega_eg(), wfg = sys.particle.omega_fg();
  return {{"S_e", 1, weg + sys.v_ee - omega_M},
          {"S_f", 1, wfg + sys.v_ff - omega_M},
          {"S_ee", 2, 2.0 * weg - 2.0 * omega_M},
          {"S_ef", 2, weg + wfg - 2.0 * omega_M},
          {"S_ff", 2, 2.0 * wfg - 2.0 * omega_M}};
}

std::vector<double> predicted_frequencies(const DimerSystem& sys, int kappa, double omega_M) {
  std::vector<double> out;
  for (const auto& p : predicted_peaks(sys, omega_M)) {
    if (p.kappa == kappa) out.push_back(p.omega);
  }
  return out;
}

namespace {

void collect_peaks(const RunConfig& cfg, SpectraResult& result, Route route) {
  for (const auto& p : predicted_peaks(cfg.system, cfg.demod.omega_M)) {
    try {
      const auto est = extract_peak(result.spectra[p.kappa - 1], p.omega);
      result.peaks.push_back({0.0, p.label, p.kappa, est.omega, est.value, route});
    } catch (const std::runtime_error& e) {
      result.warnings.push_back(p.label + ": " + e.what());
    }
  }
}

// Both routes go through the same baseline removal so that neighbouring
// dispersive tails are treated identically before the apex search.
void remove_background(const RunConfig& cfg, ComplexSpectrum& spec) {
  if (!cfg.background.subtract) return;
  spec = subtract_background(spec, predicted_frequencies(cfg.system, spec.kappa, cfg.demod.omega_M),
                             cfg.background.settings);
}

}  // namespace

SpectraResult numeric_spectra_from_grid(const RunConfig& cfg, const SignalGrid& grid,
                                        std::array<DemodSignal, 2>* demodulated) {
  SpectraResult result;
  for (int kappa = 1; kappa <= 2; ++kappa) {
    DemodSettings ds = cfg.demod;
    ds.kappa = kappa;
    DemodSignal sig = demodulate(grid, cfg.pulses, ds);
    ComplexSpectrum spec = spectrum(grid.t21, in_phase_trace(sig), cfg.grid.window_sigma, kappa);
    remove_background(cfg, spec);
    result.spectra[kappa - 1] = std::move(spec);
    if (demodulated) (*demodulated)[kappa - 1] = std::move(sig);
  }
  collect_peaks(cfg, result, Route::kNumeric);
  return result;
}

NumericResult numeric_spectra(const RunConfig& cfg, const SignalGrid* grid) {
  NumericResult result;
  result.grid = grid ? *grid : compute_signal_grid(cfg.system, cfg.pulses, cfg.propagation, cfg.grid.axis());
  static_cast<SpectraResult&>(result) = numeric_spectra_from_grid(cfg, result.grid, &result.demodulated);
  return result;
}

std::array<HarmonicSignal, 2> analytic_signals(const RunConfig& cfg) {
  const auto axis = cfg.grid.axis();
  return {first_harmonic_signal(cfg.system, cfg.pulses, axis, cfg.demod.omega_M),
          second_harmonic_signal(cfg.system, cfg.pulses, axis, cfg.demod.omega_M)};
}

SpectraResult analytic_spectra(const RunConfig& cfg) {
  const auto omega = spectrum_frequencies(cfg.grid.count, cfg.grid.step);
  const auto signals = analytic_signals(cfg);
  SpectraResult result;
  for (int k = 0; k < 2; ++k) {
    result.spectra[k] = analytic_spectrum(signals[k], cfg.grid.window_sigma, omega);
    remove_background(cfg, result.spectra[k]);
  }
  collect_peaks(cfg, result, Route::kAnalytic);
  return result;
}

RunConfig apply_sweep_value(const RunConfig& base, const SweepSpec& spec, double value) {
  RunConfig cfg = base;
  switch (spec.axis) {
    case SweepAxis::kVee:
      cfg.system.v_ee = value;
      cfg.system.v_ff = spec.ratio * value;
      break;
    case SweepAxis::kSigma:
      cfg.pulses.envelope = normalize_to_area(spec.area, cfg.pulses.envelope.with_width(value));
      break;
    case SweepAxis::kE0:
      cfg.pulses.envelope.e0 = value;
      break;
  }
  cfg.validate();
  return cfg;
}

std::vector<PeakRow> run_sweep(const RunConfig& base, const SweepSpec& spec) {
  if (spec.values.empty()) throw std::invalid_argument("run_sweep: no sweep values");
  std::vector<PeakRow> rows;
  for (double value : spec.values) {
    try {
      const RunConfig cfg = apply_sweep_value(base, spec, value);
      std::vector<PeakRow> part;
      if (spec.route != Route::kAnalytic) part = numeric_spectra(cfg).peaks;
      if (spec.route != Route::kNumeric) {
        const auto analytic = analytic_spectra(cfg).peaks;
        part.insert(part.end(), analytic.begin(), analytic.end());
      }
      for (auto& row : part) {
        row.sweep_value = value;
        rows.push_back(row);
      }
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "sweep " << to_string(spec.axis) << " = " << value << ": " << e.what();
      throw std::runtime_error(os.str());
    }
  }
  return rows;
}

const PeakRow& find_peak(const std::vector<PeakRow>& rows, const std::string& label, Route route,
                         std::optional<double> sweep_value) {
  for (const auto& r : rows) {
    if (r.label == label && r.route == route && (!sweep_value || r.sweep_value == *sweep_value)) return r;
  }
  throw std::out_of_range("find_peak: no row for " + label);
}

}  // namespace pmspec
