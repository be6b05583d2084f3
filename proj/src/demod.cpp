#include "pmspec/demod.hpp"
#include "pmspec/special.hpp"

#include <Eigen/QR>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pmspec {

namespace {

using cd = std::complex<double>;

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double uniform_step(std::span<const double> t) {
  if (t.size() < 2) throw std::invalid_argument("spectrum: need at least two samples");
  if (std::abs(t[0]) > 1e-12) throw std::invalid_argument("spectrum: the delay axis must start at t21 = 0");
  const double h = t[1] - t[0];
  if (!(h > 0)) throw std::invalid_argument("spectrum: the delay axis must be ascending");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs(t[i] - t[0] - h * static_cast<double>(i)) > 1e-9 * h * static_cast<double>(i)) {
      throw std::invalid_argument("spectrum: the delay axis must be uniform");
    }
  }
  return h;
}

// trapezoid weight at t = 0 times the Gaussian window
std::vector<double> windowed(std::span<const double> t, std::span<const double> trace, double sigma) {
  if (trace.size() != t.size()) throw std::invalid_argument("spectrum: trace and axis sizes differ");
  if (!(sigma > 0)) throw std::invalid_argument("spectrum: window width must be positive");
  std::vector<double> w(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    w[i] = trace[i] * std::exp(-0.5 * t[i] * t[i] / (sigma * sigma)) * (i == 0 ? 0.5 : 1.0);
  }
  return w;
}

double median(std::vector<double>& v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (n % 2) return *mid;
  const double upper = *mid;
  return 0.5 * (upper + *std::max_element(v.begin(), mid));
}

}  // namespace

void DemodSettings::validate() const {
  if (kappa < 1) throw std::invalid_argument("DemodSettings: harmonic order must be >= 1");
  if (!std::isfinite(omega_M)) throw std::invalid_argument("DemodSettings: omega_M must be finite");
  if (!std::isfinite(tau_LI) || !std::isfinite(phi21_ref)) {
    throw std::invalid_argument("DemodSettings: non-finite settings");
  }
}

DemodSignal demodulate(const SignalGrid& grid, const PulseTrainConfig& cfg, const DemodSettings& settings) {
  settings.validate();
  const auto rows = static_cast<std::size_t>(grid.values.rows());
  const auto cols = static_cast<int>(grid.values.cols());
  if (rows != grid.t21.size() || static_cast<std::size_t>(cols) != grid.tau.size() || cols < 1) {
    throw std::invalid_argument("demodulate: grid shape does not match its axes");
  }
  const double ref = settings.kappa * cfg.omega21();
  if (ref == 0.0) throw std::invalid_argument("demodulate: the reference frequency kappa * Omega21 is zero");

  std::vector<cd> reference(cols);
  for (int m = 0; m < cols; ++m) reference[m] = std::polar(1.0, -(ref * grid.tau[m] + settings.kappa * settings.phi21_ref));

  DemodSignal out;
  out.t21 = grid.t21;
  out.kappa = settings.kappa;
  out.values.resize(rows);

  const double span = grid.tau.back() - grid.tau.front() + cfg.t_rep;
  if (span * std::abs(cfg.omega21()) < 2.0 * std::numbers::pi * (1.0 - 1e-9)) {
    throw std::invalid_argument("demodulate: the pulse train is shorter than one modulation period");
  }
  if (settings.mode == DemodMode::kProjection) {
    const double periods = span * std::abs(ref) / (2.0 * std::numbers::pi);
    if (std::round(periods) < 1.0 || std::abs(periods - std::round(periods)) > 1e-6 * std::max(1.0, periods)) {
      std::ostringstream os;
      os << "demodulate: the pulse train covers " << periods
         << " reference periods; projection needs a whole number";
      throw std::invalid_argument(os.str());
    }
    for (std::size_t r = 0; r < rows; ++r) {
      cd acc{0.0, 0.0};
      for (int m = 0; m < cols; ++m) acc += grid.values(static_cast<Eigen::Index>(r), m) * reference[m];
      out.values[r] = acc / static_cast<double>(cols) * std::polar(1.0, settings.kappa * settings.omega_M * grid.t21[r]);
    }
    return out;
  }

  const double tau_li = settings.tau_LI > 0 ? settings.tau_LI : 2.0 * std::numbers::pi / std::abs(cfg.omega21());
  std::vector<cd> weight(cols);
  for (int m = 0; m < cols; ++m) weight[m] = reference[m] * (cfg.t_rep / tau_li) * std::exp(-grid.tau[m] / tau_li);
  for (std::size_t r = 0; r < rows; ++r) {
    cd x{0.0, 0.0};
    for (int m = 0; m < cols; ++m) x += grid.values(static_cast<Eigen::Index>(r), m) * weight[m];
    out.values[r] = x * std::polar(1.0, settings.kappa * settings.omega_M * grid.t21[r]);
  }
  return out;
}

std::vector<double> in_phase_trace(const DemodSignal& signal) {
  std::vector<double> out(signal.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * signal.values[i].real();
  return out;
}

double ComplexSpectrum::fwhm() const { return 2.0 * std::sqrt(2.0 * std::numbers::ln2) / window_sigma; }

ComplexSpectrum spectrum(std::span<const double> t, std::span<const double> trace, double window_sigma, int kappa,
                         int padding) {
  if (padding < 1) throw std::invalid_argument("spectrum: padding factor must be >= 1");
  const double h = uniform_step(t);
  const std::vector<double> w = windowed(t, trace, window_sigma);
  const std::size_t n = w.size() * static_cast<std::size_t>(padding);

  std::vector<cd> in(n, cd{0.0, 0.0}), freq;
  for (std::size_t i = 0; i < w.size(); ++i) in[i] = w[i];
  Eigen::FFT<double> fft;
  fft.fwd(freq, in);

  ComplexSpectrum out;
  out.kappa = kappa;
  out.window_sigma = window_sigma;
  out.omega = spectrum_frequencies(w.size(), h, padding);
  out.values.resize(n);
  const std::size_t neg = n / 2;  // bins reordered so that omega runs from -pi/h upwards
  for (std::size_t k = 0; k < n; ++k) out.values[k] = freq[(k + n - neg) % n] * (h * kInvSqrt2Pi);
  return out;
}

std::vector<double> spectrum_frequencies(std::size_t samples, double step, int padding) {
  const std::size_t n = samples * static_cast<std::size_t>(padding);
  const double dw = 2.0 * std::numbers::pi / (static_cast<double>(n) * step);
  std::vector<double> omega(n);
  const auto neg = static_cast<double>(n / 2);
  for (std::size_t k = 0; k < n; ++k) omega[k] = (static_cast<double>(k) - neg) * dw;
  return omega;
}

std::vector<cd> spectrum_at(std::span<const double> t, std::span<const double> trace, double window_sigma,
                            std::span<const double> omega) {
  const double h = uniform_step(t);
  const std::vector<double> w = windowed(t, trace, window_sigma);
  std::vector<cd> out(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    cd acc{0.0, 0.0};
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] != 0.0) acc += w[i] * std::polar(1.0, -omega[k] * t[i]);
    }
    out[k] = acc * (h * kInvSqrt2Pi);
  }
  return out;
}

cd windowed_line(double y) {
  return {std::sqrt(0.5 * std::numbers::pi) * std::exp(-0.5 * y * y), -std::sqrt(2.0) * dawson(y / std::sqrt(2.0))};
}

ComplexSpectrum subtract_background(const ComplexSpectrum& spec, std::span<const double> peak_omegas,
                                    const BackgroundSettings& settings) {
  const std::size_t n = spec.omega.size();
  if (n < 3 || spec.values.size() != n) throw std::invalid_argument("subtract_background: malformed spectrum");
  const double dw = spec.omega[1] - spec.omega[0];
  const double fwhm = spec.fwhm();
  const auto half_window = static_cast<std::ptrdiff_t>(std::ceil(0.5 * settings.window_fwhm * fwhm / dw));

  std::vector<char> masked(n, 0);
  std::size_t excluded = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (double p : peak_omegas) {
      if (std::abs(spec.omega[i] - p) <= settings.exclusion_fwhm * fwhm) {
        masked[i] = 1;
        break;
      }
    }
    excluded += masked[i];
  }
  if (static_cast<double>(excluded) > settings.max_excluded * static_cast<double>(n)) {
    std::ostringstream os;
    os << "subtract_background: exclusion zones cover " << excluded << " of " << n
       << " points; spectral window too short for this peak set";
    throw std::invalid_argument(os.str());
  }
  if (excluded == n) throw std::invalid_argument("subtract_background: no unmasked points");
  if (settings.bridge_degree < 1 || !(settings.bridge_flank_fwhm > 0.0)) {
    throw std::invalid_argument("subtract_background: bridge degree must be >= 1 and flank width positive");
  }

  // Median over mirror pairs (j, 2i - j) that are both unmasked; a linear
  // baseline is reproduced exactly.
  std::vector<double> base_re(n), base_im(n);
  std::vector<double> re, im;
  const auto sn = static_cast<std::ptrdiff_t>(n);
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    if (masked[i]) continue;
    const std::ptrdiff_t reach = std::min({half_window, i, sn - 1 - i});
    re.clear();
    im.clear();
    for (std::ptrdiff_t d = -reach; d <= reach; ++d) {
      const std::ptrdiff_t j = i + d, mirror = i - d;
      if (masked[j] || masked[mirror]) continue;
      re.push_back(spec.values[j].real());
      im.push_back(spec.values[j].imag());
    }
    base_re[i] = median(re);
    base_im[i] = median(im);
  }

  // Bridge each excluded stretch with a Legendre polynomial fitted to the
  // unmasked flanks. The fit also carries the windowed line shape of every
  // expected peak in the span, so their slowly decaying dispersive tails are
  // not mistaken for background; only the polynomial part is subtracted.
  const auto flank = static_cast<std::ptrdiff_t>(std::ceil(settings.bridge_flank_fwhm * fwhm / dw));
  const int terms = settings.bridge_degree + 1;
  for (std::ptrdiff_t lo = 0; lo < sn;) {
    if (!masked[lo]) {
      ++lo;
      continue;
    }
    std::ptrdiff_t hi = lo;
    while (hi + 1 < sn && masked[hi + 1]) ++hi;
    const std::ptrdiff_t a = std::max<std::ptrdiff_t>(0, lo - flank), b = std::min(sn - 1, hi + flank);
    std::vector<double> lines;
    for (double p : peak_omegas) {
      const bool inside = p >= spec.omega[a] && p <= spec.omega[b];
      const bool repeated = std::any_of(lines.begin(), lines.end(), [&](double q) { return std::abs(q - p) < dw; });
      if (inside && !repeated) lines.push_back(p);
    }
    std::vector<std::ptrdiff_t> fit;
    for (std::ptrdiff_t j = a; j <= b; ++j) {
      if (!masked[j]) fit.push_back(j);
    }
    const int columns = terms + static_cast<int>(lines.size());
    if (static_cast<int>(fit.size()) < 2 * columns) {
      throw std::invalid_argument("subtract_background: too few unmasked points to bridge an excluded stretch");
    }
    const double centre = 0.5 * (spec.omega[a] + spec.omega[b]);
    const double half = std::max(0.5 * (spec.omega[b] - spec.omega[a]), dw);
    auto legendre_row = [&](double omega, Eigen::RowVectorXd& row) {
      const double x = (omega - centre) / half;
      row(0) = 1.0;
      if (terms > 1) row(1) = x;
      for (int k = 1; k + 1 < terms; ++k) row(k + 1) = ((2 * k + 1) * x * row(k) - k * row(k - 1)) / (k + 1);
    };
    auto line = [&](double omega, double p) { return windowed_line((omega - p) * spec.window_sigma); };
    Eigen::MatrixXcd design(fit.size(), columns);
    Eigen::VectorXcd rhs(fit.size());
    Eigen::RowVectorXd row(terms);
    for (std::size_t r = 0; r < fit.size(); ++r) {
      const double omega = spec.omega[fit[r]];
      legendre_row(omega, row);
      design.row(r).head(terms) = row.cast<cd>();
      for (std::size_t k = 0; k < lines.size(); ++k) design(r, terms + k) = line(omega, lines[k]);
      rhs(r) = spec.values[fit[r]];
    }
    const Eigen::VectorXcd coef = design.colPivHouseholderQr().solve(rhs);
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
      legendre_row(spec.omega[k], row);
      cd v{};
      for (int t = 0; t < terms; ++t) v += row(t) * coef(t);
      base_re[k] = v.real();
      base_im[k] = v.imag();
    }
    lo = hi + 1;
  }

  ComplexSpectrum out = spec;
  for (std::size_t i = 0; i < n; ++i) out.values[i] -= cd{base_re[i], base_im[i]};
  return out;
}

}  // namespace pmspec
