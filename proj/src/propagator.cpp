#include "pmspec/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <exception>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

namespace pmspec {

namespace {

using cd = std::complex<double>;
using CVec9 = Eigen::Matrix<cd, kDim, 1>;
using CMat9 = Eigen::Matrix<cd, kDim, kDim>;
using CMat9X = Eigen::Matrix<cd, kDim, Eigen::Dynamic>;

constexpr cd kI{0.0, 1.0};

// P_Fluor in the collective basis (gg, ge+, ge-, gf+, gf-, ee, ef+, ef-, ff)
RealVector9 collective_excitation_count() {
  RealVector9 p;
  p << 0, 1, 1, 1, 1, 2, 2, 2, 2;
  return p;
}

CVec9 phase_vector(const RealVector9& energies, double t) {
  CVec9 v;
  for (int a = 0; a < kDim; ++a) v(a) = std::polar(1.0, energies(a) * t);
  return v;
}

// Runs fn(begin, end) over [0, count) split into contiguous chunks.
template <typename Fn>
void parallel_rows(std::size_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (workers == 1) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(count, w * chunk);
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename T>
struct SeriesCoeff {
  using type = T;
};
template <>
struct SeriesCoeff<double> {
  using type = cd;
};

// Trigonometric interpolation from K (odd) equally spaced samples on [0, 2 pi).
template <typename T>
class PhaseSeries {
 public:
  using Coeff = typename SeriesCoeff<T>::type;

  explicit PhaseSeries(const std::vector<T>& samples) {
    const int k = static_cast<int>(samples.size());
    half_ = (k - 1) / 2;
    coeff_.resize(2 * half_ + 1);
    for (int n = -half_; n <= half_; ++n) {
      Coeff c = Coeff(samples[0]) * cd(0.0);
      for (int q = 0; q < k; ++q) {
        c += Coeff(samples[q]) * std::polar(1.0 / k, -2.0 * std::numbers::pi * n * q / k);
      }
      coeff_[n + half_] = c;
    }
  }

  Coeff operator()(double theta) const {
    Coeff out = coeff_[half_];
    for (int n = 1; n <= half_; ++n) {
      out += coeff_[n + half_] * std::polar(1.0, n * theta);
      out += coeff_[half_ - n] * std::polar(1.0, -n * theta);
    }
    return out;
  }

 private:
  int half_{0};
  std::vector<Coeff> coeff_;
};

double sample_phase(int q, int k) { return 2.0 * std::numbers::pi * q / k; }

void check_norms(const CMat9X& c, double tol, const std::string& where) {
  for (Eigen::Index j = 0; j < c.cols(); ++j) {
    const double drift = std::abs(c.col(j).norm() - 1.0);
    if (!(drift <= tol)) {
      std::ostringstream os;
      os << where << ": norm drift " << drift << " exceeds " << tol << " (time step too large?)";
      throw PropagationError(os.str());
    }
  }
}

}  // namespace

double PropagationSettings::step_for(const PulseTrainConfig& cfg) const {
  if (dt > 0) return dt;
  const double carrier = std::max({cfg.omega_L, cfg.carrier(0), cfg.carrier(1)});
  return std::min(2.0 * std::numbers::pi / (40.0 * carrier), cfg.envelope.width() / 20.0);
}

void PropagationSettings::validate() const {
  if (dt < 0 || !std::isfinite(dt)) throw std::invalid_argument("PropagationSettings: dt must be positive (or 0 for auto)");
  if (start_pad < 5.0 || end_pad < 5.0) {
    throw std::invalid_argument("PropagationSettings: pads must be at least 5 envelope widths");
  }
  if (phase_samples < 3 || phase_samples % 2 == 0) {
    throw std::invalid_argument("PropagationSettings: phase_samples must be odd and >= 3");
  }
  if (!(norm_tolerance > 0)) throw std::invalid_argument("PropagationSettings: norm tolerance must be positive");
}

Propagator::Propagator(const DimerSystem& sys, double origin)
    : transform_(collective_transform(sys)), origin_(origin) {
  const Operator9 d = build_dipole_operator(sys);
  coupling_ = transform_.vectors.transpose().cast<cd>() * d * transform_.vectors.cast<cd>();
  const double cutoff = 1e-14 * coupling_.cwiseAbs().maxCoeff();
  for (int j = 0; j < kDim; ++j) {
    for (int i = 0; i < kDim; ++i) {
      if (std::abs(coupling_(i, j)) > cutoff) links_.push_back({i, j, coupling_(i, j).real()});
    }
  }
}

StateVector Propagator::to_interaction(const StateVector& psi, double t) const {
  const CVec9 tilde = transform_.vectors.transpose().cast<cd>() * psi;
  return phase_vector(transform_.energies, t - origin_).cwiseProduct(tilde);
}

StateVector Propagator::to_schroedinger(const StateVector& c, double t) const {
  const CVec9 tilde = phase_vector(transform_.energies, -(t - origin_)).cwiseProduct(c);
  return transform_.vectors.cast<cd>() * tilde;
}

void Propagator::advance(Eigen::Ref<CMat9X> c, const FieldFunction& field, double t_from, double t_to,
                         long steps) const {
  if (steps < 1) throw std::invalid_argument("Propagator::advance: need at least one step");
  Eigen::MatrixXd nodes(2 * steps + 1, 1);
  const double half = 0.5 * (t_to - t_from) / steps;
  for (long k = 0; k <= 2 * steps; ++k) nodes(k, 0) = field(t_from + k * half);
  advance_sampled(c, nodes, t_from, t_to);
}

void Propagator::advance_sampled(Eigen::Ref<CMat9X> c, const Eigen::MatrixXd& field_nodes, double t_from,
                                 double t_to) const {
  const long steps = (field_nodes.rows() - 1) / 2;
  if (steps < 1 || field_nodes.rows() != 2 * steps + 1) {
    throw std::invalid_argument("Propagator::advance_sampled: need 2*steps+1 field nodes");
  }
  const Eigen::Index ncol = c.cols();
  const bool shared = field_nodes.cols() == 1;
  if (!shared && field_nodes.cols() != ncol) {
    throw std::invalid_argument("Propagator::advance_sampled: field columns must match state columns");
  }
  const double h = (t_to - t_from) / steps;
  const RealVector9& energies = transform_.energies;
  const CVec9 rot_half = phase_vector(energies, 0.5 * h);

  CMat9X k1(kDim, ncol), k2(kDim, ncol), k3(kDim, ncol), k4(kDim, ncol), y(kDim, ncol);
  std::vector<cd> link_a(links_.size()), link_b(links_.size()), link_c(links_.size());
  auto link_phases = [&](const CVec9& ph, std::vector<cd>& out) {
    for (std::size_t k = 0; k < links_.size(); ++k) {
      out[k] = links_[k].value * ph(links_[k].row) * std::conj(ph(links_[k].col));
    }
  };

  // dc/dt = i E(t) Phi(t) D Phi(t)^* c, with D sparse in the collective basis
  auto deriv = [&](long node, const std::vector<cd>& link, const CMat9X& in, CMat9X& out) {
    out.setZero();
    for (std::size_t k = 0; k < links_.size(); ++k) out.row(links_[k].row) += link[k] * in.row(links_[k].col);
    if (shared) {
      out *= kI * field_nodes(node, 0);
    } else {
      for (Eigen::Index j = 0; j < ncol; ++j) out.col(j) *= kI * field_nodes(node, j);
    }
  };

  CVec9 ph_a = phase_vector(energies, t_from - origin_);
  for (long n = 0; n < steps; ++n) {
    if (n % 32 == 0) ph_a = phase_vector(energies, t_from + n * h - origin_);
    const CVec9 ph_b = ph_a.cwiseProduct(rot_half);
    const CVec9 ph_c = ph_b.cwiseProduct(rot_half);
    const long node = 2 * n;
    const bool idle = field_nodes.row(node).isZero(0.0) && field_nodes.row(node + 1).isZero(0.0) &&
                      field_nodes.row(node + 2).isZero(0.0);
    if (!idle) {
      link_phases(ph_a, link_a);
      link_phases(ph_b, link_b);
      link_phases(ph_c, link_c);
      deriv(node, link_a, c, k1);
      y = c + (0.5 * h) * k1;
      deriv(node + 1, link_b, y, k2);
      y = c + (0.5 * h) * k2;
      deriv(node + 1, link_b, y, k3);
      y = c + h * k3;
      deriv(node + 2, link_c, y, k4);
      c += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    ph_a = ph_c;
  }
}

double fluorescence(const StateVector& psi) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i) {
    s += std::norm(psi(i)) * ((kProductLevels[i][0] != kG) + (kProductLevels[i][1] != kG));
  }
  return s;
}

namespace {

long step_count(double span, double dt) {
  return std::max<long>(1, static_cast<long>(std::ceil(span / dt - 1e-9)));
}

// Field of pair m (config with t21 already set) at the half-step nodes of [a, b].
Eigen::MatrixXd sample_field(const PulseTrainConfig& cfg, int m, double a, double b, long steps) {
  Eigen::MatrixXd nodes(2 * steps + 1, 1);
  const double half = 0.5 * (b - a) / steps;
  for (long k = 0; k <= 2 * steps; ++k) {
    const double t = a + k * half;
    nodes(k, 0) = pulse_field(cfg, 0, m, t) + pulse_field(cfg, 1, m, t);
  }
  return nodes;
}

// Interaction-picture coefficients (origin t1) after pair m, starting from |gg>.
CVec9 propagate_cell(const Propagator& prop, const PulseTrainConfig& cfg, int m, double dt, double tol) {
  const double sup = cfg.envelope.support_halfwidth();
  const double a = cfg.t1 - sup, b = cfg.t2() + sup;
  const long steps = step_count(b - a, dt);
  CMat9X c = CMat9X::Zero(kDim, 1);
  c(0, 0) = 1.0;
  prop.advance_sampled(c, sample_field(cfg, m, a, b, steps), a, b);
  check_norms(c, tol, "propagate_pair");
  return c.col(0);
}

double excitation(const CVec9& c) {
  static const RealVector9 count = collective_excitation_count();
  double s = 0.0;
  for (int a = 0; a < kDim; ++a) s += count(a) * std::norm(c(a));
  return s;
}

// Interaction-picture propagator of one centred pulse, W(theta), from phase samples.
class PulseOperator {
 public:
  PulseOperator(const Propagator& prop, const Envelope& env, double carrier, int samples, double dt, double tol) {
    const double sup = env.support_halfwidth();
    const long steps = step_count(2.0 * sup, dt);
    const double half = sup / steps;
    const long nodes = 2 * steps + 1;
    Eigen::MatrixXd field(nodes, static_cast<Eigen::Index>(kDim) * samples);
    for (long k = 0; k < nodes; ++k) {
      const double s = -sup + k * half;
      const double a = env(s);
      for (int q = 0; q < samples; ++q) {
        const double f = a * std::cos(carrier * s + sample_phase(q, samples));
        field.block(k, q * kDim, 1, kDim).setConstant(f);
      }
    }
    CMat9X c(kDim, static_cast<Eigen::Index>(kDim) * samples);
    for (int q = 0; q < samples; ++q) c.block<kDim, kDim>(0, q * kDim).setIdentity();
    prop.advance_sampled(c, field, -sup, sup);
    check_norms(c, tol, "pulse propagator");
    std::vector<CMat9> mats(samples);
    for (int q = 0; q < samples; ++q) mats[q] = c.block<kDim, kDim>(0, q * kDim);
    series_.emplace(mats);
  }

  CMat9 operator()(double theta) const { return (*series_)(theta); }

 private:
  std::optional<PhaseSeries<CMat9>> series_;
};

SignalGrid empty_grid(const PulseTrainConfig& cfg, std::span<const double> t21_values) {
  SignalGrid g;
  g.t21.assign(t21_values.begin(), t21_values.end());
  g.tau.resize(cfg.pair_count);
  for (int m = 0; m < cfg.pair_count; ++m) g.tau[m] = cfg.tau(m);
  g.values.resize(static_cast<Eigen::Index>(g.t21.size()), cfg.pair_count);
  return g;
}

std::string cell_context(double t21, int m) {
  std::ostringstream os;
  os << " at cell (t21 = " << t21 << ", m = " << m << ")";
  return os.str();
}

void grid_direct(const Propagator& prop, const PulseTrainConfig& cfg, const PropagationSettings& settings,
                 double dt, SignalGrid& grid) {
  parallel_rows(grid.t21.size(), settings.workers, [&](std::size_t begin, std::size_t end) {
    PulseTrainConfig local = cfg;
    for (std::size_t r = begin; r < end; ++r) {
      local.t21 = grid.t21[r];
      for (int m = 0; m < cfg.pair_count; ++m) {
        try {
          grid.values(r, m) = excitation(propagate_cell(prop, local, m, dt, settings.norm_tolerance));
        } catch (const PropagationError& e) {
          throw PropagationError(e.what() + cell_context(local.t21, m));
        }
      }
    }
  });
}

void grid_factorized(const Propagator& prop, const PulseTrainConfig& cfg, const PropagationSettings& settings,
                     double dt, SignalGrid& grid) {
  const int samples = settings.phase_samples;
  const int pairs = cfg.pair_count;
  const double sup = cfg.envelope.support_halfwidth();
  const RealVector9 count = collective_excitation_count();
  const RealVector9& energies = prop.transform().energies;

  // Per-pair pulse operators; a disabled pulse acts as the identity.
  std::vector<CVec9> after_first(pairs);
  std::vector<CMat9> second(pairs);
  {
    std::optional<PulseOperator> w1, w2;
    if (cfg.enabled[0]) w1.emplace(prop, cfg.envelope, cfg.carrier(0), samples, dt, settings.norm_tolerance);
    if (cfg.enabled[1]) {
      if (cfg.enabled[0] && cfg.carrier(1) == cfg.carrier(0)) w2 = w1;
      else w2.emplace(prop, cfg.envelope, cfg.carrier(1), samples, dt, settings.norm_tolerance);
    }
    for (int m = 0; m < pairs; ++m) {
      after_first[m] = w1 ? CVec9((*w1)(cfg.phase(0, m)).col(0)) : CVec9::Unit(0);
      second[m] = w2 ? (*w2)(cfg.phase(1, m)) : CMat9::Identity();
    }
  }

  bool first_phase_fixed = true;
  for (int m = 1; m < pairs; ++m) first_phase_fixed = first_phase_fixed && cfg.phase(0, m) == cfg.phase(0, 0);

  parallel_rows(grid.t21.size(), settings.workers, [&](std::size_t begin, std::size_t end) {
    PulseTrainConfig local = cfg;
    for (std::size_t r = begin; r < end; ++r) {
      const double t21 = grid.t21[r];
      local.t21 = t21;
      if (t21 >= 2.0 * sup) {
        // separated pulses: |c_F> = W2 exp(-i H0 t21) W1 |gg>
        const CVec9 free = phase_vector(energies, -t21);
        for (int m = 0; m < pairs; ++m) {
          const CVec9 y = second[m] * free.cwiseProduct(after_first[m]);
          double s = 0.0;
          for (int a = 0; a < kDim; ++a) s += count(a) * std::norm(y(a));
          grid.values(r, m) = s;
        }
        continue;
      }
      if (!first_phase_fixed) {
        for (int m = 0; m < pairs; ++m) {
          try {
            grid.values(r, m) = excitation(propagate_cell(prop, local, m, dt, settings.norm_tolerance));
          } catch (const PropagationError& e) {
            throw PropagationError(e.what() + cell_context(t21, m));
          }
        }
        continue;
      }
      // overlapping pulses: sample the second pulse's carrier phase, then interpolate
      const double a = cfg.t1 - sup, b = cfg.t1 + t21 + sup;
      const long steps = step_count(b - a, dt);
      const double half = 0.5 * (b - a) / steps;
      const double theta1 = cfg.phase(0, 0);
      const double carrier1 = cfg.carrier(0), carrier2 = cfg.carrier(1);
      Eigen::MatrixXd field(2 * steps + 1, samples);
      for (long k = 0; k <= 2 * steps; ++k) {
        const double t = a + k * half;
        const double s1 = t - cfg.t1, s2 = t - local.t2();
        const double f1 = cfg.enabled[0] ? cfg.envelope(s1) * std::cos(carrier1 * s1 + theta1) : 0.0;
        const double a2 = cfg.enabled[1] ? cfg.envelope(s2) : 0.0;
        for (int q = 0; q < samples; ++q) {
          field(k, q) = f1 + (a2 == 0.0 ? 0.0 : a2 * std::cos(carrier2 * s2 + sample_phase(q, samples)));
        }
      }
      CMat9X c = CMat9X::Zero(kDim, samples);
      c.row(0).setOnes();
      prop.advance_sampled(c, field, a, b);
      try {
        check_norms(c, settings.norm_tolerance, "propagate_pair");
      } catch (const PropagationError& e) {
        throw PropagationError(e.what() + cell_context(t21, 0));
      }
      std::vector<double> s(samples, 0.0);
      for (int q = 0; q < samples; ++q) s[q] = excitation(c.col(q));
      const PhaseSeries<double> series(s);
      // interpolation ringing can leave the admissible range by ~1e-11
      for (int m = 0; m < pairs; ++m) grid.values(r, m) = std::clamp(std::real(series(cfg.phase(1, m))), 0.0, 2.0);
    }
  });
}

}  // namespace

StateVector propagate_pair(const DimerSystem& sys, const PulseTrainConfig& cfg, int m, double t21,
                           const PropagationSettings& settings) {
  settings.validate();
  PulseTrainConfig local = cfg;
  local.t21 = t21;
  local.validate();
  if (m < 0 || m >= local.pair_count) throw std::out_of_range("propagate_pair: pair index out of range");
  const double width = local.envelope.width();
  const double t0 = local.t1 - settings.start_pad * width;
  const double tf = local.t2() + settings.end_pad * width;
  const double sup = local.envelope.support_halfwidth();
  const double a = std::max(t0, local.t1 - sup);
  const double b = std::min(tf, local.t2() + sup);

  const Propagator prop(sys, 0.0);
  StateVector gg = StateVector::Zero();
  gg(kGG) = 1.0;
  CMat9X c(kDim, 1);
  c.col(0) = prop.to_interaction(gg, t0);
  if (b > a) {
    const long steps = step_count(b - a, settings.step_for(local));
    prop.advance_sampled(c, sample_field(local, m, a, b, steps), a, b);
  }
  check_norms(c, settings.norm_tolerance, "propagate_pair");
  return prop.to_schroedinger(c.col(0), tf);
}

SignalGrid compute_signal_grid(const DimerSystem& sys, const PulseTrainConfig& cfg,
                               const PropagationSettings& settings, std::span<const double> t21_values) {
  settings.validate();
  cfg.validate();
  sys.validate();
  for (std::size_t i = 0; i < t21_values.size(); ++i) {
    if (!(t21_values[i] >= 0) || (i > 0 && !(t21_values[i] > t21_values[i - 1]))) {
      throw std::invalid_argument("compute_signal_grid: t21 values must be non-negative and strictly ascending");
    }
  }
  SignalGrid grid = empty_grid(cfg, t21_values);
  const Propagator prop(sys, cfg.t1);
  const double dt = settings.step_for(cfg);
  if (settings.method == GridMethod::kDirect) grid_direct(prop, cfg, settings, dt, grid);
  else grid_factorized(prop, cfg, settings, dt, grid);
  return grid;
}

std::vector<double> uniform_axis(double start, double step, std::size_t count) {
  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) v[i] = start + step * static_cast<double>(i);
  return v;
}

}  // namespace pmspec
