// propagator.hpp - Schroedinger propagation of one pulse pair and the
// fluorescence grid S(t21, tau_m)

#pragma once

#include "pmspec/model.hpp"
#include "pmspec/pulses.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmspec {

enum class GridMethod {
  kDirect,       // propagate every (t21, tau_m) cell from |gg>
  kFactorized,   // exact pulse propagators for separated pulses, phase sampling otherwise
};

struct PropagationSettings {
  /// Time step; <= 0 selects 2 pi / (40 omega_L), capped at width / 20.
  double dt{0.0};
  /// Padding before the first and after the second pulse, in envelope widths.
  double start_pad{6.0};
  double end_pad{6.0};
  /// Norm drift above this aborts the propagation.
  double norm_tolerance{1e-6};
  /// Odd number of carrier-phase samples used to resolve the phase dependence.
  int phase_samples{11};
  GridMethod method{GridMethod::kFactorized};
  unsigned workers{1};

  double step_for(const PulseTrainConfig& cfg) const;
  void validate() const;
};

class PropagationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SignalGrid {
  std::vector<double> t21;
  std::vector<double> tau;
  Eigen::MatrixXd values;  // rows: t21, columns: tau_m
};

/// Real time-dependent field E(t).
using FieldFunction = std::function<double(double)>;

/// Interaction-picture propagation in the collective eigenbasis of the
/// static Hamiltonian. Coefficients c(t) = exp(i H0 (t - origin)) psi~(t).
class Propagator {
 public:
  Propagator(const DimerSystem& sys, double origin = 0.0);

  const CollectiveTransform& transform() const { return transform_; }
  const Eigen::Matrix<std::complex<double>, kDim, kDim>& coupling() const { return coupling_; }
  double origin() const { return origin_; }

  /// Fixed-step RK4 from t_from to t_to (either direction) with `steps` steps.
  /// Columns of `c` are propagated together under the same field.
  void advance(Eigen::Ref<Eigen::Matrix<std::complex<double>, kDim, Eigen::Dynamic>> c,
               const FieldFunction& field, double t_from, double t_to, long steps) const;

  /// Same, with one field per column sampled at the 2*steps+1 half-step nodes
  /// (column-major: node index fastest).
  void advance_sampled(Eigen::Ref<Eigen::Matrix<std::complex<double>, kDim, Eigen::Dynamic>> c,
                       const Eigen::MatrixXd& field_nodes, double t_from, double t_to) const;

  /// Schroedinger-picture product-basis state <-> interaction-picture coefficients.
  StateVector to_interaction(const StateVector& psi, double t) const;
  StateVector to_schroedinger(const StateVector& c, double t) const;

 private:
  struct Link {
    int row, col;
    double value;
  };

  CollectiveTransform transform_;
  Eigen::Matrix<std::complex<double>, kDim, kDim> coupling_;  // dipole operator in the eigenbasis
  std::vector<Link> links_;                                   // its nonzero entries
  double origin_;
};

/// Number of excited particles <psi|P_Fluor|psi> for a product-basis state.
double fluorescence(const StateVector& psi);

/// Propagates pair m from |gg> at t1 - pad to T_F = t2 + pad, with t2 = t1 + t21.
StateVector propagate_pair(const DimerSystem& sys, const PulseTrainConfig& cfg, int m, double t21,
                           const PropagationSettings& settings);

SignalGrid compute_signal_grid(const DimerSystem& sys, const PulseTrainConfig& cfg,
                               const PropagationSettings& settings, std::span<const double> t21_values);

/// Uniform delay axis start, start + step, ...
std::vector<double> uniform_axis(double start, double step, std::size_t count);

}  // namespace pmspec
