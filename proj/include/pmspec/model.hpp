// model.hpp - two coupled three-level emitters in the 9-dim product basis
//
// Product basis ordering: {gg, ge, eg, gf, fg, ee, ef, fe, ff}, where the first
// letter labels particle 1 and the second particle 2.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmspec {

inline constexpr int kDim = 9;

enum Level : int { kG = 0, kE = 1, kF = 2 };

enum ProductState : int { kGG = 0, kGE, kEG, kGF, kFG, kEE, kEF, kFE, kFF };

// single-particle levels of each product state: {particle 1, particle 2}
inline constexpr std::array<std::array<int, 2>, kDim> kProductLevels{{
    {kG, kG}, {kG, kE}, {kE, kG}, {kG, kF}, {kF, kG}, {kE, kE}, {kE, kF}, {kF, kE}, {kF, kF}}};

inline constexpr std::array<const char*, kDim> kProductLabels{
    "gg", "ge", "eg", "gf", "fg", "ee", "ef", "fe", "ff"};

constexpr int product_index(int level1, int level2) {
  for (int i = 0; i < kDim; ++i) {
    if (kProductLevels[i][0] == level1 && kProductLevels[i][1] == level2) return i;
  }
  return -1;
}

template <typename Scalar>
using Operator9T = Eigen::Matrix<std::complex<Scalar>, kDim, kDim>;
template <typename Scalar>
using StateVectorT = Eigen::Matrix<std::complex<Scalar>, kDim, 1>;

using Operator9 = Operator9T<double>;
using StateVector = StateVectorT<double>;
using RealOperator9 = Eigen::Matrix<double, kDim, kDim>;
using RealVector9 = Eigen::Matrix<double, kDim, 1>;

/// Single three-level emitter. Energies in units of omega_0, dipoles in
/// field-coupling units.
template <typename Scalar>
struct ParticleSpecT {
  Scalar eps_g{0};
  Scalar eps_e{1.5};
  Scalar eps_f{1.55};
  Scalar mu_e{0.75};
  Scalar mu_f{1.054};

  Scalar omega_eg() const { return eps_e - eps_g; }
  Scalar omega_fg() const { return eps_f - eps_g; }
  Scalar omega_fe() const { return eps_f - eps_e; }

  Scalar energy(int level) const {
    return level == kG ? eps_g : (level == kE ? eps_e : eps_f);
  }
  Scalar dipole(int excited_level) const { return excited_level == kE ? mu_e : mu_f; }

  void validate() const {
    if (!(eps_g < eps_e && eps_e < eps_f)) {
      throw std::invalid_argument("ParticleSpec: require eps_g < eps_e < eps_f");
    }
    if (!(mu_e > 0) || !(mu_f > 0)) {
      throw std::invalid_argument("ParticleSpec: transition dipoles must be positive");
    }
  }
};

template <typename Scalar>
struct GeometryT {
  Scalar r{1};
  Scalar theta{0};

  void validate() const {
    if (!(r > 0) || !std::isfinite(r)) {
      throw std::domain_error("Geometry: separation must be positive (point-dipole singularity at r = 0)");
    }
    if (!(theta >= 0 && theta <= std::numbers::pi_v<Scalar>)) {
      throw std::invalid_argument("Geometry: theta must lie in [0, pi]");
    }
  }
};

/// Point-dipole coupling for parallel dipoles: mu_a mu_b (1 - 3 cos^2 theta) / r^3.
template <typename Scalar>
Scalar dipole_coupling(const GeometryT<Scalar>& geom, Scalar mu_a, Scalar mu_b) {
  geom.validate();
  const Scalar c = std::cos(geom.theta);
  return mu_a * mu_b * (Scalar(1) - Scalar(3) * c * c) / (geom.r * geom.r * geom.r);
}

/// Two identical particles with resonant dipole-dipole couplings in the
/// singly excited e and f manifolds. The off-resonant e-f coupling is zero.
template <typename Scalar>
struct DimerSystemT {
  ParticleSpecT<Scalar> particle{};
  Scalar v_ee{0.01};
  Scalar v_ff{0.01974};

  static DimerSystemT from_geometry(const ParticleSpecT<Scalar>& p, const GeometryT<Scalar>& g) {
    DimerSystemT s;
    s.particle = p;
    s.v_ee = dipole_coupling(g, p.mu_e, p.mu_e);
    s.v_ff = dipole_coupling(g, p.mu_f, p.mu_f);
    return s;
  }

  Scalar coupling(int excited_level) const { return excited_level == kE ? v_ee : v_ff; }

  void validate() const {
    particle.validate();
    if (!std::isfinite(v_ee) || !std::isfinite(v_ff)) {
      throw std::invalid_argument("DimerSystem: couplings must be finite");
    }
  }
};

using ParticleSpec = ParticleSpecT<double>;
using Geometry = GeometryT<double>;
using DimerSystem = DimerSystemT<double>;

/// H_1 + H_2 + V_12 in the product basis.
template <typename Scalar>
Operator9T<Scalar> build_static_hamiltonian(const DimerSystemT<Scalar>& sys) {
  sys.validate();
  Operator9T<Scalar> h = Operator9T<Scalar>::Zero();
  for (int i = 0; i < kDim; ++i) {
    h(i, i) = sys.particle.energy(kProductLevels[i][0]) + sys.particle.energy(kProductLevels[i][1]);
  }
  h(kGE, kEG) = h(kEG, kGE) = sys.v_ee;
  h(kGF, kFG) = h(kFG, kGF) = sys.v_ff;
  return h;
}

/// Field-independent dipole operator D = sum_n (mu_e |g><e| + mu_f |g><f| + h.c.);
/// the light-matter coupling is H_int(t) = -E(t) D.
template <typename Scalar>
Operator9T<Scalar> build_dipole_operator(const DimerSystemT<Scalar>& sys) {
  sys.validate();
  Operator9T<Scalar> d = Operator9T<Scalar>::Zero();
  for (int i = 0; i < kDim; ++i) {
    const auto [a, b] = kProductLevels[i];
    // particle 1 g <-> x, particle 2 spectator
    if (a == kG) {
      for (int x : {kE, kF}) d(i, product_index(x, b)) = sys.particle.dipole(x);
    }
    if (b == kG) {
      for (int x : {kE, kF}) d(i, product_index(a, x)) = sys.particle.dipole(x);
    }
  }
  // rows above fill <g..|D|x..>; mirror for the Hermitian conjugate
  for (int i = 0; i < kDim; ++i) {
    for (int j = 0; j < kDim; ++j) {
      if (d(i, j) != std::complex<Scalar>(0)) d(j, i) = std::conj(d(i, j));
    }
  }
  return d;
}

/// Number of excited particles, diagonal in the product basis.
template <typename Scalar = double>
Operator9T<Scalar> fluorescence_operator() {
  Operator9T<Scalar> p = Operator9T<Scalar>::Zero();
  for (int i = 0; i < kDim; ++i) {
    p(i, i) = Scalar((kProductLevels[i][0] != kG) + (kProductLevels[i][1] != kG));
  }
  return p;
}

template <typename Scalar>
struct CollectiveStateT {
  std::string label;
  Scalar energy;
  StateVectorT<Scalar> state;
};

/// Symmetric and antisymmetric eigenstates of the static Hamiltonian, in the
/// order gg, ge+, ge-, gf+, gf-, ee, ef+, ef-, ff.
///
/// The gf manifold is assigned E_g + E_f +/- V_ff (the tabulated E_g + E_e
/// does not match the spectra).
template <typename Scalar>
std::vector<CollectiveStateT<Scalar>> collective_eigenbasis(const DimerSystemT<Scalar>& sys) {
  sys.validate();
  const auto& p = sys.particle;
  const Scalar s = Scalar(1) / std::sqrt(Scalar(2));
  auto basis = [](int i) {
    StateVectorT<Scalar> v = StateVectorT<Scalar>::Zero();
    v(i) = 1;
    return v;
  };
  std::vector<CollectiveStateT<Scalar>> out;
  out.reserve(kDim);
  out.push_back({"gg", 2 * p.eps_g, basis(kGG)});
  out.push_back({"ge+", p.eps_g + p.eps_e + sys.v_ee, s * (basis(kGE) + basis(kEG))});
  out.push_back({"ge-", p.eps_g + p.eps_e - sys.v_ee, s * (basis(kGE) - basis(kEG))});
  out.push_back({"gf+", p.eps_g + p.eps_f + sys.v_ff, s * (basis(kGF) + basis(kFG))});
  out.push_back({"gf-", p.eps_g + p.eps_f - sys.v_ff, s * (basis(kGF) - basis(kFG))});
  out.push_back({"ee", 2 * p.eps_e, basis(kEE)});
  out.push_back({"ef+", p.eps_e + p.eps_f, s * (basis(kEF) + basis(kFE))});
  out.push_back({"ef-", p.eps_e + p.eps_f, s * (basis(kEF) - basis(kFE))});
  out.push_back({"ff", 2 * p.eps_f, basis(kFF)});
  return out;
}

/// Real orthogonal transform whose columns are the collective eigenstates,
/// together with the eigenenergies.
template <typename Scalar>
struct CollectiveTransformT {
  Eigen::Matrix<Scalar, kDim, kDim> vectors;
  Eigen::Matrix<Scalar, kDim, 1> energies;
};

template <typename Scalar>
CollectiveTransformT<Scalar> collective_transform(const DimerSystemT<Scalar>& sys) {
  const auto states = collective_eigenbasis(sys);
  CollectiveTransformT<Scalar> t;
  for (int k = 0; k < kDim; ++k) {
    t.vectors.col(k) = states[k].state.real();
    t.energies(k) = states[k].energy;
  }
  return t;
}

template <typename Scalar>
Scalar expectation(const Operator9T<Scalar>& op, const StateVectorT<Scalar>& psi) {
  return (psi.adjoint() * op * psi)(0, 0).real();
}

using CollectiveState = CollectiveStateT<double>;
using CollectiveTransform = CollectiveTransformT<double>;

}  // namespace pmspec
