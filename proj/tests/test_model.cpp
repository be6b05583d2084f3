#include "doctest.h"

#include "pmspec/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace pmspec;

namespace {

std::vector<double> sorted_eigenvalues(const Operator9& h) {
  Eigen::SelfAdjointEigenSolver<Operator9> es(h);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + kDim);
  std::sort(ev.begin(), ev.end());
  return ev;
}

StateVector basis(int i) {
  StateVector v = StateVector::Zero();
  v(i) = 1.0;
  return v;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("dipole coupling geometry") {
    const double magic = std::acos(1.0 / std::sqrt(3.0));
    for (double r : {0.5, 1.0, 3.0}) {
      CHECK(std::abs(dipole_coupling(Geometry{r, magic}, 0.75, 1.054)) < 1e-14);
    }
    CHECK(dipole_coupling(Geometry{1.0, 0.0}, 1.0, 1.0) == doctest::Approx(-2.0).epsilon(1e-15));

    const Geometry g{1.3, 0.4};
    const double ratio = dipole_coupling(g, 1.054, 1.054) / dipole_coupling(g, 0.75, 0.75);
    CHECK(ratio == doctest::Approx(1.974).epsilon(5e-4));
    CHECK(ratio == doctest::Approx(std::pow(1.054 / 0.75, 2)).epsilon(1e-12));

    CHECK_THROWS_AS(dipole_coupling(Geometry{0.0, 0.0}, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(dipole_coupling(Geometry{1.0, 4.0}, 1.0, 1.0), std::invalid_argument);
  }

  TEST_CASE("geometry-derived system keeps the squared dipole ratio") {
    const auto sys = DimerSystem::from_geometry(ParticleSpec{}, Geometry{2.0, 0.3});
    CHECK(sys.v_ff / sys.v_ee == doctest::Approx(std::pow(1.054 / 0.75, 2)).epsilon(1e-12));
  }

  TEST_CASE("particle invariants") {
    ParticleSpec p;
    p.eps_f = 1.4;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ParticleSpec{};
    p.mu_f = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }

  TEST_CASE("uncoupled Hamiltonian is diagonal in product energies") {
    DimerSystem sys;
    sys.v_ee = sys.v_ff = 0.0;
    const Operator9 h = build_static_hamiltonian(sys);
    for (int i = 0; i < kDim; ++i) {
      for (int j = 0; j < kDim; ++j) {
        const double expect =
            i == j ? sys.particle.energy(kProductLevels[i][0]) + sys.particle.energy(kProductLevels[i][1]) : 0.0;
        CHECK(std::abs(h(i, j) - expect) < 1e-15);
      }
    }
  }

  TEST_CASE("block eigenvalues and Hermiticity") {
    DimerSystem sys;
    const Operator9 h = build_static_hamiltonian(sys);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() <= 1e-14);
    const Operator9 d = build_dipole_operator(sys);
    CHECK((d - d.adjoint()).cwiseAbs().maxCoeff() <= 1e-14);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ge(
        (Eigen::Matrix2d() << h(kGE, kGE).real(), h(kGE, kEG).real(), h(kEG, kGE).real(), h(kEG, kEG).real())
            .finished());
    const auto& p = sys.particle;
    CHECK(ge.eigenvalues()(0) == doctest::Approx(p.eps_g + p.eps_e - sys.v_ee).epsilon(1e-14));
    CHECK(ge.eigenvalues()(1) == doctest::Approx(p.eps_g + p.eps_e + sys.v_ee).epsilon(1e-14));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> gf(
        (Eigen::Matrix2d() << h(kGF, kGF).real(), h(kGF, kFG).real(), h(kFG, kGF).real(), h(kFG, kFG).real())
            .finished());
    CHECK(gf.eigenvalues()(0) == doctest::Approx(p.eps_g + p.eps_f - sys.v_ff).epsilon(1e-14));
    CHECK(gf.eigenvalues()(1) == doctest::Approx(p.eps_g + p.eps_f + sys.v_ff).epsilon(1e-14));
  }

  TEST_CASE("spectrum invariant under sign flip of the couplings") {
    DimerSystem a, b;
    b.v_ee = -a.v_ee;
    b.v_ff = -a.v_ff;
    const auto ea = sorted_eigenvalues(build_static_hamiltonian(a));
    const auto eb = sorted_eigenvalues(build_static_hamiltonian(b));
    for (int i = 0; i < kDim; ++i) CHECK(ea[i] == doctest::Approx(eb[i]).epsilon(1e-13));
  }

  TEST_CASE("collective basis diagonalizes H and matches a brute-force eigensolve") {
    DimerSystem sys;
    sys.v_ee = 0.013;
    sys.v_ff = -0.021;
    const Operator9 h = build_static_hamiltonian(sys);
    const auto states = collective_eigenbasis(sys);
    REQUIRE(states.size() == kDim);
    std::vector<double> energies;
    for (const auto& s : states) {
      CHECK(std::abs(s.state.norm() - 1.0) < 1e-15);
      CHECK(((h * s.state) - s.energy * s.state).norm() < 1e-14);
      energies.push_back(s.energy);
    }
    std::sort(energies.begin(), energies.end());
    const auto brute = sorted_eigenvalues(h);
    for (int i = 0; i < kDim; ++i) CHECK(energies[i] == doctest::Approx(brute[i]).epsilon(1e-13));

    const auto& p = sys.particle;
    CHECK(states[0].energy == doctest::Approx(2 * p.eps_g));
    CHECK(states[5].energy == doctest::Approx(2 * p.eps_e));
    const double split = expectation(h, states[2].state) - expectation(h, states[1].state);
    CHECK(split == doctest::Approx(-2.0 * sys.v_ee).epsilon(1e-12));

    const auto t = collective_transform(sys);
    CHECK((t.vectors.transpose() * t.vectors - Eigen::Matrix<double, kDim, kDim>::Identity()).norm() < 1e-14);
  }

  TEST_CASE("dipole matrix elements") {
    const DimerSystem sys;
    const Operator9 d = build_dipole_operator(sys);
    CHECK(d(kGE, kGG).real() == doctest::Approx(0.75));
    CHECK(d(kFF, kGF).real() == doctest::Approx(1.054));
    CHECK(std::abs(d(kEE, kGG)) == 0.0);
    CHECK(std::abs(d(kEF, kGG)) == 0.0);
    CHECK(d(kEF, kGF).real() == doctest::Approx(0.75));
  }

  TEST_CASE("fluorescence operator") {
    const Operator9 p = fluorescence_operator();
    CHECK(expectation(p, basis(kGG)) == 0.0);
    CHECK(expectation(p, basis(kEE)) == 2.0);
    CHECK(expectation(p, basis(kEF)) == 2.0);
    const StateVector plus = (basis(kGE) + basis(kEG)) / std::sqrt(2.0);
    CHECK(expectation(p, plus) == doctest::Approx(1.0).epsilon(1e-15));

    const auto ev = sorted_eigenvalues(p);
    CHECK(std::count(ev.begin(), ev.end(), 0.0) == 1);
    CHECK(std::count(ev.begin(), ev.end(), 1.0) == 4);
    CHECK(std::count(ev.begin(), ev.end(), 2.0) == 4);
  }

  TEST_CASE("model is usable at other scalar precisions") {
    DimerSystemT<long double> sys;
    const auto h = build_static_hamiltonian(sys);
    CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() == 0.0L);
    const auto states = collective_eigenbasis(sys);
    CHECK(std::abs(static_cast<double>(states[1].energy - (1.5L + 0.01L))) < 1e-15);
    const auto hf = build_static_hamiltonian(DimerSystemT<float>{});
    CHECK(hf(kGE, kEG).real() == doctest::Approx(0.01f));
  }
}
