#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pmsim/hilbert.hpp"

using namespace pmsim;

TEST_CASE("grid geometry: cells, centers, measure") {
  const auto g = HilbertSpace::grid(8, -1.0, 1.0);
  CHECK(g.dim == 8);
  CHECK(g.dx() == doctest::Approx(0.25));
  CHECK(g.x(0) == doctest::Approx(-0.875));
  CHECK(g.x(7) == doctest::Approx(0.875));
  CHECK(g.weight() == doctest::Approx(0.25));
  const auto s = HilbertSpace::spin();
  CHECK(s.dim == 2);
  CHECK(s.weight() == 1.0);
}

TEST_CASE("composite layout is row-major over factors") {
  const CompositeSpace cs(std::vector<HilbertSpace>{HilbertSpace::spin(),
                                                    HilbertSpace::pointer(4, 0.0, 1.0)});
  CHECK(cs.dim() == 8);
  CHECK(cs.stride(0) == 4);  // first factor varies slowest
  CHECK(cs.stride(1) == 1);
  const StateVector a = basis_state(CompositeSpace{HilbertSpace::spin()}, 1);
  StateVector b(HilbertSpace::pointer(4, 0.0, 1.0), VectorXc::Zero(4));
  b.amps(2) = 1.0 / std::sqrt(b.space.weight());
  const StateVector ab = tensor_state(a, b);
  // index = i * stride0 + j
  CHECK(std::abs(ab.amps(1 * 4 + 2)) > 0.0);
  CHECK(ab.amps.cwiseAbs().sum() == doctest::Approx(std::abs(ab.amps(6))));
}

TEST_CASE("inner products carry the grid measure") {
  const auto g = HilbertSpace::grid(64, -8.0, 8.0);
  const StateVector psi = gaussian_state(g, 0.0, 1.0);
  CHECK(norm(psi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity(psi, psi) == doctest::Approx(1.0).epsilon(1e-12));
  // moments of the normalized gaussian: <x> = x0, var = sigma^2
  const Operator x = position_op(g);
  CHECK(expectation(x, psi) == doctest::Approx(0.0).epsilon(1e-10));
  MatrixXc x2 = x.mat * x.mat;
  const Operator xx(CompositeSpace{g}, std::move(x2), true);
  CHECK(expectation(xx, psi) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("pauli algebra") {
  const MatrixXc x = pauli_x().mat, y = pauli_y().mat, z = pauli_z().mat;
  CHECK((x * x - MatrixXc::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((x * y - Complex(0, 1) * z).cwiseAbs().maxCoeff() == 0.0);
  CHECK((pauli_axis(0, 0, 1).mat - z).cwiseAbs().maxCoeff() == 0.0);
  const double inv = 1.0 / std::sqrt(2.0);
  CHECK((pauli_axis(inv, 0, inv).mat - inv * (x + z)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("spin states and projectors") {
  CHECK(expectation(projector(ket0()), ket0()) == doctest::Approx(1.0));
  CHECK(expectation(projector(ket0()), ket_plus()) == doctest::Approx(0.5));
  CHECK(expectation(projector(ket1()), ket_minus()) == doctest::Approx(0.5));
  const Operator p = projector(ket_plus());
  CHECK((p.mat * p.mat - p.mat).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(fidelity(bloch_state(0.0, 0.0), ket0()) == doctest::Approx(1.0));
  CHECK(fidelity(bloch_state(M_PI / 2.0, 0.0), ket_plus()) == doctest::Approx(1.0));
  CHECK(fidelity(bloch_state(M_PI, 0.3), ket1()) == doctest::Approx(1.0));
}

TEST_CASE("seeded random states and observables are reproducible") {
  Rng r1(42), r2(42), r3(43);
  const StateVector a = random_qubit(r1);
  const StateVector b = random_qubit(r2);
  const StateVector c = random_qubit(r3);
  CHECK(norm(a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((a.amps - b.amps).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fidelity(a, c) < 1.0 - 1e-6);
  Rng r4(7), r5(7);
  const Operator h1 = random_hermitian(CompositeSpace{HilbertSpace::spin()}, r4);
  const Operator h2 = random_hermitian(CompositeSpace{HilbertSpace::spin()}, r5);
  CHECK(h1.hermitian);
  CHECK((h1.mat - h1.mat.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((h1.mat - h2.mat).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("eigh reconstructs the operator and orders values") {
  Rng rng(11);
  const Operator h = random_hermitian(CompositeSpace{HilbertSpace::spin(4)}, rng);
  const EigenSystem es = eigh(h);
  const MatrixXc rebuilt =
      es.vectors * es.values.asDiagonal().toDenseMatrix().cast<Complex>() * es.vectors.adjoint();
  CHECK((rebuilt - h.mat).cwiseAbs().maxCoeff() < 1e-12);
  for (Eigen::Index i = 1; i < es.values.size(); ++i) CHECK(es.values(i) >= es.values(i - 1));
}

TEST_CASE("derivative stencil is exactly antisymmetric, momentum hermitian") {
  const auto g = HilbertSpace::grid(32, -4.0, 4.0);
  const Operator d = first_derivative(g);
  CHECK((d.mat + d.mat.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const Operator p = momentum_op(g);
  CHECK((p.mat - p.mat.adjoint()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("momentum expectation of a boosted gaussian") {
  const auto g = HilbertSpace::grid(128, -8.125, 7.875);
  const StateVector psi = boosted_gaussian_state(g, 0.0, 1.0, 1.0);
  CHECK(expectation(momentum_op(g), psi) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("kinetic operator is positive semidefinite") {
  const auto g = HilbertSpace::grid(32, -4.0, 4.0);
  const EigenSystem es = eigh(kinetic_op(g));
  CHECK(es.values(0) >= -1e-12);
}

TEST_CASE("harmonic spectrum on the acceptance grid") {
  const auto g = HilbertSpace::grid(128, -8.125, 7.875);
  const EigenSystem es = eigh(ho_hamiltonian(g));
  CHECK(es.values(0) == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(es.values(1) - es.values(0) == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(es.values(2) - es.values(1) == doctest::Approx(1.0).epsilon(1e-2));
  for (int l = 0; l <= 2; ++l) {
    const StateVector discrete = eigenstate(ho_hamiltonian(g), es, l);
    CHECK(norm(discrete) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(discrete, ho_state(g, l)) > 0.999);
  }
}

TEST_CASE("pointer marginal of a product state") {
  const auto ptr = HilbertSpace::pointer(32, -2.0, 3.0);
  const StateVector chi = gaussian_state(ptr, 0.4, 0.3);
  const StateVector joint = tensor_state(ket_plus(), chi);
  const VectorXr marg = pointer_marginal(joint, 1);
  CHECK(marg.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(marginal_mean_x(joint, 1) == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("operator constructor rejects a non-hermitian claim") {
  MatrixXc m(2, 2);
  m << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(Operator(CompositeSpace{HilbertSpace::spin()}, m, true), NumericsError);
  const Operator raw(CompositeSpace{HilbertSpace::spin()}, m, false);
  CHECK_THROWS_AS(expectation(raw, ket0()), ConfigError);
}
