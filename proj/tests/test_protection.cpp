#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pmsim/protection.hpp"

using namespace pmsim;

TEST_CASE("scheme validation catches structural mistakes") {
  CHECK_NOTHROW(validate_scheme(NoProtection{}));

  ZenoProtection z;
  z.n_projections = 8;
  z.chi = ket_plus();
  CHECK_NOTHROW(validate_scheme(z));
  z.n_projections = 0;
  CHECK_THROWS_AS(validate_scheme(z), ConfigError);
  z.n_projections = 8;
  z.chi.amps *= 2.0;
  CHECK_THROWS_AS(validate_scheme(z), ConfigError);

  MagneticProtection m;
  m.omega = 1.0;
  CHECK_NOTHROW(validate_scheme(m));
  m.omega = 0.0;
  CHECK_THROWS_AS(validate_scheme(m), ConfigError);
  m.omega = 1.0;
  m.axis_x = 1.0;  // axis no longer unit length
  CHECK_THROWS_AS(validate_scheme(m), ConfigError);

  EnergyGapProtection e;
  e.h_system = pauli_z();
  e.level = 0;
  CHECK_NOTHROW(validate_scheme(e));
  e.level = 5;
  CHECK_THROWS_AS(validate_scheme(e), ConfigError);
  e.level = 0;
  e.h_system = identity_op(CompositeSpace{HilbertSpace::spin()});  // fully degenerate
  CHECK_THROWS_AS(validate_scheme(e), ConfigError);
}

TEST_CASE("protection hamiltonians") {
  MagneticProtection m;
  m.axis_x = 1.0;
  m.axis_z = 0.0;
  m.omega = 3.0;
  const Operator h = protection_hamiltonian(m);
  CHECK((h.mat + 1.5 * pauli_x().mat).cwiseAbs().maxCoeff() < 1e-15);
  // ground state of -(omega/2) sigma_x is |+>
  const EigenSystem es = eigh(h);
  CHECK(fidelity(eigenstate(h, es, 0), ket_plus()) == doctest::Approx(1.0).epsilon(1e-12));

  EnergyGapProtection e;
  e.h_system = pauli_z();
  CHECK((protection_hamiltonian(e).mat - pauli_z().mat).cwiseAbs().maxCoeff() == 0.0);

  CHECK(!has_hamiltonian(NoProtection{}));
  CHECK(has_hamiltonian(m));
  CHECK_THROWS_AS(protection_hamiltonian(NoProtection{}), ConfigError);
  CHECK(scheme_name(m) == "magnetic");
  CHECK(scheme_name(NoProtection{}) == "none");
  CHECK(scheme_name(e) == "energy_gap");
  ZenoProtection z;
  z.chi = ket0();
  CHECK(scheme_name(z) == "zeno");
}

TEST_CASE("deterministic projection keeps the chi branch") {
  const auto ptr = HilbertSpace::pointer(16, -1.0, 1.0);
  const StateVector chi_ptr = gaussian_state(ptr, 0.0, 0.2);
  // psi = (sqrt(0.36)|0> + sqrt(0.64)|1>) (x) chi_ptr, project onto |0>
  StateVector sys = ket0();
  sys.amps(0) = 0.6;
  sys.amps(1) = 0.8;
  const StateVector psi = tensor_state(sys, chi_ptr);
  const ZenoStepResult r = zeno_project_survive(psi, ket0());
  CHECK(r.survived);
  CHECK(r.p_survive == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(norm(r.state) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fidelity(r.state, tensor_state(ket0(), chi_ptr)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sampled projection reproduces born frequencies") {
  const auto ptr = HilbertSpace::pointer(8, -1.0, 1.0);
  const StateVector chi_ptr = gaussian_state(ptr, 0.0, 0.25);
  StateVector sys = ket0();
  sys.amps(0) = std::sqrt(0.3);
  sys.amps(1) = std::sqrt(0.7);
  const StateVector psi = tensor_state(sys, chi_ptr);
  Rng rng(99);
  const int n = 20000;
  int survived = 0;
  for (int i = 0; i < n; ++i) {
    const ZenoStepResult r = zeno_step(psi, ket0(), rng);
    CHECK(r.p_survive == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(norm(r.state) == doctest::Approx(1.0).epsilon(1e-10));
    if (r.survived) ++survived;
  }
  const double freq = static_cast<double>(survived) / n;
  const double sigma = std::sqrt(0.3 * 0.7 / n);
  CHECK(std::abs(freq - 0.3) < 4.0 * sigma);
}

TEST_CASE("projecting an orthogonal state onto the survive branch fails loudly") {
  const auto ptr = HilbertSpace::pointer(8, -1.0, 1.0);
  const StateVector psi = tensor_state(ket1(), gaussian_state(ptr, 0.0, 0.25));
  CHECK_THROWS_AS(zeno_project_survive(psi, ket0()), NumericsError);
}
