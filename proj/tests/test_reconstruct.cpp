#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "pmsim/reconstruct.hpp"

using namespace pmsim;

namespace {

const HilbertSpace kGrid = HilbertSpace::grid(128, -8.125, 7.875);

ProtectiveRunConfig no_cfg() { return ProtectiveRunConfig{}; }

// region-average density straight from the cells
VectorXr cell_density(const StateVector& psi, const RegionPartition& part) {
  VectorXr rho(part.n_regions());
  for (Eigen::Index n = 0; n < part.n_regions(); ++n) {
    const auto& [begin, end] = part.spans[static_cast<std::size_t>(n)];
    double acc = 0.0;
    for (Eigen::Index c = begin; c < end; ++c) acc += std::norm(psi.amps(c)) * part.grid.dx();
    rho(n) = acc / part.volume(n);
  }
  return rho;
}

}  // namespace

TEST_CASE("region partitions tile the grid") {
  const RegionPartition part = RegionPartition::uniform(kGrid, 16);
  CHECK(part.n_regions() == 16);
  CHECK(part.cells(0) == 8);
  CHECK(part.volume(3) == doctest::Approx(1.0));
  CHECK(part.center(0) == doctest::Approx(-8.125 + 0.5));

  CHECK_THROWS_AS(RegionPartition::uniform(kGrid, 7), ConfigError);
  CHECK_THROWS_AS(RegionPartition::uniform(kGrid, 0), ConfigError);
  using Spans = std::vector<std::pair<Eigen::Index, Eigen::Index>>;
  CHECK_THROWS_AS(RegionPartition(kGrid, Spans{{0, 64}}), ConfigError);            // not exhaustive
  CHECK_THROWS_AS(RegionPartition(kGrid, Spans{{0, 64}, {65, 128}}), ConfigError); // gap
  CHECK_THROWS_AS(RegionPartition(kGrid, Spans{{0, 70}, {64, 128}}), ConfigError); // overlap
  CHECK_NOTHROW(RegionPartition(kGrid, Spans{{0, 100}, {100, 128}}));
  CHECK_THROWS_AS(RegionPartition(HilbertSpace::spin(), Spans{{0, 2}}), ConfigError);
}

TEST_CASE("density observables average |psi|^2 and resolve the identity") {
  const RegionPartition part = RegionPartition::uniform(kGrid, 32);
  const StateVector psi = ho_state(kGrid, 1);
  double total = 0.0;
  const VectorXr oracle = cell_density(psi, part);
  for (Eigen::Index n = 0; n < part.n_regions(); ++n) {
    const double rho_n = expectation(projector_observable(part, n), psi);
    CHECK(rho_n == doctest::Approx(oracle(n)).epsilon(1e-12));
    total += rho_n * part.volume(n);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(projector_observable(part, 32), ConfigError);
}

TEST_CASE("flux observables are imaginary-valued operators that sum to the full flux") {
  const RegionPartition part = RegionPartition::uniform(kGrid, 16);
  MatrixXc total = MatrixXc::Zero(kGrid.dim, kGrid.dim);
  for (Eigen::Index n = 0; n < part.n_regions(); ++n) {
    const Operator b = flux_observable(part, n);
    CHECK(b.hermitian);
    CHECK(b.mat.real().cwiseAbs().maxCoeff() == 0.0);
    total += part.volume(n) * b.mat;
  }
  const MatrixXc full = Complex(0.0, -1.0) * (kHbar / kMass) * first_derivative(kGrid).mat;
  CHECK((total - full).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact fields: real states carry exactly zero flux") {
  const RegionPartition part = RegionPartition::uniform(kGrid, 64);
  for (int level = 0; level <= 2; ++level) {
    const StateVector psi = ho_state(kGrid, level);
    const FluxField j = measure_flux(psi, part, MeasureMode::Exact, NoProtection{}, no_cfg());
    CHECK(j.values.cwiseAbs().maxCoeff() == 0.0);
  }
  const StateVector moving = boosted_gaussian_state(kGrid, 0.0, 1.0, 1.0);
  const FluxField j = measure_flux(moving, part, MeasureMode::Exact, NoProtection{}, no_cfg());
  // j = hbar k |psi|^2 / m away from the edges
  const DensityField rho =
      measure_density(moving, part, MeasureMode::Exact, NoProtection{}, no_cfg());
  for (Eigen::Index n = 20; n < 44; ++n)
    CHECK(j.values(n) == doctest::Approx(rho.values(n)).epsilon(1e-5));
}

TEST_CASE("reconstruction reproduces the analytic benchmark states") {
  const RegionPartition part = RegionPartition::uniform(kGrid, 64);
  const auto run = [&](const StateVector& psi) {
    const DensityField rho =
        measure_density(psi, part, MeasureMode::Exact, NoProtection{}, no_cfg());
    const FluxField j = measure_flux(psi, part, MeasureMode::Exact, NoProtection{}, no_cfg());
    ReconstructedState rec = reconstruct_wavefunction(rho, j, part);
    rec.fidelity_vs_reference = fidelity(rec.state, psi);
    return rec;
  };

  const ReconstructedState r0 = run(ho_state(kGrid, 0));
  CHECK(r0.fidelity_vs_reference == doctest::Approx(0.999996179766).epsilon(1e-5));
  CHECK(r0.nodes.empty());
  CHECK(r0.skipped.size() == 51);

  const ReconstructedState r1 = run(ho_state(kGrid, 1));
  CHECK(r1.fidelity_vs_reference == doctest::Approx(0.999507568906).epsilon(1e-5));
  REQUIRE(r1.nodes.size() == 1);
  CHECK(r1.nodes[0] == 32);
  CHECK(r1.skipped.size() == 46);

  const ReconstructedState rb = run(boosted_gaussian_state(kGrid, 0.0, 1.0 / std::sqrt(2.0), 1.0));
  CHECK(rb.fidelity_vs_reference == doctest::Approx(0.998060301137).epsilon(1e-5));
  CHECK(rb.nodes.empty());
  CHECK(rb.skipped.size() == 51);
}

TEST_CASE("reconstruction sharpens monotonically with region refinement") {
  const StateVector psi = ho_state(kGrid, 0);
  const std::vector<std::pair<Eigen::Index, double>> frozen = {
      {8, 0.960012194035}, {16, 0.998265248847}, {32, 0.999905203244}, {64, 0.999996179766}};
  double prev = 0.0;
  for (const auto& [nreg, expect] : frozen) {
    const RegionPartition part = RegionPartition::uniform(kGrid, nreg);
    const DensityField rho =
        measure_density(psi, part, MeasureMode::Exact, NoProtection{}, no_cfg());
    const FluxField j = measure_flux(psi, part, MeasureMode::Exact, NoProtection{}, no_cfg());
    const ReconstructedState rec = reconstruct_wavefunction(rho, j, part);
    const double fid = fidelity(rec.state, psi);
    CHECK(fid == doctest::Approx(expect).epsilon(1e-5));
    CHECK(fid > prev);
    prev = fid;
  }
}

TEST_CASE("conjugating the flux conjugates the reconstruction") {
  const RegionPartition part = RegionPartition::uniform(kGrid, 64);
  const StateVector fwd = boosted_gaussian_state(kGrid, 0.0, 1.0, 0.7);
  const StateVector bwd = boosted_gaussian_state(kGrid, 0.0, 1.0, -0.7);
  const auto cfg = no_cfg();
  const DensityField rho_f = measure_density(fwd, part, MeasureMode::Exact, NoProtection{}, cfg);
  const FluxField j_f = measure_flux(fwd, part, MeasureMode::Exact, NoProtection{}, cfg);
  const DensityField rho_b = measure_density(bwd, part, MeasureMode::Exact, NoProtection{}, cfg);
  const FluxField j_b = measure_flux(bwd, part, MeasureMode::Exact, NoProtection{}, cfg);
  const ReconstructedState rf = reconstruct_wavefunction(rho_f, j_f, part);
  const ReconstructedState rb = reconstruct_wavefunction(rho_b, j_b, part);
  CHECK((rb.state.amps - rf.state.amps.conjugate()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero flux reconstructs a real state up to global phase") {
  const RegionPartition part = RegionPartition::uniform(kGrid, 64);
  const StateVector psi = ho_state(kGrid, 0);
  const DensityField rho =
      measure_density(psi, part, MeasureMode::Exact, NoProtection{}, no_cfg());
  const FluxField j = measure_flux(psi, part, MeasureMode::Exact, NoProtection{}, no_cfg());
  const ReconstructedState rec = reconstruct_wavefunction(rho, j, part);
  CHECK(rec.state.amps.imag().cwiseAbs().maxCoeff() == 0.0);
  CHECK(norm(rec.state) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reconstruction refuses a field with no trusted region") {
  const RegionPartition part = RegionPartition::uniform(kGrid, 16);
  DensityField rho{part, VectorXr::Constant(16, 1e-9), 0.0};
  FluxField j{part, VectorXr::Zero(16), 0.0};
  CHECK_THROWS_AS(reconstruct_wavefunction(rho, j, part), ConfigError);
  DensityField mismatched{RegionPartition::uniform(kGrid, 8), VectorXr::Constant(8, 0.1), 0.0};
  CHECK_THROWS_AS(reconstruct_wavefunction(mismatched, j, part), ConfigError);
}

TEST_CASE("protective fields converge to the exact ones as the coupling slows") {
  const HilbertSpace grid = HilbertSpace::grid(64, -8.125, 7.875);
  const RegionPartition part = RegionPartition::uniform(grid, 16);
  const Operator h = ho_hamiltonian(grid);
  const EigenSystem es = eigh(h);
  const StateVector psi = eigenstate(h, es, 0);
  EnergyGapProtection scheme{h, 0};

  ProtectiveRunConfig cfg;
  cfg.pointer.cells = 32;
  cfg.pointer.lo = -1.5;
  cfg.pointer.hi = 2.0;
  cfg.pointer.sigma = 0.2;
  cfg.dt = 0.05;

  const DensityField exact =
      measure_density(psi, part, MeasureMode::Exact, NoProtection{}, cfg);

  const auto err_at = [&](double tau) {
    cfg.coupling.tau = tau;
    const DensityField rho = measure_density(psi, part, MeasureMode::Protective, scheme, cfg);
    CHECK(rho.max_norm_drift < 1e-10);
    return (rho.values - exact.values).cwiseAbs().maxCoeff();
  };
  const double e50 = err_at(50.0);
  const double e100 = err_at(100.0);
  CHECK(e50 < 1e-3);
  CHECK(e100 < 0.6 * e50);
}
