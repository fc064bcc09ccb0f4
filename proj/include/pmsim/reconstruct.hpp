#pragma once
#include <vector>

#include "pmsim/hilbert.hpp"
#include "pmsim/measurement.hpp"
#include "pmsim/protection.hpp"

namespace pmsim {

// Ordered, disjoint, exhaustive grouping of grid cells into regions V_n.
struct RegionPartition {
  HilbertSpace grid;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> spans;  // [begin, end) per region

  RegionPartition() = default;
  RegionPartition(HilbertSpace g, std::vector<std::pair<Eigen::Index, Eigen::Index>> s);

  // equal-size regions; n_regions must divide the cell count
  static RegionPartition uniform(const HilbertSpace& grid, Eigen::Index n_regions);

  Eigen::Index n_regions() const { return static_cast<Eigen::Index>(spans.size()); }
  Eigen::Index cells(Eigen::Index n) const;
  double volume(Eigen::Index n) const;  // cells * dx
  double center(Eigen::Index n) const;  // mean cell coordinate
  bool operator==(const RegionPartition& o) const { return grid == o.grid && spans == o.spans; }
};

// A_n: diagonal 1/v_n on the cells of V_n, zero elsewhere. expectation(A_n)
// is the average probability density over the region.
Operator projector_observable(const RegionPartition& part, Eigen::Index n);

// B_n = (hbar / 2 m i) (A_n D + D A_n) with the shared antisymmetric
// derivative D; hermitian with purely imaginary entries. expectation(B_n) is
// the average probability flux over the region, and sum_n v_n B_n recovers
// the whole-grid flux operator exactly.
Operator flux_observable(const RegionPartition& part, Eigen::Index n);

struct DensityField {
  RegionPartition part;
  VectorXr values;                // rho_n, 1/length
  double max_norm_drift = 0.0;    // worst drift over the regional runs
};

struct FluxField {
  RegionPartition part;
  VectorXr values;                // j_n, 1/time
  double max_norm_drift = 0.0;
};

enum class MeasureMode { Exact, Protective };

// Exact mode evaluates expectations directly. Protective mode runs one ideal
// protective measurement per region (the scheme must protect psi; regions are
// independent and may run on several threads), clamps tiny negative readouts,
// and renormalizes so sum rho_n v_n = 1. Throws NumericsError if any regional
// residual exceeds cfg.residual_tol (adiabaticity failure).
DensityField measure_density(const StateVector& psi, const RegionPartition& part, MeasureMode mode,
                             const ProtectionScheme& scheme, const ProtectiveRunConfig& cfg,
                             int jobs = 1);

// As measure_density with B_n; flux values keep their sign and are not
// renormalized.
FluxField measure_flux(const StateVector& psi, const RegionPartition& part, MeasureMode mode,
                       const ProtectionScheme& scheme, const ProtectiveRunConfig& cfg,
                       int jobs = 1);

struct ReconstructedState {
  StateVector state;                   // normalized; global phase fixed
  std::vector<Eigen::Index> skipped;   // low-density regions (phase continued)
  std::vector<Eigen::Index> nodes;     // interior dips crossed with a +pi flip
  double fidelity_vs_reference = -1.0; // diagnostic slot, filled by callers
};

// Amplitudes sqrt(rho_n) at region centers, phases from trapezoidal
// integration of the velocity m j / (hbar rho) across unflagged regions
// (+pi when leaving a node region), then a complex natural cubic spline back
// to the cells. The first unflagged region's amplitude is made real
// nonnegative. Throws ConfigError when every region is below threshold.
ReconstructedState reconstruct_wavefunction(const DensityField& rho, const FluxField& j,
                                            const RegionPartition& part);

}  // namespace pmsim
