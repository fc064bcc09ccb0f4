#pragma once
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pmsim/dynamics.hpp"
#include "pmsim/hilbert.hpp"
#include "pmsim/protection.hpp"
#include "pmsim/rng.hpp"

namespace pmsim {

// Pointer preparation: Gaussian centered at `center` with spread sigma on a
// grid of `cells` cells spanning [lo, hi]. sigma <= 0 selects the default
// 0.05 * (hi - lo).
struct PointerSpec {
  Eigen::Index cells = 256;
  double lo = -2.0;
  double hi = 3.0;
  double sigma = -1.0;
  double center = 0.0;
  bool free_kinetic = false;

  double sigma_value() const { return sigma > 0.0 ? sigma : 0.05 * (hi - lo); }
  HilbertSpace space() const { return HilbertSpace::pointer(cells, lo, hi); }
  StateVector initial_state() const;
};

// Shared fixed-width binning for outcome histograms; readouts outside the
// span are clamped into the edge bins.
struct BinningSpec {
  double lo = -1.0;
  double hi = 2.0;
  double width = 0.02;

  Eigen::Index n_bins() const;
  Eigen::Index index(double x) const;
  bool operator==(const BinningSpec& o) const { return lo == o.lo && hi == o.hi && width == o.width; }
};

struct OutcomeDistribution {
  BinningSpec binning;
  std::vector<std::int64_t> counts;
  std::int64_t n_samples = 0;

  explicit OutcomeDistribution(const BinningSpec& b = BinningSpec{})
      : binning(b), counts(static_cast<std::size_t>(b.n_bins()), 0) {}
  void add(double x);
  void merge(const OutcomeDistribution& o);
  VectorXr probabilities() const;  // sums to 1 within 1e-12
};

// sum over bins of min(p1, p2); requires identical binning
double distribution_overlap(const OutcomeDistribution& d1, const OutcomeDistribution& d2);

// Spearman rank correlation (ties get average ranks).
double spearman(const VectorXr& x, const VectorXr& y);

struct ProtectiveRunConfig {
  CouplingProfile coupling{CouplingShape::Sin2, 1.0};
  double dt = 1.0 / 2000.0;
  PointerSpec pointer;
  bool energy_rezero = true;
  // weak-protection threshold on |shift - <A>| relative to A's spectral range
  double residual_tol = 1e-2;
};

struct MeasurementRecord {
  std::string observable = "A";
  std::string scheme = "none";
  double outcome = 0.0;
  double expected = 0.0;
  double residual = 0.0;
  bool survived = true;
  double survival = 1.0;  // path product over followed Zeno branches
  double norm_drift = 0.0;
  bool protection_weak = false;
  double tau = 0.0;
  double dt = 0.0;
  Eigen::Index n_projections = 0;
};

// One ideal protective run: outcome = pointer shift, post-selected on
// survival for Zeno protection. Preconditions: psi must be (close to) the
// protected state of the scheme. A residual above cfg.residual_tol sets the
// protection_weak diagnostic rather than failing silently.
MeasurementRecord run_protective_ideal(const StateVector& psi, const Operator& a,
                                       const ProtectionScheme& scheme,
                                       const ProtectiveRunConfig& cfg);

struct RealisticEnsemble {
  OutcomeDistribution distribution;
  double survival_frequency = 1.0;   // fraction of runs with every branch survived
  double mean_path_survival = 1.0;   // ensemble mean of per-run branch-probability products
  double max_norm_drift = 0.0;
};

// n_runs realistic runs: sampled Zeno branches (or one finite-gap adiabatic
// evolution), then a single position readout from the final pointer marginal
// per run. Seeds are derived per run from `seed`, so the histogram is
// independent of execution order and job count.
RealisticEnsemble run_realistic(const StateVector& psi, const Operator& a,
                                const ProtectionScheme& scheme, const ProtectiveRunConfig& cfg,
                                const BinningSpec& binning, std::uint64_t seed, std::int64_t n_runs,
                                int jobs = 1);

struct ProjectiveResult {
  VectorXr values;        // distinct eigenvalues (degenerates grouped within 1e-9)
  VectorXr born;          // exact Born probabilities per value
  std::vector<std::int64_t> counts;
  std::int64_t n_samples = 0;

  OutcomeDistribution binned(const BinningSpec& b) const;
  double mean() const;
};

ProjectiveResult run_projective(const StateVector& psi, const Operator& a, Rng& rng,
                                std::int64_t n_runs);

// Closed-form Zeno runner for H_prot = 0: each inter-projection segment is
// propagated exactly as exp(-i G_j A (x) P / hbar) in the joint (A, P)
// eigenbasis, with G_j the coupling integral over the segment.
class ZenoRunner {
 public:
  ZenoRunner(const StateVector& chi, const Operator& a, const CouplingProfile& coupling,
             const PointerSpec& pointer, Eigen::Index n_projections);

  struct RunResult {
    double readout = 0.0;        // one sampled position (sampled mode)
    double shift = 0.0;          // marginal-mean shift (ideal mode)
    bool survived_all = true;
    double path_survival = 1.0;  // product of branch probabilities followed
  };

  // post-selected on survival at every projection; deterministic
  RunResult run_ideal(const StateVector& psi_system) const;
  // Born-sampled branches, one readout sampled from the final marginal
  RunResult run_sampled(const StateVector& psi_system, Rng& rng) const;

  Eigen::Index n_projections() const { return n_; }

  struct Core;  // implementation detail of the closed-form engine

 private:
  std::shared_ptr<const Core> core_;
  Eigen::Index n_ = 0;
};

}  // namespace pmsim
