#pragma once
#include <memory>
#include <vector>

#include "pmsim/banded.hpp"
#include "pmsim/hilbert.hpp"
#include "pmsim/types.hpp"

namespace pmsim {

enum class CouplingShape { Sin2, SmoothRect };

// g(t) on [0, tau] with unit time integral and vanishing endpoints.
struct CouplingProfile {
  CouplingShape shape = CouplingShape::Sin2;
  double tau = 1.0;

  double g(double t) const;           // throws outside [0, tau]
  double cumulative(double t) const;  // G(t) = integral of g from 0 to t
};

// H(t) = H_sys (x) I + I (x) H_ptr + g(t) A (x) P - energy_shift * I.
// energy_shift subtracts a c-number (global phase only); it re-zeroes the
// protected level so the integrator's phase error acts on energy differences
// instead of absolute energies.
struct EvolutionSpec {
  CompositeSpace composite;  // exactly [system, pointer]
  Operator h_system;         // protection Hamiltonian on the system factor
  Operator h_pointer;        // free pointer Hamiltonian (zero by default)
  Operator coupling_a;       // measured observable A on the system factor
  CouplingProfile coupling;
  double energy_shift = 0.0;
};

EvolutionSpec make_evolution_spec(const Operator& h_system, const Operator& coupling_a,
                                  const CouplingProfile& coupling, const HilbertSpace& pointer,
                                  bool free_pointer_kinetic = false, double energy_shift = 0.0);

// Eigenbasis of the discrete pointer momentum; cached and shared across runs
// on the same grid.
struct PointerBasis {
  HilbertSpace space;
  MatrixXc q;       // columns = momentum eigenvectors, plain-orthonormal
  VectorXr p;       // momentum eigenvalues
  MatrixXc x_in_p;  // Q' X Q, for pointer means in the momentum representation
};

std::shared_ptr<const PointerBasis> make_pointer_basis(const HilbertSpace& pointer);

struct EvolveOptions {
  double dt = 0.0;
  Eigen::Index stride = 0;   // record every stride-th step (0: endpoints only)
  bool record_mean_x = true;
  bool record_mean_a = false;
  bool reverse = false;      // integrate tau -> 0 over the same midpoint schedule
  bool force_dense = false;
  Eigen::Index max_dense_dim = 2048;
  std::shared_ptr<const PointerBasis> pointer_basis;  // optional cache
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> mean_x;  // pointer <X> at recorded times (if recorded)
  std::vector<double> mean_a;  // <A (x) I> at recorded times (if recorded)
  StateVector initial;
  StateVector final_state;
  double max_norm_drift = 0.0;  // max over steps of | ||psi|| - 1 |
  Eigen::Index steps = 0;
  bool fiber_path = false;
  double dt = 0.0;
};

// Dense H(t); available for small composites and used as the reference
// implementation in tests.
Operator build_hamiltonian(const EvolutionSpec& spec, double t);

// Crank-Nicolson (implicit midpoint) propagation of psi0 over [0, tau].
// When H_ptr is diagonal in the momentum eigenbasis (zero or built from P),
// the step block-diagonalizes into independent per-momentum fibers solved
// with banded Cholesky; otherwise a dense solve is used.
Trajectory evolve(const StateVector& psi0, const EvolutionSpec& spec, const EvolveOptions& opts);

// <X>_final - <X>_initial from pointer marginals.
double pointer_shift(const Trajectory& traj, Eigen::Index pointer_factor = 1);

// max_k | d<X>/dt - g(t_k) <A (x) I> | with centered differences; needs
// stride-1 recording of both means.
double ehrenfest_residual(const Trajectory& traj, const EvolutionSpec& spec);

}  // namespace pmsim
