#pragma once
#include <variant>

#include "pmsim/hilbert.hpp"
#include "pmsim/rng.hpp"
#include "pmsim/types.hpp"

namespace pmsim {

struct NoProtection {};

// Frequent projections onto the protected state chi; no protection
// Hamiltonian. `sampled` selects realistic branch sampling; ideal runs
// post-select on survival.
struct ZenoProtection {
  Eigen::Index n_projections = 1;
  StateVector chi;
  bool sampled = false;
};

// The system's own (or an engineered) Hamiltonian protects a nondegenerate
// eigenlevel through the energy gap.
struct EnergyGapProtection {
  Operator h_system;
  Eigen::Index level = 0;
};

// Field along the spin direction; the protected state is the nondegenerate
// ground state of -(omega/2) axis.sigma.
struct MagneticProtection {
  double axis_x = 0.0;
  double axis_y = 0.0;
  double axis_z = 1.0;
  double omega = 0.0;
};

using ProtectionScheme =
    std::variant<NoProtection, ZenoProtection, EnergyGapProtection, MagneticProtection>;

// Checks the scheme's structural invariants (chi normalized, N >= 1, unit
// axis, omega > 0, nondegenerate protected level). Throws ConfigError.
void validate_scheme(const ProtectionScheme& scheme);

bool has_hamiltonian(const ProtectionScheme& scheme);

// EnergyGap -> H_sys unchanged; Magnetic -> -(omega/2)(axis . sigma).
// Throws for None/Zeno, which supply no Hamiltonian.
Operator protection_hamiltonian(const ProtectionScheme& scheme);

std::string scheme_name(const ProtectionScheme& scheme);

struct ZenoStepResult {
  StateVector state;
  bool survived = true;
  double p_survive = 1.0;
};

// Projects a composite state onto chi<chi| (x) I versus its complement with
// Born probabilities and renormalizes the sampled branch.
ZenoStepResult zeno_step(const StateVector& psi, const StateVector& chi, Rng& rng);

// Deterministic survival branch (ideal post-selected mode).
ZenoStepResult zeno_project_survive(const StateVector& psi, const StateVector& chi);

}  // namespace pmsim
