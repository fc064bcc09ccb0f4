#include "pmsim/protection.hpp"

#include <cmath>

namespace pmsim {

namespace {
void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

// overlaps o_n = <chi|Psi(:, n)> over the non-system rest index
VectorXc system_overlaps(const StateVector& psi, const StateVector& chi) {
  require(psi.space.n_factors() == 2, "zeno projection needs a [system, rest] composite");
  require(std::vector<HilbertSpace>{psi.space.factor(0)} == chi.space.factors,
          "protected state must live on the system factor");
  const Eigen::Index n_s = psi.space.factor(0).dim;
  const Eigen::Index n_r = psi.space.stride(0);
  const double w_s = chi.space.weight();
  VectorXc o = VectorXc::Zero(n_r);
  for (Eigen::Index s = 0; s < n_s; ++s)
    for (Eigen::Index r = 0; r < n_r; ++r)
      o(r) += w_s * std::conj(chi.amps(s)) * psi.amps(s * n_r + r);
  return o;
}

ZenoStepResult project(const StateVector& psi, const StateVector& chi, bool survive) {
  const VectorXc o = system_overlaps(psi, chi);
  const double w_r = psi.space.weight() / chi.space.weight();
  const double p = std::min(1.0, o.squaredNorm() * w_r);
  const Eigen::Index n_s = psi.space.factor(0).dim;
  const Eigen::Index n_r = psi.space.stride(0);
  VectorXc branch(psi.dim());
  for (Eigen::Index s = 0; s < n_s; ++s)
    for (Eigen::Index r = 0; r < n_r; ++r) branch(s * n_r + r) = chi.amps(s) * o(r);
  double p_branch = p;
  if (!survive) {
    branch = psi.amps - branch;
    p_branch = 1.0 - p;
  }
  if (p_branch < 1e-15) throw NumericsError("zeno branch has vanishing probability");
  return ZenoStepResult{StateVector(psi.space, branch / std::sqrt(p_branch)), survive, p};
}
}  // namespace

void validate_scheme(const ProtectionScheme& scheme) {
  if (const auto* z = std::get_if<ZenoProtection>(&scheme)) {
    require(z->n_projections >= 1, "zeno protection needs n_projections >= 1");
    require(std::abs(norm(z->chi) - 1.0) <= 1e-9, "zeno protected state must be normalized");
  } else if (const auto* e = std::get_if<EnergyGapProtection>(&scheme)) {
    require(e->h_system.hermitian, "energy-gap protection needs a hermitian Hamiltonian");
    const EigenSystem es = eigh(e->h_system);
    require(e->level >= 0 && e->level < es.values.size(), "protected level out of range");
    double gap = 0.0;
    if (e->level > 0) gap = es.values(e->level) - es.values(e->level - 1);
    if (e->level + 1 < es.values.size()) {
      const double up = es.values(e->level + 1) - es.values(e->level);
      gap = (e->level > 0) ? std::min(gap, up) : up;
    }
    require(gap > 1e-12, "protected level must be nondegenerate (gap > 0)");
  } else if (const auto* m = std::get_if<MagneticProtection>(&scheme)) {
    const double n2 = m->axis_x * m->axis_x + m->axis_y * m->axis_y + m->axis_z * m->axis_z;
    require(std::abs(std::sqrt(n2) - 1.0) <= 1e-12, "magnetic axis must be a unit vector");
    require(m->omega > 0.0, "magnetic protection needs omega > 0");
  }
}

bool has_hamiltonian(const ProtectionScheme& scheme) {
  return std::holds_alternative<EnergyGapProtection>(scheme) ||
         std::holds_alternative<MagneticProtection>(scheme);
}

Operator protection_hamiltonian(const ProtectionScheme& scheme) {
  if (const auto* e = std::get_if<EnergyGapProtection>(&scheme)) return e->h_system;
  if (const auto* m = std::get_if<MagneticProtection>(&scheme)) {
    Operator s = pauli_axis(m->axis_x, m->axis_y, m->axis_z);
    return Operator(s.space, -(m->omega / 2.0) * s.mat, true);
  }
  throw ConfigError("protection scheme supplies no Hamiltonian");
}

std::string scheme_name(const ProtectionScheme& scheme) {
  if (std::holds_alternative<NoProtection>(scheme)) return "none";
  if (std::holds_alternative<ZenoProtection>(scheme)) return "zeno";
  if (std::holds_alternative<EnergyGapProtection>(scheme)) return "energy_gap";
  return "magnetic";
}

ZenoStepResult zeno_step(const StateVector& psi, const StateVector& chi, Rng& rng) {
  const VectorXc o = system_overlaps(psi, chi);
  const double w_r = psi.space.weight() / chi.space.weight();
  const double p = std::min(1.0, o.squaredNorm() * w_r);
  return project(psi, chi, rng.uniform() < p);
}

ZenoStepResult zeno_project_survive(const StateVector& psi, const StateVector& chi) {
  return project(psi, chi, true);
}

}  // namespace pmsim
