#include "pmsim/dynamics.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace pmsim {

namespace {
constexpr Complex kImag{0.0, 1.0};
constexpr double kPi = 3.141592653589793238462643383279502884;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}
}  // namespace

double CouplingProfile::g(double t) const {
  require(tau > 0.0, "coupling duration must be positive");
  require(t >= -1e-12 * tau && t <= tau * (1.0 + 1e-12), "coupling profile evaluated outside [0, tau]");
  t = std::min(std::max(t, 0.0), tau);
  if (shape == CouplingShape::Sin2) {
    const double s = std::sin(kPi * t / tau);
    return 2.0 / tau * s * s;
  }
  // plateau of height 1/(tau - w) with sin^2 ramps of width w at both ends
  const double w = tau / 8.0;
  const double h = 1.0 / (tau - w);
  if (t < w) {
    const double s = std::sin(kPi * t / (2.0 * w));
    return h * s * s;
  }
  if (t > tau - w) {
    const double s = std::sin(kPi * (tau - t) / (2.0 * w));
    return h * s * s;
  }
  return h;
}

double CouplingProfile::cumulative(double t) const {
  require(tau > 0.0, "coupling duration must be positive");
  require(t >= -1e-12 * tau && t <= tau * (1.0 + 1e-12), "coupling profile evaluated outside [0, tau]");
  t = std::min(std::max(t, 0.0), tau);
  if (shape == CouplingShape::Sin2)
    return t / tau - std::sin(2.0 * kPi * t / tau) / (2.0 * kPi);
  const double w = tau / 8.0;
  const double h = 1.0 / (tau - w);
  auto ramp = [&](double s) { return 0.5 * h * (s - (w / kPi) * std::sin(kPi * s / w)); };
  if (t < w) return ramp(t);
  if (t <= tau - w) return 0.5 * h * w + h * (t - w);
  return 1.0 - ramp(tau - t);
}

EvolutionSpec make_evolution_spec(const Operator& h_system, const Operator& coupling_a,
                                  const CouplingProfile& coupling, const HilbertSpace& pointer,
                                  bool free_pointer_kinetic, double energy_shift) {
  require(h_system.space == coupling_a.space, "H_system and A must share the system space");
  require(h_system.space.n_factors() == 1, "system space must be a single factor");
  EvolutionSpec spec;
  spec.composite = tensor(h_system.space, CompositeSpace(pointer));
  spec.h_system = h_system;
  spec.coupling_a = coupling_a;
  spec.h_pointer = free_pointer_kinetic
                       ? momentum_kinetic_op(pointer)
                       : Operator(pointer, MatrixXc::Zero(pointer.dim, pointer.dim), true);
  spec.coupling = coupling;
  spec.energy_shift = energy_shift;
  return spec;
}

std::shared_ptr<const PointerBasis> make_pointer_basis(const HilbertSpace& pointer) {
  static std::mutex mu;
  static std::map<std::tuple<int, Eigen::Index, double, double>, std::shared_ptr<const PointerBasis>> cache;
  const auto key = std::make_tuple(static_cast<int>(pointer.kind), pointer.dim, pointer.x_min, pointer.x_max);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  Operator p = momentum_op(pointer);
  EigenSystem es = eigh(p);
  auto basis = std::make_shared<PointerBasis>();
  basis->space = pointer;
  basis->q = es.vectors;
  basis->p = es.values;
  MatrixXc x = position_op(pointer).mat;
  basis->x_in_p = basis->q.adjoint() * x * basis->q;
  std::lock_guard<std::mutex> lock(mu);
  cache[key] = basis;
  return cache[key];
}

Operator build_hamiltonian(const EvolutionSpec& spec, double t) {
  require(spec.composite.n_factors() == 2, "evolution needs a [system, pointer] composite");
  require(spec.h_system.hermitian && spec.h_pointer.hermitian && spec.coupling_a.hermitian,
          "evolution operators must be hermitian");
  const HilbertSpace& sys = spec.composite.factor(0);
  const HilbertSpace& ptr = spec.composite.factor(1);
  Operator id_sys = identity_op(CompositeSpace(sys));
  Operator id_ptr = identity_op(CompositeSpace(ptr));
  Operator p = momentum_op(ptr);
  const double g = spec.coupling.g(t);
  MatrixXc h = tensor_op(spec.h_system, id_ptr).mat + tensor_op(id_sys, spec.h_pointer).mat +
               g * tensor_op(spec.coupling_a, p).mat;
  if (spec.energy_shift != 0.0)
    h -= spec.energy_shift * MatrixXc::Identity(h.rows(), h.cols());
  return Operator(spec.composite, std::move(h), true);
}

namespace {

struct RecordPlan {
  Eigen::Index stride;
  bool mean_x;
  bool mean_a;
};

// 2x2 Crank-Nicolson step: psi <- (I + iB)^-1 (I - iB) psi, closed form.
inline void cn_step_2x2(const Eigen::Matrix2cd& b, Eigen::Ref<Eigen::Vector2cd> x) {
  const Eigen::Vector2cd bx = b * x;
  const Eigen::Vector2cd rhs = x - kImag * bx;
  const Complex m00 = 1.0 + kImag * b(0, 0);
  const Complex m01 = kImag * b(0, 1);
  const Complex m10 = kImag * b(1, 0);
  const Complex m11 = 1.0 + kImag * b(1, 1);
  const Complex det = m00 * m11 - m01 * m10;
  x(0) = (m11 * rhs(0) - m01 * rhs(1)) / det;
  x(1) = (m00 * rhs(1) - m10 * rhs(0)) / det;
}

// Banded Crank-Nicolson step via (I + iB)^-1 = (I - iB)(I + B^2)^-1.
inline void cn_step_banded(const HermBand& b, VectorXc& x) {
  const VectorXc u = x - kImag * band_matvec(b, x);
  HermBand c = band_square_plus_identity(b);
  band_cholesky_in_place(c);
  const VectorXc v = band_cholesky_solve(c, u);
  x = v - kImag * band_matvec(b, v);
}

}  // namespace

Trajectory evolve(const StateVector& psi0, const EvolutionSpec& spec, const EvolveOptions& opts) {
  require(spec.composite.n_factors() == 2, "evolution needs a [system, pointer] composite");
  require(psi0.space == spec.composite, "initial state lives on a different composite");
  require(spec.h_system.hermitian && spec.h_pointer.hermitian && spec.coupling_a.hermitian,
          "evolution operators must be hermitian");
  require(std::vector<HilbertSpace>{spec.composite.factor(0)} == spec.h_system.space.factors &&
              spec.h_system.space == spec.coupling_a.space,
          "system operators do not match the composite's first factor");
  require(std::vector<HilbertSpace>{spec.composite.factor(1)} == spec.h_pointer.space.factors,
          "pointer operator does not match the composite's second factor");
  if (std::abs(norm(psi0) - 1.0) > 1e-9) throw ConfigError("initial state must be normalized");

  const double tau = spec.coupling.tau;
  require(opts.dt > 0.0, "dt must be positive");
  require(opts.dt <= tau / 100.0 * (1.0 + 1e-12), "dt must be at most tau/100");
  const auto steps = static_cast<Eigen::Index>(std::llround(tau / opts.dt));
  require(steps >= 1 && std::abs(static_cast<double>(steps) * opts.dt - tau) <= 1e-9 * std::max(tau, 1.0),
          "dt must divide tau");

  const HilbertSpace& sys = spec.composite.factor(0);
  const HilbertSpace& ptr = spec.composite.factor(1);
  const Eigen::Index n_s = sys.dim;
  const Eigen::Index n_p = ptr.dim;
  const double w_tot = spec.composite.weight();
  const double dt_signed = opts.reverse ? -opts.dt : opts.dt;

  const RecordPlan plan{opts.stride, opts.record_mean_x, opts.record_mean_a};

  Trajectory traj;
  traj.initial = psi0;
  traj.steps = steps;
  traj.dt = opts.dt;

  auto time_at = [&](Eigen::Index j) {
    return opts.reverse ? tau - static_cast<double>(j) * opts.dt : static_cast<double>(j) * opts.dt;
  };
  auto mid_time = [&](Eigen::Index j) {
    return opts.reverse ? tau - (static_cast<double>(j) + 0.5) * opts.dt
                        : (static_cast<double>(j) + 0.5) * opts.dt;
  };
  auto want_record = [&](Eigen::Index j) {
    return j == 0 || j == steps || (plan.stride > 0 && j % plan.stride == 0);
  };

  // fiber decomposition applies when H_ptr is diagonal in the momentum basis
  std::shared_ptr<const PointerBasis> basis = opts.pointer_basis;
  if (!basis || !(basis->space == ptr)) basis = make_pointer_basis(ptr);
  bool fiber = !opts.force_dense;
  VectorXr e_ptr;
  if (fiber) {
    const MatrixXc h_tilde = basis->q.adjoint() * spec.h_pointer.mat * basis->q;
    const VectorXr diag = h_tilde.diagonal().real();
    MatrixXc off = h_tilde;
    off.diagonal().setZero();
    const double scale = 1.0 + diag.cwiseAbs().maxCoeff();
    if (off.cwiseAbs().maxCoeff() > 1e-12 * scale)
      fiber = false;
    else
      e_ptr = diag;
  }

  if (fiber) {
    traj.fiber_path = true;
    // state as a (system x momentum-fiber) matrix
    MatrixXc psi_mat(n_s, n_p);
    for (Eigen::Index s = 0; s < n_s; ++s)
      for (Eigen::Index n = 0; n < n_p; ++n) psi_mat(s, n) = psi0.amps(s * n_p + n);
    MatrixXc phi = psi_mat * basis->q.conjugate();

    const bool two_level = (n_s == 2);
    HermBand bh, ba;
    Eigen::Index kd = 0;
    if (!two_level) {
      const Eigen::Index kd_h = band_width(spec.h_system.mat);
      const Eigen::Index kd_a = band_width(spec.coupling_a.mat);
      kd = std::max(kd_h, kd_a);
      if (kd > 16 && n_s > 64)
        throw NumericsError("system operators too dense for the fiber integrator");
      bh = band_from_dense(spec.h_system.mat, kd);
      ba = band_from_dense(spec.coupling_a.mat, kd);
    }

    auto record = [&](Eigen::Index j) {
      if (!want_record(j)) return;
      traj.times.push_back(time_at(j));
      if (plan.mean_x) {
        const MatrixXc m = phi * basis->x_in_p.transpose();
        traj.mean_x.push_back(w_tot * (phi.conjugate().cwiseProduct(m)).sum().real());
      }
      if (plan.mean_a) {
        const MatrixXc m = spec.coupling_a.mat * phi;
        traj.mean_a.push_back(w_tot * (phi.conjugate().cwiseProduct(m)).sum().real());
      }
    };

    record(0);
    for (Eigen::Index j = 0; j < steps; ++j) {
      const double gm = spec.coupling.g(mid_time(j));
      const double half = dt_signed / (2.0 * kHbar);
      if (two_level) {
        const Eigen::Matrix2cd h0 = spec.h_system.mat;
        const Eigen::Matrix2cd am = spec.coupling_a.mat;
        for (Eigen::Index k = 0; k < n_p; ++k) {
          Eigen::Matrix2cd b = half * (h0 + gm * basis->p(k) * am);
          const double shift = half * (e_ptr(k) - spec.energy_shift);
          b(0, 0) += shift;
          b(1, 1) += shift;
          cn_step_2x2(b, phi.col(k).head<2>());
        }
      } else {
        for (Eigen::Index k = 0; k < n_p; ++k) {
          HermBand b = band_lincomb(half, bh, half * gm * basis->p(k), ba);
          band_shift_diag(b, half * (e_ptr(k) - spec.energy_shift));
          VectorXc col = phi.col(k);
          cn_step_banded(b, col);
          phi.col(k) = col;
        }
      }
      const double norm_now = std::sqrt(w_tot) * phi.norm();
      traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(norm_now - 1.0));
      record(j + 1);
    }

    MatrixXc psi_out = phi * basis->q.transpose();
    VectorXc amps(n_s * n_p);
    for (Eigen::Index s = 0; s < n_s; ++s)
      for (Eigen::Index n = 0; n < n_p; ++n) amps(s * n_p + n) = psi_out(s, n);
    traj.final_state = StateVector(spec.composite, std::move(amps));
    return traj;
  }

  // dense reference path
  const Eigen::Index dim = spec.composite.dim();
  if (dim > opts.max_dense_dim)
    throw NumericsError("no fiber decomposition applies and the composite exceeds the dense size cap");
  Operator id_sys = identity_op(CompositeSpace(sys));
  Operator id_ptr = identity_op(CompositeSpace(ptr));
  const MatrixXc h_prot = tensor_op(spec.h_system, id_ptr).mat;
  const MatrixXc h_free = tensor_op(id_sys, spec.h_pointer).mat;
  const MatrixXc h_int = tensor_op(spec.coupling_a, momentum_op(ptr)).mat;
  const MatrixXc a_comp = tensor_op(spec.coupling_a, id_ptr).mat;

  StateVector psi = psi0;
  auto record = [&](Eigen::Index j) {
    if (!want_record(j)) return;
    traj.times.push_back(time_at(j));
    if (plan.mean_x) traj.mean_x.push_back(marginal_mean_x(psi, 1));
    if (plan.mean_a)
      traj.mean_a.push_back((w_tot * psi.amps.dot(a_comp * psi.amps)).real());
  };

  record(0);
  const MatrixXc eye = MatrixXc::Identity(dim, dim);
  for (Eigen::Index j = 0; j < steps; ++j) {
    const double gm = spec.coupling.g(mid_time(j));
    MatrixXc h = h_prot + h_free + gm * h_int;
    if (spec.energy_shift != 0.0) h -= spec.energy_shift * eye;
    const MatrixXc b = (dt_signed / (2.0 * kHbar)) * h;
    const VectorXc rhs = psi.amps - kImag * (b * psi.amps);
    Eigen::PartialPivLU<MatrixXc> lu(eye + kImag * b);
    psi.amps = lu.solve(rhs);
    traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(norm(psi) - 1.0));
    record(j + 1);
  }
  traj.final_state = psi;
  return traj;
}

double pointer_shift(const Trajectory& traj, Eigen::Index pointer_factor) {
  return marginal_mean_x(traj.final_state, pointer_factor) -
         marginal_mean_x(traj.initial, pointer_factor);
}

double ehrenfest_residual(const Trajectory& traj, const EvolutionSpec& spec) {
  const auto k = static_cast<Eigen::Index>(traj.times.size());
  require(k == traj.steps + 1 && traj.mean_x.size() == traj.times.size() &&
              traj.mean_a.size() == traj.times.size(),
          "ehrenfest residual needs stride-1 recording of <X> and <A>");
  double worst = 0.0;
  for (Eigen::Index j = 1; j + 1 < k; ++j) {
    const double dt = traj.times[static_cast<std::size_t>(j + 1)] - traj.times[static_cast<std::size_t>(j - 1)];
    const double lhs = (traj.mean_x[static_cast<std::size_t>(j + 1)] - traj.mean_x[static_cast<std::size_t>(j - 1)]) / dt;
    const double rhs =
        spec.coupling.g(traj.times[static_cast<std::size_t>(j)]) * traj.mean_a[static_cast<std::size_t>(j)];
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace pmsim
