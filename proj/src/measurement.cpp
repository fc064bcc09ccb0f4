#include "pmsim/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pmsim/parallel.hpp"

namespace pmsim {

namespace {
constexpr Complex kImag{0.0, 1.0};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}
}  // namespace

StateVector PointerSpec::initial_state() const {
  return gaussian_state(space(), center, sigma_value());
}

Eigen::Index BinningSpec::n_bins() const {
  require(width > 0.0 && hi > lo, "binning needs width > 0 and hi > lo");
  const auto n = static_cast<Eigen::Index>(std::llround((hi - lo) / width));
  require(n >= 2 && std::abs(static_cast<double>(n) * width - (hi - lo)) <= 1e-9,
          "bin width must tile [lo, hi] into at least two bins");
  return n;
}

Eigen::Index BinningSpec::index(double x) const {
  const Eigen::Index n = n_bins();
  const auto i = static_cast<Eigen::Index>(std::floor((x - lo) / width));
  return std::min(std::max(i, Eigen::Index{0}), n - 1);
}

void OutcomeDistribution::add(double x) {
  counts[static_cast<std::size_t>(binning.index(x))] += 1;
  n_samples += 1;
}

void OutcomeDistribution::merge(const OutcomeDistribution& o) {
  require(binning == o.binning, "histogram merge across different binnings");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  n_samples += o.n_samples;
}

VectorXr OutcomeDistribution::probabilities() const {
  require(n_samples > 0, "empty outcome distribution");
  VectorXr p(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i)
    p(static_cast<Eigen::Index>(i)) = static_cast<double>(counts[i]) / static_cast<double>(n_samples);
  return p;
}

double distribution_overlap(const OutcomeDistribution& d1, const OutcomeDistribution& d2) {
  require(d1.binning == d2.binning, "distribution overlap needs identical binning");
  const VectorXr p = d1.probabilities();
  const VectorXr q = d2.probabilities();
  return p.cwiseMin(q).sum();
}

namespace {
VectorXr average_ranks(const VectorXr& v) {
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return v(a) < v(b); });
  VectorXr r(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    while (j + 1 < n && v(idx[static_cast<std::size_t>(j + 1)]) == v(idx[static_cast<std::size_t>(i)])) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k) r(idx[static_cast<std::size_t>(k)]) = rank;
    i = j + 1;
  }
  return r;
}
}  // namespace

double spearman(const VectorXr& x, const VectorXr& y) {
  require(x.size() == y.size() && x.size() >= 3, "spearman needs >= 3 paired samples");
  const VectorXr rx = average_ranks(x);
  const VectorXr ry = average_ranks(y);
  const VectorXr dx = rx.array() - rx.mean();
  const VectorXr dy = ry.array() - ry.mean();
  const double den = std::sqrt(dx.squaredNorm() * dy.squaredNorm());
  if (den == 0.0) throw NumericsError("spearman undefined for constant ranks");
  return dx.dot(dy) / den;
}

// ---- closed-form Zeno engine ----

struct ZenoRunner::Core {
  HilbertSpace sys;
  HilbertSpace ptr;
  Eigen::Index n_s = 0;
  Eigen::Index n_p = 0;
  Eigen::Index n_seg = 0;
  MatrixXc r;                    // A eigenvectors (plain-orthonormal columns)
  VectorXr avals;
  std::shared_ptr<const PointerBasis> basis;
  MatrixXc q_t;                  // transpose of the momentum eigenbasis
  VectorXc c;                    // chi in the A eigenbasis, unit plain norm
  VectorXc phi0;                 // initial pointer state in the momentum basis
  std::vector<MatrixXc> phases;  // exact segment propagators, elementwise
  VectorXr xs;
  double mean_x0 = 0.0;
};

ZenoRunner::ZenoRunner(const StateVector& chi, const Operator& a, const CouplingProfile& coupling,
                       const PointerSpec& pointer, Eigen::Index n_projections) {
  require(n_projections >= 1, "zeno runner needs n_projections >= 1");
  require(a.space == chi.space && a.space.n_factors() == 1,
          "zeno runner needs chi and A on one system factor");
  auto core = std::make_shared<Core>();
  core->sys = a.space.factor(0);
  core->ptr = pointer.space();
  core->n_s = core->sys.dim;
  core->n_p = core->ptr.dim;
  core->n_seg = n_projections;

  const EigenSystem es = eigh(a);
  core->r = es.vectors;
  core->avals = es.values;
  core->basis = make_pointer_basis(core->ptr);
  core->q_t = core->basis->q.transpose();

  const double w_s = core->sys.weight();
  core->c = core->r.adjoint() * (chi.amps * std::sqrt(w_s));

  const StateVector phi = pointer.initial_state();
  const double w_p = core->ptr.weight();
  core->phi0 = core->basis->q.adjoint() * (phi.amps * std::sqrt(w_p));

  core->xs.resize(core->n_p);
  for (Eigen::Index n = 0; n < core->n_p; ++n) core->xs(n) = core->ptr.x(n);
  core->mean_x0 = 0.0;
  for (Eigen::Index n = 0; n < core->n_p; ++n)
    core->mean_x0 += std::norm(phi.amps(n)) * w_p * core->xs(n);

  VectorXr e_ptr = VectorXr::Zero(core->n_p);
  if (pointer.free_kinetic)
    e_ptr = core->basis->p.array().square() / (2.0 * kMass);

  const double tau = coupling.tau;
  const double seg_dt = tau / static_cast<double>(n_projections);
  core->phases.reserve(static_cast<std::size_t>(n_projections));
  for (Eigen::Index j = 1; j <= n_projections; ++j) {
    const double g_j = coupling.cumulative(static_cast<double>(j) * seg_dt) -
                       coupling.cumulative(static_cast<double>(j - 1) * seg_dt);
    MatrixXc ph(core->n_s, core->n_p);
    for (Eigen::Index al = 0; al < core->n_s; ++al)
      for (Eigen::Index k = 0; k < core->n_p; ++k)
        ph(al, k) = std::exp(-kImag *
                             ((g_j * core->avals(al) * core->basis->p(k) + seg_dt * e_ptr(k)) / kHbar));
    core->phases.push_back(std::move(ph));
  }
  core_ = std::move(core);
  n_ = n_projections;
}

namespace {
// shared segment/projection loop; rng == nullptr selects post-selected mode
ZenoRunner::RunResult zeno_run(const ZenoRunner::Core& core, const StateVector& psi_system,
                               Rng* rng) {
  const double w_s = core.sys.weight();
  const VectorXc sys0 = core.r.adjoint() * (psi_system.amps * std::sqrt(w_s));
  MatrixXc phi = sys0 * core.phi0.transpose();

  ZenoRunner::RunResult res;
  for (Eigen::Index j = 0; j < core.n_seg; ++j) {
    phi.array() *= core.phases[static_cast<std::size_t>(j)].array();
    const Eigen::RowVectorXcd o = core.c.adjoint() * phi;
    const double p = std::min(1.0, o.squaredNorm());
    bool survive = true;
    if (rng != nullptr) survive = rng->uniform() < p;
    if (survive) {
      if (p < 1e-15) throw NumericsError("zeno survival branch has vanishing probability");
      phi = (core.c * o) / std::sqrt(p);
      res.path_survival *= p;
    } else {
      phi -= core.c * o;
      phi /= std::sqrt(1.0 - p);
      res.path_survival *= (1.0 - p);
      res.survived_all = false;
    }
  }

  const MatrixXc pos = phi * core.q_t;
  VectorXr marg(core.n_p);
  for (Eigen::Index n = 0; n < core.n_p; ++n) marg(n) = pos.col(n).squaredNorm();

  if (rng == nullptr) {
    double mean = 0.0;
    for (Eigen::Index n = 0; n < core.n_p; ++n) mean += marg(n) * core.xs(n);
    res.shift = mean - core.mean_x0;
  } else {
    const double u = rng->uniform();
    double acc = 0.0;
    Eigen::Index pick = core.n_p - 1;
    for (Eigen::Index n = 0; n < core.n_p; ++n) {
      acc += marg(n);
      if (u < acc) {
        pick = n;
        break;
      }
    }
    res.readout = core.xs(pick);
  }
  return res;
}
}  // namespace

ZenoRunner::RunResult ZenoRunner::run_ideal(const StateVector& psi_system) const {
  return zeno_run(*core_, psi_system, nullptr);
}

ZenoRunner::RunResult ZenoRunner::run_sampled(const StateVector& psi_system, Rng& rng) const {
  return zeno_run(*core_, psi_system, &rng);
}

// ---- protocols ----

namespace {

// locate the protected eigenlevel and verify psi sits on it
Eigen::Index matched_level(const EigenSystem& es, const Operator& h, const StateVector& psi,
                           const Eigen::Index* declared) {
  const double sw = std::sqrt(h.space.weight());
  const auto level_fidelity = [&](Eigen::Index l) {
    return sw * std::abs(es.vectors.col(l).dot(psi.amps));
  };
  if (declared != nullptr) {
    require(level_fidelity(*declared) >= 1.0 - 1e-9,
            "state is not the declared protected eigenlevel");
    return *declared;
  }
  Eigen::Index best = 0;
  double best_fid = -1.0;
  for (Eigen::Index l = 0; l < es.values.size(); ++l) {
    const double f = level_fidelity(l);
    if (f > best_fid) {
      best_fid = f;
      best = l;
    }
  }
  require(best_fid >= 1.0 - 1e-9, "state is not an eigenstate of the protection Hamiltonian");
  return best;
}

}  // namespace

MeasurementRecord run_protective_ideal(const StateVector& psi, const Operator& a,
                                       const ProtectionScheme& scheme,
                                       const ProtectiveRunConfig& cfg) {
  validate_scheme(scheme);
  require(std::abs(norm(psi) - 1.0) <= 1e-9, "measured state must be normalized");

  MeasurementRecord rec;
  rec.scheme = scheme_name(scheme);
  rec.expected = expectation(a, psi);
  rec.tau = cfg.coupling.tau;
  rec.dt = cfg.dt;

  if (const auto* z = std::get_if<ZenoProtection>(&scheme)) {
    require(fidelity(z->chi, psi) >= 1.0 - 1e-9,
            "zeno protection requires psi to match the protected state");
    ZenoRunner runner(z->chi, a, cfg.coupling, cfg.pointer, z->n_projections);
    const auto res = runner.run_ideal(psi);
    rec.outcome = res.shift;
    rec.survival = res.path_survival;
    rec.n_projections = z->n_projections;
  } else {
    Operator h = has_hamiltonian(scheme)
                     ? protection_hamiltonian(scheme)
                     : Operator(a.space, MatrixXc::Zero(a.dim(), a.dim()), true);
    double shift = 0.0;
    if (has_hamiltonian(scheme)) {
      const EigenSystem es = eigh(h);
      const Eigen::Index* declared = nullptr;
      Eigen::Index declared_level = 0;
      if (const auto* e = std::get_if<EnergyGapProtection>(&scheme)) {
        declared_level = e->level;
        declared = &declared_level;
      }
      const Eigen::Index level = matched_level(es, h, psi, declared);
      if (cfg.energy_rezero) shift = es.values(level);
    }
    const EvolutionSpec spec = make_evolution_spec(h, a, cfg.coupling, cfg.pointer.space(),
                                                   cfg.pointer.free_kinetic, shift);
    EvolveOptions opts;
    opts.dt = cfg.dt;
    const Trajectory traj = evolve(tensor_state(psi, cfg.pointer.initial_state()), spec, opts);
    rec.outcome = pointer_shift(traj);
    rec.norm_drift = traj.max_norm_drift;
  }

  rec.residual = std::abs(rec.outcome - rec.expected);
  // weakness is judged on the observable's own scale so one tolerance covers
  // projectors and broad-spectrum observables alike
  const VectorXr avals = eigh(a).values;
  const double range = avals(avals.size() - 1) - avals(0);
  rec.protection_weak = (range > 1e-12 ? rec.residual / range : rec.residual) > cfg.residual_tol;
  return rec;
}

RealisticEnsemble run_realistic(const StateVector& psi, const Operator& a,
                                const ProtectionScheme& scheme, const ProtectiveRunConfig& cfg,
                                const BinningSpec& binning, std::uint64_t seed, std::int64_t n_runs,
                                int jobs) {
  validate_scheme(scheme);
  require(n_runs >= 1, "realistic ensemble needs n_runs >= 1");

  RealisticEnsemble out{OutcomeDistribution(binning)};

  if (const auto* z = std::get_if<ZenoProtection>(&scheme)) {
    const ZenoRunner runner(z->chi, a, cfg.coupling, cfg.pointer, z->n_projections);
    std::vector<OutcomeDistribution> dists(static_cast<std::size_t>(std::max(jobs, 1)),
                                           OutcomeDistribution(binning));
    // per-run values are stored by run index and reduced sequentially, so the
    // job count cannot perturb the float sums
    std::vector<char> survived(static_cast<std::size_t>(n_runs), 0);
    std::vector<double> path(static_cast<std::size_t>(n_runs), 0.0);
    parallel_chunks(n_runs, jobs, [&](int chunk, std::int64_t begin, std::int64_t end) {
      for (std::int64_t i = begin; i < end; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const auto res = runner.run_sampled(psi, rng);
        dists[static_cast<std::size_t>(chunk)].add(res.readout);
        survived[static_cast<std::size_t>(i)] = res.survived_all ? 1 : 0;
        path[static_cast<std::size_t>(i)] = res.path_survival;
      }
    });
    std::int64_t surv = 0;
    double path_sum = 0.0;
    for (std::int64_t i = 0; i < n_runs; ++i) {
      surv += survived[static_cast<std::size_t>(i)];
      path_sum += path[static_cast<std::size_t>(i)];
    }
    for (const auto& d : dists) out.distribution.merge(d);
    out.survival_frequency = static_cast<double>(surv) / static_cast<double>(n_runs);
    out.mean_path_survival = path_sum / static_cast<double>(n_runs);
    return out;
  }

  // finite-gap (or unprotected) adiabatic evolution: one deterministic
  // trajectory, then independent position readouts
  Operator h = has_hamiltonian(scheme)
                   ? protection_hamiltonian(scheme)
                   : Operator(a.space, MatrixXc::Zero(a.dim(), a.dim()), true);
  const double shift = (cfg.energy_rezero && has_hamiltonian(scheme)) ? expectation(h, psi) : 0.0;
  const EvolutionSpec spec =
      make_evolution_spec(h, a, cfg.coupling, cfg.pointer.space(), cfg.pointer.free_kinetic, shift);
  EvolveOptions opts;
  opts.dt = cfg.dt;
  const Trajectory traj = evolve(tensor_state(psi, cfg.pointer.initial_state()), spec, opts);
  out.max_norm_drift = traj.max_norm_drift;
  const VectorXr marg = pointer_marginal(traj.final_state, 1);
  const HilbertSpace ptr = cfg.pointer.space();
  for (std::int64_t i = 0; i < n_runs; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const double u = rng.uniform();
    double acc = 0.0;
    Eigen::Index pick = ptr.dim - 1;
    for (Eigen::Index n = 0; n < ptr.dim; ++n) {
      acc += marg(n);
      if (u < acc) {
        pick = n;
        break;
      }
    }
    out.distribution.add(ptr.x(pick));
  }
  return out;
}

OutcomeDistribution ProjectiveResult::binned(const BinningSpec& b) const {
  OutcomeDistribution d(b);
  for (Eigen::Index v = 0; v < values.size(); ++v)
    for (std::int64_t c = 0; c < counts[static_cast<std::size_t>(v)]; ++c) d.add(values(v));
  return d;
}

double ProjectiveResult::mean() const {
  double m = 0.0;
  for (Eigen::Index v = 0; v < values.size(); ++v)
    m += values(v) * static_cast<double>(counts[static_cast<std::size_t>(v)]) /
         static_cast<double>(n_samples);
  return m;
}

ProjectiveResult run_projective(const StateVector& psi, const Operator& a, Rng& rng,
                                std::int64_t n_runs) {
  require(a.hermitian, "projective measurement needs a hermitian observable");
  require(n_runs >= 1, "projective sampling needs n_runs >= 1");
  const EigenSystem es = eigh(a);
  const double w = a.space.weight();

  // group eigenvalues equal within 1e-9 and accumulate Born weights
  std::vector<double> values;
  std::vector<double> born;
  for (Eigen::Index l = 0; l < es.values.size(); ++l) {
    const double pr = std::norm(es.vectors.col(l).dot(psi.amps)) * w;
    if (!values.empty() && std::abs(es.values(l) - values.back()) <= 1e-9) {
      born.back() += pr;
    } else {
      values.push_back(es.values(l));
      born.push_back(pr);
    }
  }

  ProjectiveResult res;
  res.values = Eigen::Map<const VectorXr>(values.data(), static_cast<Eigen::Index>(values.size()));
  res.born = Eigen::Map<const VectorXr>(born.data(), static_cast<Eigen::Index>(born.size()));
  res.counts.assign(values.size(), 0);
  res.n_samples = n_runs;
  for (std::int64_t i = 0; i < n_runs; ++i) {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t pick = values.size() - 1;
    for (std::size_t v = 0; v < values.size(); ++v) {
      acc += born[v];
      if (u < acc) {
        pick = v;
        break;
      }
    }
    res.counts[pick] += 1;
  }
  return res;
}

}  // namespace pmsim
