#include "pmsim/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "pmsim/parallel.hpp"

namespace pmsim {

namespace {
constexpr Complex kImag{0.0, 1.0};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}
}  // namespace

RegionPartition::RegionPartition(HilbertSpace g,
                                 std::vector<std::pair<Eigen::Index, Eigen::Index>> s)
    : grid(g), spans(std::move(s)) {
  require(grid.is_grid(), "region partition needs a grid space");
  require(!spans.empty(), "region partition needs at least one region");
  Eigen::Index next = 0;
  for (const auto& [begin, end] : spans) {
    require(begin == next && end > begin, "regions must tile the grid in order without gaps");
    next = end;
  }
  require(next == grid.dim, "regions must cover every cell");
}

RegionPartition RegionPartition::uniform(const HilbertSpace& grid, Eigen::Index n_regions) {
  require(n_regions >= 1 && grid.dim % n_regions == 0,
          "region count must divide the cell count");
  const Eigen::Index per = grid.dim / n_regions;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> spans;
  spans.reserve(static_cast<std::size_t>(n_regions));
  for (Eigen::Index n = 0; n < n_regions; ++n) spans.emplace_back(n * per, (n + 1) * per);
  return RegionPartition(grid, std::move(spans));
}

Eigen::Index RegionPartition::cells(Eigen::Index n) const {
  require(n >= 0 && n < n_regions(), "region index out of range");
  return spans[static_cast<std::size_t>(n)].second - spans[static_cast<std::size_t>(n)].first;
}

double RegionPartition::volume(Eigen::Index n) const {
  return static_cast<double>(cells(n)) * grid.dx();
}

double RegionPartition::center(Eigen::Index n) const {
  const auto& [begin, end] = spans[static_cast<std::size_t>(n)];
  return 0.5 * (grid.x(begin) + grid.x(end - 1));
}

Operator projector_observable(const RegionPartition& part, Eigen::Index n) {
  require(n >= 0 && n < part.n_regions(), "region index out of range");
  const double inv_v = 1.0 / part.volume(n);
  MatrixXc m = MatrixXc::Zero(part.grid.dim, part.grid.dim);
  const auto& [begin, end] = part.spans[static_cast<std::size_t>(n)];
  for (Eigen::Index c = begin; c < end; ++c) m(c, c) = inv_v;
  return Operator(CompositeSpace(part.grid), std::move(m), true);
}

Operator flux_observable(const RegionPartition& part, Eigen::Index n) {
  require(n >= 0 && n < part.n_regions(), "region index out of range");
  const Operator a_n = projector_observable(part, n);
  const Operator d = first_derivative(part.grid);
  const Complex scale = kHbar / (2.0 * kMass * kImag);
  MatrixXc m = scale * (a_n.mat * d.mat + d.mat * a_n.mat);
  m = 0.5 * (m + m.adjoint()).eval();
  return Operator(CompositeSpace(part.grid), std::move(m), true);
}

namespace {

struct FieldReadout {
  VectorXr values;
  double max_norm_drift = 0.0;
};

// one ideal protective readout per region, merged by region index
FieldReadout protective_field(const StateVector& psi, const RegionPartition& part,
                              const ProtectionScheme& scheme, const ProtectiveRunConfig& cfg,
                              int jobs,
                              Operator (*observable)(const RegionPartition&, Eigen::Index)) {
  FieldReadout out;
  out.values.resize(part.n_regions());
  std::vector<double> residuals(static_cast<std::size_t>(part.n_regions()), 0.0);
  std::vector<double> drifts(static_cast<std::size_t>(part.n_regions()), 0.0);
  std::vector<char> weak(static_cast<std::size_t>(part.n_regions()), 0);
  parallel_chunks(part.n_regions(), jobs, [&](int, std::int64_t begin, std::int64_t end) {
    for (std::int64_t n = begin; n < end; ++n) {
      const MeasurementRecord rec = run_protective_ideal(psi, observable(part, n), scheme, cfg);
      out.values(n) = rec.outcome;
      residuals[static_cast<std::size_t>(n)] = rec.residual;
      drifts[static_cast<std::size_t>(n)] = rec.norm_drift;
      weak[static_cast<std::size_t>(n)] = rec.protection_weak ? 1 : 0;
    }
  });
  if (std::find(weak.begin(), weak.end(), 1) != weak.end()) {
    const double worst = *std::max_element(residuals.begin(), residuals.end());
    throw NumericsError("protective regional readout residual " + std::to_string(worst) +
                        " exceeds tolerance; slow the coupling");
  }
  out.max_norm_drift = *std::max_element(drifts.begin(), drifts.end());
  return out;
}

}  // namespace

DensityField measure_density(const StateVector& psi, const RegionPartition& part, MeasureMode mode,
                             const ProtectionScheme& scheme, const ProtectiveRunConfig& cfg,
                             int jobs) {
  require(psi.space == CompositeSpace(part.grid), "state and partition live on different grids");
  VectorXr values(part.n_regions());
  double drift = 0.0;
  if (mode == MeasureMode::Exact) {
    for (Eigen::Index n = 0; n < part.n_regions(); ++n)
      values(n) = expectation(projector_observable(part, n), psi);
  } else {
    auto readout = protective_field(psi, part, scheme, cfg, jobs, projector_observable);
    values = readout.values.cwiseMax(0.0);
    drift = readout.max_norm_drift;
    double total = 0.0;
    for (Eigen::Index n = 0; n < part.n_regions(); ++n) total += values(n) * part.volume(n);
    if (total <= 0.0) throw NumericsError("protective density readouts sum to zero");
    values /= total;
  }
  return DensityField{part, std::move(values), drift};
}

FluxField measure_flux(const StateVector& psi, const RegionPartition& part, MeasureMode mode,
                       const ProtectionScheme& scheme, const ProtectiveRunConfig& cfg, int jobs) {
  require(psi.space == CompositeSpace(part.grid), "state and partition live on different grids");
  VectorXr values(part.n_regions());
  double drift = 0.0;
  if (mode == MeasureMode::Exact) {
    for (Eigen::Index n = 0; n < part.n_regions(); ++n)
      values(n) = expectation(flux_observable(part, n), psi);
  } else {
    auto readout = protective_field(psi, part, scheme, cfg, jobs, flux_observable);
    values = readout.values;
    drift = readout.max_norm_drift;
  }
  return FluxField{part, std::move(values), drift};
}

namespace {

// natural cubic spline through (xs, ys) with complex ordinates; evaluated by
// the edge polynomial outside the knot span
struct CubicSpline {
  VectorXr xs;
  VectorXc a, b, c, d;

  CubicSpline(const VectorXr& x, const VectorXc& y) : xs(x), a(y) {
    const Eigen::Index n = x.size();
    VectorXr h(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) h(i) = x(i + 1) - x(i);

    // tridiagonal system for curvature coefficients, natural ends; Thomas solve
    VectorXr diag = VectorXr::Ones(n);
    VectorXr lower = VectorXr::Zero(n - 1);
    VectorXr upper = VectorXr::Zero(n - 1);
    VectorXc rhs = VectorXc::Zero(n);
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      lower(i - 1) = h(i - 1);
      diag(i) = 2.0 * (h(i - 1) + h(i));
      upper(i) = h(i);
      rhs(i) = 3.0 * ((y(i + 1) - y(i)) / h(i) - (y(i) - y(i - 1)) / h(i - 1));
    }
    c.resize(n);
    VectorXr dprime(n);
    VectorXc rprime(n);
    dprime(0) = diag(0);
    rprime(0) = rhs(0);
    for (Eigen::Index i = 1; i < n; ++i) {
      const double m = lower(i - 1) / dprime(i - 1);
      dprime(i) = diag(i) - m * upper(i - 1);
      rprime(i) = rhs(i) - m * rprime(i - 1);
    }
    c(n - 1) = rprime(n - 1) / dprime(n - 1);
    for (Eigen::Index i = n - 2; i >= 0; --i)
      c(i) = (rprime(i) - upper(i) * c(i + 1)) / dprime(i);

    b.resize(n - 1);
    d.resize(n - 1);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      b(i) = (y(i + 1) - y(i)) / h(i) - h(i) * (2.0 * c(i) + c(i + 1)) / 3.0;
      d(i) = (c(i + 1) - c(i)) / (3.0 * h(i));
    }
  }

  Complex operator()(double x) const {
    const Eigen::Index n = xs.size();
    Eigen::Index i = static_cast<Eigen::Index>(
                         std::upper_bound(xs.data(), xs.data() + n, x) - xs.data()) -
                     1;
    i = std::min(std::max(i, Eigen::Index{0}), n - 2);
    const double t = x - xs(i);
    return a(i) + b(i) * t + c(i) * t * t + d(i) * t * t * t;
  }
};

}  // namespace

ReconstructedState reconstruct_wavefunction(const DensityField& rho, const FluxField& j,
                                            const RegionPartition& part) {
  require(rho.part == part && j.part == part, "density, flux, and partition must share regions");
  const Eigen::Index nreg = part.n_regions();
  require(nreg >= 2, "reconstruction needs at least two regions");
  require(rho.values.size() == nreg && j.values.size() == nreg,
          "field length must match the region count");

  const double max_rho = rho.values.maxCoeff();
  const double thresh = std::max(1e-8, 0.05 * max_rho);
  std::vector<bool> skip(static_cast<std::size_t>(nreg));
  for (Eigen::Index n = 0; n < nreg; ++n) skip[static_cast<std::size_t>(n)] = rho.values(n) < thresh;
  require(std::find(skip.begin(), skip.end(), false) != skip.end(),
          "every region is below the density threshold");

  // a node is a low-density dip between two trusted neighbors
  std::vector<bool> node(static_cast<std::size_t>(nreg), false);
  for (Eigen::Index n = 1; n + 1 < nreg; ++n)
    node[static_cast<std::size_t>(n)] =
        skip[static_cast<std::size_t>(n)] && !skip[static_cast<std::size_t>(n - 1)] &&
        !skip[static_cast<std::size_t>(n + 1)];

  VectorXr phases = VectorXr::Zero(nreg);
  double th = 0.0;
  for (Eigen::Index n = 1; n < nreg; ++n) {
    if (!skip[static_cast<std::size_t>(n)] && !skip[static_cast<std::size_t>(n - 1)]) {
      const double v0 = kMass * j.values(n - 1) / (kHbar * rho.values(n - 1));
      const double v1 = kMass * j.values(n) / (kHbar * rho.values(n));
      th += 0.5 * (v0 + v1) * (part.center(n) - part.center(n - 1));
    }
    if (node[static_cast<std::size_t>(n - 1)]) th += M_PI;
    phases(n) = th;
  }

  VectorXr centers(nreg);
  VectorXc amp(nreg);
  for (Eigen::Index n = 0; n < nreg; ++n) {
    centers(n) = part.center(n);
    amp(n) = std::sqrt(std::max(rho.values(n), 0.0)) * std::exp(kImag * phases(n));
  }

  const CubicSpline spline(centers, amp);
  VectorXc psi(part.grid.dim);
  for (Eigen::Index cidx = 0; cidx < part.grid.dim; ++cidx) psi(cidx) = spline(part.grid.x(cidx));
  psi /= std::sqrt(psi.squaredNorm() * part.grid.dx());

  Eigen::Index first = 0;
  while (skip[static_cast<std::size_t>(first)]) ++first;
  const double ph = std::abs(amp(first)) > 0.0 ? std::arg(amp(first)) : 0.0;
  psi *= std::exp(-kImag * ph);

  ReconstructedState out;
  out.state = StateVector(CompositeSpace(part.grid), std::move(psi));
  for (Eigen::Index n = 0; n < nreg; ++n) {
    if (skip[static_cast<std::size_t>(n)]) out.skipped.push_back(n);
    if (node[static_cast<std::size_t>(n)]) out.nodes.push_back(n);
  }
  return out;
}

}  // namespace pmsim
