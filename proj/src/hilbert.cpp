#include "pmsim/hilbert.hpp"

#include <cmath>

namespace pmsim {

namespace {
constexpr Complex kI{0.0, 1.0};
constexpr double kPi = 3.141592653589793238462643383279502884;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}
}  // namespace

HilbertSpace HilbertSpace::spin(Eigen::Index dim) {
  require(dim >= 2, "spin space needs dimension >= 2");
  HilbertSpace s;
  s.kind = SpaceKind::Spin;
  s.dim = dim;
  return s;
}

HilbertSpace HilbertSpace::grid(Eigen::Index cells, double x_min, double x_max) {
  require(cells >= 2 && x_max > x_min, "grid needs cells >= 2 and x_max > x_min");
  HilbertSpace s;
  s.kind = SpaceKind::Grid1d;
  s.dim = cells;
  s.x_min = x_min;
  s.x_max = x_max;
  return s;
}

HilbertSpace HilbertSpace::pointer(Eigen::Index cells, double x_min, double x_max) {
  HilbertSpace s = grid(cells, x_min, x_max);
  s.kind = SpaceKind::Pointer;
  return s;
}

bool HilbertSpace::operator==(const HilbertSpace& o) const {
  return kind == o.kind && dim == o.dim && x_min == o.x_min && x_max == o.x_max;
}

CompositeSpace::CompositeSpace(std::vector<HilbertSpace> f) : factors(std::move(f)) {
  require(!factors.empty(), "composite space needs at least one factor");
  require(dim() <= kMaxCompositeDim, "composite dimension exceeds cap");
}

Eigen::Index CompositeSpace::dim() const {
  Eigen::Index d = 1;
  for (const auto& f : factors) d *= f.dim;
  return d;
}

double CompositeSpace::weight() const {
  double w = 1.0;
  for (const auto& f : factors) w *= f.weight();
  return w;
}

Eigen::Index CompositeSpace::stride(Eigen::Index i) const {
  Eigen::Index s = 1;
  for (Eigen::Index k = n_factors() - 1; k > i; --k) s *= factors[static_cast<std::size_t>(k)].dim;
  return s;
}

bool CompositeSpace::operator==(const CompositeSpace& o) const { return factors == o.factors; }

CompositeSpace tensor(const CompositeSpace& a, const CompositeSpace& b) {
  std::vector<HilbertSpace> f = a.factors;
  f.insert(f.end(), b.factors.begin(), b.factors.end());
  return CompositeSpace(std::move(f));
}

StateVector::StateVector(CompositeSpace s, VectorXc a) : space(std::move(s)), amps(std::move(a)) {
  require(amps.size() == space.dim(), "state dimension does not match its space");
}

Operator::Operator(CompositeSpace s, MatrixXc m, bool herm)
    : space(std::move(s)), mat(std::move(m)), hermitian(herm) {
  require(mat.rows() == mat.cols() && mat.rows() == space.dim(),
          "operator dimension does not match its space");
  if (hermitian) {
    const double residue = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
    if (residue > 1e-12)
      throw NumericsError("operator flagged hermitian has adjoint residue " + std::to_string(residue));
  }
}

Complex inner(const StateVector& a, const StateVector& b) {
  require(a.space == b.space, "inner product across different spaces");
  return a.space.weight() * a.amps.dot(b.amps);
}

double norm(const StateVector& a) { return std::sqrt(std::abs(inner(a, a))); }

StateVector normalized(const StateVector& a) {
  const double n = norm(a);
  if (n <= 0.0) throw NumericsError("cannot normalize a zero state");
  return StateVector(a.space, a.amps / n);
}

double fidelity(const StateVector& a, const StateVector& b) { return std::abs(inner(a, b)); }

double expectation(const Operator& a, const StateVector& psi) {
  require(a.space == psi.space, "expectation across different spaces");
  if (!a.hermitian) throw ConfigError("expectation requires a hermitian operator");
  const Complex v = a.space.weight() * psi.amps.dot(a.mat * psi.amps);
  if (std::abs(v.imag()) > 1e-10)
    throw NumericsError("expectation value has imaginary residue " + std::to_string(v.imag()));
  return v.real();
}

StateVector apply(const Operator& a, const StateVector& psi) {
  require(a.space == psi.space, "operator applied across different spaces");
  return StateVector(psi.space, a.mat * psi.amps);
}

StateVector tensor_state(const StateVector& a, const StateVector& b) {
  CompositeSpace s = tensor(a.space, b.space);
  const Eigen::Index db = b.dim();
  VectorXc out(s.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    out.segment(i * db, db) = a.amps(i) * b.amps;
  return StateVector(std::move(s), std::move(out));
}

Operator tensor_op(const Operator& a, const Operator& b) {
  CompositeSpace s = tensor(a.space, b.space);
  require(s.dim() <= 4096, "materialized operator exceeds the dense size cap");
  const Eigen::Index da = a.dim(), db = b.dim();
  MatrixXc out(da * db, da * db);
  for (Eigen::Index ia = 0; ia < da; ++ia)
    for (Eigen::Index ja = 0; ja < da; ++ja)
      out.block(ia * db, ja * db, db, db) = a.mat(ia, ja) * b.mat;
  return Operator(std::move(s), std::move(out), a.hermitian && b.hermitian);
}

VectorXr pointer_marginal(const StateVector& psi, Eigen::Index factor_index) {
  require(factor_index >= 0 && factor_index < psi.space.n_factors(), "factor index out of range");
  const HilbertSpace& f = psi.space.factor(factor_index);
  const Eigen::Index stride = psi.space.stride(factor_index);
  const double w = psi.space.weight();
  VectorXr p = VectorXr::Zero(f.dim);
  for (Eigen::Index i = 0; i < psi.dim(); ++i) {
    const Eigen::Index n = (i / stride) % f.dim;
    p(n) += std::norm(psi.amps(i)) * w;
  }
  return p;
}

double marginal_mean_x(const StateVector& psi, Eigen::Index factor_index) {
  const HilbertSpace& f = psi.space.factor(factor_index);
  require(f.is_grid(), "mean coordinate needs a grid factor");
  const VectorXr p = pointer_marginal(psi, factor_index);
  double m = 0.0;
  for (Eigen::Index n = 0; n < p.size(); ++n) m += p(n) * f.x(n);
  return m;
}

EigenSystem eigh(const Operator& a) {
  if (!a.hermitian) throw ConfigError("eigh requires a hermitian operator");
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(a.mat);
  if (solver.info() != Eigen::Success) throw NumericsError("eigendecomposition failed");
  return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

StateVector eigenstate(const Operator& a, const EigenSystem& es, Eigen::Index level) {
  require(level >= 0 && level < es.values.size(), "eigenlevel out of range");
  VectorXc v = es.vectors.col(level) / std::sqrt(a.space.weight());
  return StateVector(a.space, std::move(v));
}

Operator identity_op(const CompositeSpace& s) {
  return Operator(s, MatrixXc::Identity(s.dim(), s.dim()), true);
}

namespace {
Operator spin2_op(MatrixXc m) { return Operator(HilbertSpace::spin(2), std::move(m), true); }
}  // namespace

Operator pauli_x() {
  MatrixXc m(2, 2);
  m << 0, 1, 1, 0;
  return spin2_op(std::move(m));
}

Operator pauli_y() {
  MatrixXc m(2, 2);
  m << 0, -kI, kI, 0;
  return spin2_op(std::move(m));
}

Operator pauli_z() {
  MatrixXc m(2, 2);
  m << 1, 0, 0, -1;
  return spin2_op(std::move(m));
}

Operator pauli_axis(double nx, double ny, double nz) {
  MatrixXc m(2, 2);
  m << nz, Complex(nx, -ny), Complex(nx, ny), -nz;
  return spin2_op(std::move(m));
}

Operator projector(const StateVector& chi) {
  const double w = chi.space.weight();
  MatrixXc m = w * chi.amps * chi.amps.adjoint();
  return Operator(chi.space, std::move(m), true);
}

StateVector basis_state(const CompositeSpace& s, Eigen::Index n) {
  require(n >= 0 && n < s.dim(), "basis index out of range");
  VectorXc v = VectorXc::Zero(s.dim());
  v(n) = 1.0 / std::sqrt(s.weight());
  return StateVector(s, std::move(v));
}

StateVector ket0() { return basis_state(HilbertSpace::spin(2), 0); }
StateVector ket1() { return basis_state(HilbertSpace::spin(2), 1); }

StateVector ket_plus() {
  VectorXc v(2);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return StateVector(HilbertSpace::spin(2), std::move(v));
}

StateVector ket_minus() {
  VectorXc v(2);
  v << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
  return StateVector(HilbertSpace::spin(2), std::move(v));
}

StateVector bloch_state(double theta, double phi) {
  VectorXc v(2);
  v << std::cos(theta / 2.0), std::exp(kI * phi) * std::sin(theta / 2.0);
  return StateVector(HilbertSpace::spin(2), std::move(v));
}

StateVector random_qubit(Rng& rng) {
  const double theta = std::acos(1.0 - 2.0 * rng.uniform());
  const double phi = 2.0 * kPi * rng.uniform();
  return bloch_state(theta, phi);
}

Operator random_hermitian(const CompositeSpace& s, Rng& rng) {
  const Eigen::Index d = s.dim();
  MatrixXc m(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex(rng.normal(), rng.normal());
  MatrixXc h = (m + m.adjoint()) / 2.0;
  return Operator(s, std::move(h), true);
}

StateVector random_state(const CompositeSpace& s, Rng& rng) {
  VectorXc v(s.dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(rng.normal(), rng.normal());
  return normalized(StateVector(s, std::move(v)));
}

Operator position_op(const HilbertSpace& g) {
  require(g.is_grid(), "position operator needs a grid space");
  VectorXc d(g.dim);
  for (Eigen::Index n = 0; n < g.dim; ++n) d(n) = g.x(n);
  return Operator(g, d.asDiagonal(), true);
}

Operator first_derivative(const HilbertSpace& g) {
  require(g.is_grid(), "derivative needs a grid space");
  // 8th-order antisymmetric central stencil, truncated at the walls
  const double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  const Eigen::Index n = g.dim;
  const double inv_dx = 1.0 / g.dx();
  MatrixXc d = MatrixXc::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 1; k <= 4; ++k) {
      if (i + k < n) d(i, i + k) = c[k - 1] * inv_dx;
      if (i - k >= 0) d(i, i - k) = -c[k - 1] * inv_dx;
    }
  }
  return Operator(g, std::move(d), false);
}

Operator momentum_op(const HilbertSpace& g) {
  Operator d = first_derivative(g);
  return Operator(g, -kI * kHbar * d.mat, true);
}

Operator kinetic_op(const HilbertSpace& g) {
  require(g.is_grid(), "kinetic operator needs a grid space");
  const Eigen::Index n = g.dim;
  const double t = kHbar * kHbar / (2.0 * kMass * g.dx() * g.dx());
  MatrixXc m = MatrixXc::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = 2.0 * t;
    if (i + 1 < n) m(i, i + 1) = -t;
    if (i - 1 >= 0) m(i, i - 1) = -t;
  }
  return Operator(g, std::move(m), true);
}

Operator momentum_kinetic_op(const HilbertSpace& g) {
  Operator p = momentum_op(g);
  MatrixXc m = p.mat * p.mat / (2.0 * kMass);
  m = ((m + m.adjoint()) / 2.0).eval();
  return Operator(g, std::move(m), true);
}

Operator potential_op(const HilbertSpace& g, const VectorXr& v) {
  require(g.is_grid() && v.size() == g.dim, "potential needs one value per grid cell");
  return Operator(g, v.cast<Complex>().asDiagonal(), true);
}

Operator ho_hamiltonian(const HilbertSpace& g) {
  Operator t = kinetic_op(g);
  VectorXr v(g.dim);
  for (Eigen::Index n = 0; n < g.dim; ++n) v(n) = 0.5 * g.x(n) * g.x(n);
  return Operator(g, t.mat + potential_op(g, v).mat, true);
}

StateVector gaussian_state(const HilbertSpace& g, double x0, double sigma) {
  require(g.is_grid() && sigma > 0, "gaussian needs a grid space and sigma > 0");
  VectorXc v(g.dim);
  for (Eigen::Index n = 0; n < g.dim; ++n) {
    const double u = (g.x(n) - x0) / (2.0 * sigma);
    v(n) = std::exp(-u * u);
  }
  return normalized(StateVector(g, std::move(v)));
}

StateVector boosted_gaussian_state(const HilbertSpace& g, double x0, double sigma, double k0) {
  StateVector s = gaussian_state(g, x0, sigma);
  for (Eigen::Index n = 0; n < g.dim; ++n) s.amps(n) *= std::exp(kI * (k0 * g.x(n)));
  return s;
}

StateVector ho_state(const HilbertSpace& g, int level) {
  require(g.is_grid() && level >= 0 && level <= 2, "analytic oscillator levels 0..2 only");
  VectorXc v(g.dim);
  for (Eigen::Index n = 0; n < g.dim; ++n) {
    const double x = g.x(n);
    double h = 1.0;
    if (level == 1) h = x;
    if (level == 2) h = 2.0 * x * x - 1.0;
    v(n) = h * std::exp(-x * x / 2.0);
  }
  return normalized(StateVector(g, std::move(v)));
}

}  // namespace pmsim
