#pragma once
#include <string>
#include <vector>

#include "pmsim/rng.hpp"
#include "pmsim/types.hpp"

namespace pmsim {

// Hard cap on composite dimension; desk-scale problems never exceed it.
inline constexpr Eigen::Index kMaxCompositeDim = 16384;

enum class SpaceKind { Spin, Grid1d, Pointer };

// One tensor factor. Grid kinds carry a uniform cell measure dx and cell-center
// coordinates x_n = x_min + (n + 1/2) dx; inner products on them approximate
// continuum integrals, so amplitudes carry units 1/sqrt(length).
struct HilbertSpace {
  SpaceKind kind = SpaceKind::Spin;
  Eigen::Index dim = 2;
  double x_min = 0.0;
  double x_max = 0.0;

  static HilbertSpace spin(Eigen::Index dim = 2);
  static HilbertSpace grid(Eigen::Index cells, double x_min, double x_max);
  static HilbertSpace pointer(Eigen::Index cells, double x_min, double x_max);

  bool is_grid() const { return kind != SpaceKind::Spin; }
  double dx() const { return is_grid() ? (x_max - x_min) / static_cast<double>(dim) : 1.0; }
  // per-cell measure used in inner products
  double weight() const { return is_grid() ? dx() : 1.0; }
  double x(Eigen::Index n) const { return x_min + (static_cast<double>(n) + 0.5) * dx(); }

  bool operator==(const HilbertSpace& o) const;
};

// Ordered tensor product of factors; index arithmetic is row-major over the
// factor list (first factor varies slowest) and is the single source of truth
// for layout.
struct CompositeSpace {
  std::vector<HilbertSpace> factors;

  CompositeSpace() = default;
  CompositeSpace(const HilbertSpace& single) : factors{single} {}  // NOLINT(google-explicit-constructor)
  explicit CompositeSpace(std::vector<HilbertSpace> f);

  Eigen::Index dim() const;
  double weight() const;  // product of factor weights
  Eigen::Index n_factors() const { return static_cast<Eigen::Index>(factors.size()); }
  const HilbertSpace& factor(Eigen::Index i) const { return factors.at(static_cast<std::size_t>(i)); }
  // stride of factor i in the flat index
  Eigen::Index stride(Eigen::Index i) const;

  bool operator==(const CompositeSpace& o) const;
};

CompositeSpace tensor(const CompositeSpace& a, const CompositeSpace& b);

struct StateVector {
  CompositeSpace space;
  VectorXc amps;

  StateVector() = default;
  StateVector(CompositeSpace s, VectorXc a);

  Eigen::Index dim() const { return amps.size(); }
};

struct Operator {
  CompositeSpace space;
  MatrixXc mat;
  bool hermitian = false;

  Operator() = default;
  // hermitian flag is verified at construction: max|M - M'| <= 1e-12 required.
  Operator(CompositeSpace s, MatrixXc m, bool herm);

  Eigen::Index dim() const { return mat.rows(); }
};

// ---- inner products & norms (grid measure included) ----
Complex inner(const StateVector& a, const StateVector& b);
double norm(const StateVector& a);
StateVector normalized(const StateVector& a);
// |<a|b>|
double fidelity(const StateVector& a, const StateVector& b);

// <psi|A|psi>; requires A hermitian; imaginary residue above 1e-10 is treated
// as numerical corruption.
double expectation(const Operator& a, const StateVector& psi);

StateVector apply(const Operator& a, const StateVector& psi);

// ---- tensor algebra ----
StateVector tensor_state(const StateVector& a, const StateVector& b);
Operator tensor_op(const Operator& a, const Operator& b);

// Probability vector over one grid factor: p_n = sum_rest |Psi|^2 * weights.
VectorXr pointer_marginal(const StateVector& psi, Eigen::Index factor_index);
// Mean coordinate of a grid factor under the marginal.
double marginal_mean_x(const StateVector& psi, Eigen::Index factor_index);

// ---- eigendecomposition ----
struct EigenSystem {
  VectorXr values;
  MatrixXc vectors;  // columns orthonormal in the plain dot product
};
EigenSystem eigh(const Operator& a);
// column l as a StateVector normalized under the space's measure
StateVector eigenstate(const Operator& a, const EigenSystem& es, Eigen::Index level);

// ---- spin builders ----
Operator identity_op(const CompositeSpace& s);
Operator pauli_x();
Operator pauli_y();
Operator pauli_z();
// (axis . sigma), axis need not be normalized here; callers validate
Operator pauli_axis(double nx, double ny, double nz);
Operator projector(const StateVector& chi);  // |chi><chi| (weight-aware)
StateVector basis_state(const CompositeSpace& s, Eigen::Index n);
StateVector ket0();
StateVector ket1();
StateVector ket_plus();
StateVector ket_minus();
// Bloch vector (theta, phi): cos(t/2)|0> + e^{i phi} sin(t/2)|1>
StateVector bloch_state(double theta, double phi);
StateVector random_qubit(Rng& rng);
Operator random_hermitian(const CompositeSpace& s, Rng& rng);
StateVector random_state(const CompositeSpace& s, Rng& rng);

// ---- grid builders ----
// position operator diag(x_n)
Operator position_op(const HilbertSpace& g);
// Antisymmetric 8th-order central-difference first derivative with Dirichlet
// truncation at the edges; D^T = -D holds exactly, so -i*D is hermitian.
Operator first_derivative(const HilbertSpace& g);
// momentum P = -i hbar D
Operator momentum_op(const HilbertSpace& g);
// kinetic energy via the 3-point Laplacian (negative semidefinite stencil,
// safe spectrum under Dirichlet walls)
Operator kinetic_op(const HilbertSpace& g);
// kinetic built as P^2/2m from the same derivative convention as momentum_op;
// used for free pointer evolution, where it must commute with P exactly
Operator momentum_kinetic_op(const HilbertSpace& g);
Operator potential_op(const HilbertSpace& g, const VectorXr& v);
// harmonic oscillator H = T + x^2/2 (unit frequency)
Operator ho_hamiltonian(const HilbertSpace& g);

// normalized Gaussian exp(-(x-x0)^2 / (4 sigma^2)) (position spread sigma)
StateVector gaussian_state(const HilbertSpace& g, double x0, double sigma);
// Gaussian boosted to momentum k0
StateVector boosted_gaussian_state(const HilbertSpace& g, double x0, double sigma, double k0);
// discretized analytic harmonic-oscillator eigenfunction, levels 0..2
StateVector ho_state(const HilbertSpace& g, int level);

}  // namespace pmsim
