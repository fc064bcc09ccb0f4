#pragma once
#include "pmsim/types.hpp"

namespace pmsim {

// Hermitian band matrix, lower-triangle storage: entry(r, j) = M(j + r, j) for
// r in 0..kd. Only the lower triangle is stored; the upper follows by
// conjugate symmetry.
struct HermBand {
  Eigen::Index n = 0;
  Eigen::Index kd = 0;
  MatrixXc band;  // (kd + 1) x n

  HermBand() = default;
  HermBand(Eigen::Index n_, Eigen::Index kd_)
      : n(n_), kd(kd_), band(MatrixXc::Zero(kd_ + 1, n_)) {}
};

// Lower bandwidth of a hermitian dense matrix (entries below tol ignored).
Eigen::Index band_width(const MatrixXc& m, double tol = 0.0);

HermBand band_from_dense(const MatrixXc& m, Eigen::Index kd);
MatrixXc band_to_dense(const HermBand& b);

// y = M x
VectorXc band_matvec(const HermBand& b, const VectorXc& x);

// out = alpha * a + beta * b (band storages aligned to max bandwidth)
HermBand band_lincomb(double alpha, const HermBand& a, double beta, const HermBand& b);

// shift the diagonal: M += s * I
void band_shift_diag(HermBand& b, double s);

// C = I + B^2 for hermitian B; result is hermitian positive definite
HermBand band_square_plus_identity(const HermBand& b);

// In-place lower Cholesky of a hermitian positive definite band matrix.
// Throws NumericsError when a pivot is not strictly positive.
void band_cholesky_in_place(HermBand& c);

// Solve L L^H z = rhs given the in-place factor from band_cholesky_in_place.
VectorXc band_cholesky_solve(const HermBand& l, const VectorXc& rhs);

}  // namespace pmsim
