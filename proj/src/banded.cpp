#include "pmsim/banded.hpp"

#include <algorithm>
#include <cmath>

namespace pmsim {

Eigen::Index band_width(const MatrixXc& m, double tol) {
  Eigen::Index kd = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = j; i < m.rows(); ++i)
      if (std::abs(m(i, j)) > tol) kd = std::max(kd, i - j);
  return kd;
}

HermBand band_from_dense(const MatrixXc& m, Eigen::Index kd) {
  HermBand b(m.rows(), kd);
  for (Eigen::Index j = 0; j < b.n; ++j)
    for (Eigen::Index r = 0; r <= kd && j + r < b.n; ++r) b.band(r, j) = m(j + r, j);
  return b;
}

MatrixXc band_to_dense(const HermBand& b) {
  MatrixXc m = MatrixXc::Zero(b.n, b.n);
  for (Eigen::Index j = 0; j < b.n; ++j)
    for (Eigen::Index r = 0; r <= b.kd && j + r < b.n; ++r) {
      m(j + r, j) = b.band(r, j);
      if (r > 0) m(j, j + r) = std::conj(b.band(r, j));
    }
  return m;
}

VectorXc band_matvec(const HermBand& b, const VectorXc& x) {
  VectorXc y = VectorXc::Zero(b.n);
  for (Eigen::Index j = 0; j < b.n; ++j) {
    y(j) += b.band(0, j) * x(j);
    const Eigen::Index rmax = std::min(b.kd, b.n - 1 - j);
    for (Eigen::Index r = 1; r <= rmax; ++r) {
      y(j + r) += b.band(r, j) * x(j);
      y(j) += std::conj(b.band(r, j)) * x(j + r);
    }
  }
  return y;
}

HermBand band_lincomb(double alpha, const HermBand& a, double beta, const HermBand& b) {
  if (a.n != b.n) throw NumericsError("band linear combination across different sizes");
  HermBand out(a.n, std::max(a.kd, b.kd));
  out.band.block(0, 0, a.kd + 1, a.n) = alpha * a.band;
  out.band.block(0, 0, b.kd + 1, b.n) += beta * b.band;
  return out;
}

void band_shift_diag(HermBand& b, double s) {
  for (Eigen::Index j = 0; j < b.n; ++j) b.band(0, j) += s;
}

namespace {
// B(i, k) from lower band storage, any (i, k) within bandwidth
inline Complex band_entry(const HermBand& b, Eigen::Index i, Eigen::Index k) {
  return i >= k ? b.band(i - k, k) : std::conj(b.band(k - i, i));
}
}  // namespace

HermBand band_square_plus_identity(const HermBand& b) {
  const Eigen::Index kd = std::min(2 * b.kd, b.n - 1);
  HermBand c(b.n, kd);
  for (Eigen::Index j = 0; j < b.n; ++j) {
    const Eigen::Index imax = std::min(b.n - 1, j + kd);
    for (Eigen::Index i = j; i <= imax; ++i) {
      const Eigen::Index k0 = std::max({Eigen::Index{0}, i - b.kd, j - b.kd});
      const Eigen::Index k1 = std::min({b.n - 1, i + b.kd, j + b.kd});
      Complex s = 0.0;
      for (Eigen::Index k = k0; k <= k1; ++k) s += band_entry(b, i, k) * band_entry(b, k, j);
      c.band(i - j, j) = s;
    }
    c.band(0, j) += 1.0;
  }
  return c;
}

void band_cholesky_in_place(HermBand& c) {
  for (Eigen::Index j = 0; j < c.n; ++j) {
    double ajj = c.band(0, j).real();
    const Eigen::Index k0 = std::max(Eigen::Index{0}, j - c.kd);
    for (Eigen::Index k = k0; k < j; ++k) ajj -= std::norm(c.band(j - k, k));
    if (!(ajj > 0.0)) throw NumericsError("banded Cholesky pivot not positive");
    const double ljj = std::sqrt(ajj);
    c.band(0, j) = ljj;
    const Eigen::Index imax = std::min(c.n - 1, j + c.kd);
    for (Eigen::Index i = j + 1; i <= imax; ++i) {
      Complex s = c.band(i - j, j);
      const Eigen::Index kk0 = std::max({Eigen::Index{0}, i - c.kd, j - c.kd});
      for (Eigen::Index k = kk0; k < j; ++k)
        s -= c.band(i - k, k) * std::conj(c.band(j - k, k));
      c.band(i - j, j) = s / ljj;
    }
  }
}

VectorXc band_cholesky_solve(const HermBand& l, const VectorXc& rhs) {
  const Eigen::Index n = l.n;
  VectorXc y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex s = rhs(i);
    const Eigen::Index k0 = std::max(Eigen::Index{0}, i - l.kd);
    for (Eigen::Index k = k0; k < i; ++k) s -= l.band(i - k, k) * y(k);
    y(i) = s / l.band(0, i);
  }
  VectorXc z(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    Complex s = y(i);
    const Eigen::Index k1 = std::min(n - 1, i + l.kd);
    for (Eigen::Index k = i + 1; k <= k1; ++k) s -= std::conj(l.band(k - i, i)) * z(k);
    z(i) = s / l.band(0, i).real();
  }
  return z;
}

}  // namespace pmsim
