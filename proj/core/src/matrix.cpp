#include "wlra/matrix.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <sstream>

namespace wlra {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::string shape(const Matrix& a) {
  std::ostringstream os;
  os << a.rows() << "x" << a.cols();
  return os.str();
}

}  // namespace

SvdTriple svd(const Matrix& a) {
  require(a.size() > 0, "svd: input matrix is empty");
  require(a.allFinite(), "svd: input matrix has non-finite entries");
  Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) {
    throw std::runtime_error("svd: factorization of " + shape(a) + " matrix did not converge");
  }
  return SvdTriple{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Matrix hard_threshold(const Matrix& a, Index r) {
  const Index s = std::min(a.rows(), a.cols());
  require(r >= 0 && r <= s,
          "hard_threshold: rank " + std::to_string(r) + " out of range for " + shape(a) + " matrix");
  if (r == 0) return Matrix::Zero(a.rows(), a.cols());
  if (r == s) return a;  // full rank keeps every singular value
  const SvdTriple dec = svd(a);
  return dec.u.leftCols(r) * dec.singular_values.head(r).asDiagonal() *
         dec.v.leftCols(r).transpose();
}

Matrix orthonormal_basis(const Matrix& a1) {
  require(a1.size() > 0, "orthonormal_basis: input matrix is empty");
  const SvdTriple dec = svd(a1);
  const double smax = dec.singular_values(0);
  Index rank = 0;
  for (Index i = 0; i < dec.singular_values.size(); ++i) {
    if (dec.singular_values(i) > kRankCutoff * smax) ++rank;
  }
  if (smax == 0.0) rank = 0;
  if (rank < a1.cols()) {
    throw DegeneracyError("orthonormal_basis: " + shape(a1) +
                              " matrix is rank-deficient (numerical rank " +
                              std::to_string(rank) + ")",
                          rank);
  }
  return dec.u.leftCols(a1.cols());
}

Matrix project(const Matrix& q, const Matrix& a2) {
  require(q.rows() == a2.rows(),
          "project: row counts differ (" + shape(q) + " vs " + shape(a2) + ")");
  return q * (q.transpose() * a2);
}

Matrix project_orth(const Matrix& q, const Matrix& a2) {
  return a2 - project(q, a2);
}

Matrix hadamard(const Matrix& a, const Matrix& w) {
  require(a.rows() == w.rows() && a.cols() == w.cols(),
          "hadamard: shapes differ (" + shape(a) + " vs " + shape(w) + ")");
  return a.cwiseProduct(w);
}

double frob_norm_sq(const Matrix& a) { return a.squaredNorm(); }

Index numerical_rank(const Matrix& a, double rel_cutoff) {
  if (a.size() == 0) return 0;
  const SvdTriple dec = svd(a);
  const double smax = dec.singular_values(0);
  if (smax == 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < dec.singular_values.size(); ++i) {
    if (dec.singular_values(i) > rel_cutoff * smax) ++rank;
  }
  return rank;
}

Matrix pinv_solve(const Matrix& m, const Matrix& rhs, double rel_cutoff) {
  require(m.rows() == rhs.rows(), "pinv_solve: dimension mismatch");
  Eigen::JacobiSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = dec.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_cutoff * smax && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  return dec.matrixV() * inv.asDiagonal() * (dec.matrixU().transpose() * rhs);
}

}  // namespace wlra
