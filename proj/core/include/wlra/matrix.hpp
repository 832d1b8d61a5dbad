#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace wlra {

// Dense row-major matrix of doubles, the carrier type for data, factors and
// weights throughout the library. Entries are expected to be finite; the
// factorization entry points check this.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// A singular value counts as zero when <= kRankCutoff * sigma_max.
inline constexpr double kRankCutoff = 1e-10;

// Input matrix is numerically rank-deficient where full rank is required.
struct DegeneracyError : std::runtime_error {
  DegeneracyError(const std::string& what, Index rank)
      : std::runtime_error(what), numerical_rank(rank) {}
  Index numerical_rank;
};

// An iterative solve produced non-finite values.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, int iter)
      : std::runtime_error(what), iteration(iter) {}
  int iteration;
};

// Malformed file contents (frame I/O, matrix CSV, synth specs).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thin singular value decomposition A = U diag(s) V^T with s = min(rows, cols)
// singular values sorted non-increasing and orthonormal-column factors.
struct SvdTriple {
  Matrix u;
  Vector singular_values;
  Matrix v;
};

SvdTriple svd(const Matrix& a);

// Best rank-r approximation: keep the r largest singular values, zero the rest.
Matrix hard_threshold(const Matrix& a, Index r);

// Orthonormal basis Q of the column space of a1 (QᵀQ = I). Requires a1 to have
// full numerical column rank; throws DegeneracyError otherwise.
Matrix orthonormal_basis(const Matrix& a1);

// Orthogonal projection Q Qᵀ a2 onto span(Q), and its complement a2 - Q Qᵀ a2.
// The two sum to a2 exactly by construction.
Matrix project(const Matrix& q, const Matrix& a2);
Matrix project_orth(const Matrix& q, const Matrix& a2);

// Entrywise product and squared Frobenius norm.
Matrix hadamard(const Matrix& a, const Matrix& w);
double frob_norm_sq(const Matrix& a);

// Number of singular values above rel_cutoff * sigma_max.
Index numerical_rank(const Matrix& a, double rel_cutoff = kRankCutoff);

// Solve m x = rhs through an SVD pseudo-inverse, dropping singular values
// below rel_cutoff * sigma_max. Fallback path for singular Gram systems.
Matrix pinv_solve(const Matrix& m, const Matrix& rhs, double rel_cutoff = 1e-12);

}  // namespace wlra
