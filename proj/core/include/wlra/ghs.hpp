#pragma once

#include "wlra/matrix.hpp"

namespace wlra {

// Data matrix split into a preserved block a1 (m x k, full column rank) and a
// free block a2 (m x (n-k)), with a target rank k <= r <= min(m, n).
struct PartitionedInput {
  Matrix a1;
  Matrix a2;
  Index rank = 0;
};

void validate(const PartitionedInput& in);

struct GhsSolution {
  Matrix a2_estimate;  // m x (n-k) block completing (a1 | a2_estimate), rank <= r
  // False when the trailing kept/dropped singular values of the projected
  // residual tie, in which case the minimizer is not unique.
  bool unique = true;
};

// Closed-form solution of the rank-constrained approximation that preserves
// the a1 block exactly: project a2 onto span(a1), then add the best rank
// (r - k) approximation of the orthogonal remainder.
GhsSolution ghs_solve(const PartitionedInput& in);

// One-shot singular value shrinkage: subtract tau from every singular value,
// clamping at zero.
Matrix svt_shrink(const Matrix& a, double tau);

// Shrinkage scale used when none is configured, 5 * sqrt(rows * cols) of the
// block the shrinkage runs on.
double default_svt_tau(Index rows, Index cols);

}  // namespace wlra
