#include "wlra/ghs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wlra {

namespace {
constexpr double kTieTolerance = 1e-10;
}

void validate(const PartitionedInput& in) {
  if (in.a1.size() == 0) throw std::invalid_argument("PartitionedInput: a1 is empty");
  if (in.a1.rows() != in.a2.rows()) {
    throw std::invalid_argument("PartitionedInput: a1 and a2 row counts differ");
  }
  if (!in.a1.allFinite() || !in.a2.allFinite()) {
    throw std::invalid_argument("PartitionedInput: non-finite entries");
  }
  const Index k = in.a1.cols();
  const Index n = k + in.a2.cols();
  const Index cap = std::min(in.a1.rows(), n);
  if (in.rank < k || in.rank > cap) {
    throw std::invalid_argument("PartitionedInput: rank " + std::to_string(in.rank) +
                                " outside [" + std::to_string(k) + ", " + std::to_string(cap) + "]");
  }
}

GhsSolution ghs_solve(const PartitionedInput& in) {
  validate(in);
  const Matrix q = orthonormal_basis(in.a1);  // throws DegeneracyError when rank-deficient
  const Matrix proj = project(q, in.a2);
  const Index rk = in.rank - in.a1.cols();

  GhsSolution out;
  if (rk == 0 || in.a2.cols() == 0) {
    out.a2_estimate = proj;
    return out;
  }

  const Matrix resid = in.a2 - proj;
  const SvdTriple dec = svd(resid);
  const Index s = dec.singular_values.size();
  if (rk < s && dec.singular_values(rk - 1) - dec.singular_values(rk) <= kTieTolerance) {
    out.unique = false;
  }
  const Index keep = std::min(rk, s);
  out.a2_estimate = proj + dec.u.leftCols(keep) *
                               dec.singular_values.head(keep).asDiagonal() *
                               dec.v.leftCols(keep).transpose();
  return out;
}

Matrix svt_shrink(const Matrix& a, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("svt_shrink: tau must be non-negative");
  if (tau == 0.0) return a;
  const SvdTriple dec = svd(a);
  Vector shrunk = (dec.singular_values.array() - tau).max(0.0);
  return dec.u * shrunk.asDiagonal() * dec.v.transpose();
}

double default_svt_tau(Index rows, Index cols) {
  return 5.0 * std::sqrt(static_cast<double>(rows) * static_cast<double>(cols));
}

}  // namespace wlra
