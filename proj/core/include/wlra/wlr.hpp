#pragma once

#include "wlra/matrix.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace wlra {

// Block weight for the objective |(a1 - x1) . w1|_F^2 + |a2 - x1 c - b d|_F^2.
// Only the first block carries weights; the second block is implicitly
// all-ones. Entries live in [alpha, beta] with alpha > 0.
struct BlockWeight {
  Matrix w1;
  double alpha = 500.0;
  double beta = 1000.0;
};

BlockWeight uniform_weight(Index rows, Index cols, double value);
BlockWeight random_weight(Index rows, Index cols, double alpha, double beta,
                          std::mt19937_64& rng);

// Factor quadruple of the rank-r model (x1 | x1 c + b d):
//   x1: m x k,  c: k x (n-k),  b: m x (r-k),  d: (r-k) x (n-k).
struct FactorState {
  Matrix x1;
  Matrix c;
  Matrix b;
  Matrix d;
};

struct SolverWarnings {
  int pinv_fallbacks = 0;        // singular Gram systems solved by pseudo-inverse
  int ill_conditioned_rows = 0;  // row systems routed through the pseudo-inverse
};

struct SolveOptions {
  double eps = 1e-7;  // stop when (m_p - m_{p+1}) / max(1, m_p) < eps
  int max_iter = 500;
  std::optional<FactorState> init;               // explicit warm start
  std::optional<std::uint64_t> random_init_seed; // seeded random start
};

// Per-solve diagnostics. objective_trace holds m_0 .. m_P and is non-increasing
// up to 1e-9 slack; decrease_identity_residuals holds, per iteration, the
// relative gap between the observed decrease and the five-term update identity.
struct SolveReport {
  std::vector<double> objective_trace;
  std::vector<double> decrease_identity_residuals;
  std::vector<double> bd_change_sq;           // |b_{p+1} d_{p+1} - b_p d_p|_F^2
  std::vector<double> x1_change_weighted_sq;  // |(x1_p - x1_{p+1}) . w1|_F^2
  int iterations = 0;
  bool converged = false;
  SolverWarnings warnings;
  // Running sum of sqrt(m_p - m_{p+1}), reported as a diagnostic only.
  double sqrt_decrease_partial_sum = 0.0;
};

struct SolveResult {
  FactorState state;
  SolveReport report;
};

double objective(const Matrix& a1, const Matrix& a2, const BlockWeight& w,
                 const FactorState& s);

// Exact block minimizers with the other blocks held fixed. update_x1 solves
// one k x k system per row; the rows are independent and run in parallel.
Matrix update_x1(const Matrix& a1, const Matrix& a2, const BlockWeight& w,
                 const FactorState& s, SolverWarnings* warn = nullptr);
Matrix update_c(const Matrix& a2, const FactorState& s, SolverWarnings* warn = nullptr);
Matrix update_b(const Matrix& a2, const FactorState& s, SolverWarnings* warn = nullptr);
Matrix update_d(const Matrix& a2, const FactorState& s, SolverWarnings* warn = nullptr);

// Warm start: x1 = a1, c the least squares fit of a2 onto a1's columns, and
// (b, d) the truncated SVD factors of the remaining residual.
FactorState auto_init(const Matrix& a1, const Matrix& a2, Index r);
FactorState random_init(Index m, Index k, Index n2, Index r, std::uint64_t seed);

// Alternating minimization in the order x1, c, b, d until the relative
// objective decrease falls below opts.eps or opts.max_iter is reached.
// Throws DivergenceError if an iterate turns non-finite.
SolveResult solve(const Matrix& a1, const Matrix& a2, const BlockWeight& w,
                  Index r, const SolveOptions& opts = {});

// Trace rows: iteration, objective, decrease, identity residual.
void write_trace_csv(const SolveReport& report, const std::string& path);

}  // namespace wlra
