#pragma once

#include "wlra/matrix.hpp"
#include "wlra/wlr.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wlra {

// Sorted, distinct column indices.
using IndexSet = std::vector<Index>;

struct BgParams {
  int i1 = 2;          // batch prior-count divisor: k = ceil(|S| / i1)
  int i2 = 1;          // batch rank increment: r = k + i2
  int ir = 1;          // incremental rank increment
  int k_max = 10;      // cap on prior columns per incremental step
  double eps = 1e-7;   // solver threshold
  int max_iter = 500;
  double alpha = 500.0;  // weight interval bounds
  double beta = 1000.0;
  double tau = -1.0;     // SVT shrinkage; <= 0 picks default_svt_tau of the first batch
  int p = 1;             // batch count for the incremental pipeline
  std::uint64_t seed = 0;
  Index init_rank = 1;   // PCA split rank for the batch pipeline
  std::optional<double> eps1;  // override for the learned binarization threshold
  enum class PriorSource { data, background } prior_source = PriorSource::data;
};

void validate(const BgParams& params);

// background + foreground = input exactly; the background block has numerical
// rank at most the rank the pipeline solved with.
struct Decomposition {
  Matrix background;
  Matrix foreground;
};

struct BatchDiagnostics {
  int batch = 0;
  IndexSet prior_columns;  // frame indices of the weighted block
  Index k = 0;
  Index r = 0;
  int iterations = 0;
  bool converged = false;
  double final_objective = 0;
  std::vector<double> objective_trace;
  bool k_max_clamped = false;
};

struct BgResult {
  Decomposition parts;
  double foreground_threshold = 0;  // learned denoising level for |foreground|
  std::vector<BatchDiagnostics> batches;
  bool converged = true;
};

// Two-class threshold (64-bin Otsu) over the entry magnitudes.
double otsu_threshold(const Matrix& values, int bins = 64);

// Ratio heuristic: binarize |f_in| at the learned threshold, binarize b_in at
// zero, and score each column by binary-foreground count over binary-background
// count. Columns scoring below the mode of the ratios are background.
// All-zero f_in marks every column; an empty cut falls back to the minimum.
IndexSet learn_bg_indices(const Matrix& b_in, const Matrix& f_in,
                          std::optional<double> eps1 = {});

// The up-to-k_max lowest-ratio columns of a_prev relative to background b
// (at least one).
IndexSet score_columns(const Matrix& a_prev, const Matrix& b, Index k_max,
                       std::optional<double> eps1 = {});

// Batch pipeline: PCA split, learn background indices, move k of them into the
// weighted block, run the weighted solve, and restore the column order.
BgResult batch_background(const Matrix& a, const BgParams& params);

// Batch-incremental pipeline: SVT-initialize on the first batch, then walk the
// batches carrying the freshest background estimate as the weighted prior.
BgResult incremental_background(const Matrix& a, const BgParams& params);

// Zeroes foreground entries with magnitude <= eps1.
Matrix threshold_foreground(const Matrix& f, double eps1);

// One row per batch: batch,k,r,iterations,converged,final_objective,
// prior_columns (';'-joined), objective_trace (';'-joined).
void write_diagnostics_csv(const BgResult& result, const std::string& path);

}  // namespace wlra
