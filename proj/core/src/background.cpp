#include "wlra/background.hpp"

#include "wlra/ghs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

namespace wlra {

namespace {

struct ColumnScores {
  std::vector<double> ratios;
  double eps1 = 0;
  bool all_zero = false;  // no foreground anywhere
};

// Foreground-area proxy per column: count of binarized-foreground pixels over
// count of binarized-background pixels.
ColumnScores column_scores(const Matrix& b_in, const Matrix& f_in,
                           std::optional<double> eps1_override) {
  if (b_in.rows() != f_in.rows() || b_in.cols() != f_in.cols()) {
    throw std::invalid_argument("column scores: shapes differ");
  }
  ColumnScores out;
  const Matrix abs_f = f_in.cwiseAbs();
  if (abs_f.maxCoeff() == 0.0) {
    out.all_zero = true;
    out.ratios.assign(static_cast<std::size_t>(f_in.cols()), 0.0);
    return out;
  }
  out.eps1 = eps1_override ? *eps1_override : otsu_threshold(f_in);
  out.ratios.resize(static_cast<std::size_t>(f_in.cols()));
  for (Index j = 0; j < f_in.cols(); ++j) {
    double lf = 0, lb = 0;
    for (Index i = 0; i < f_in.rows(); ++i) {
      if (abs_f(i, j) > out.eps1) lf += 1.0;
      if (b_in(i, j) > 0.0) lb += 1.0;
    }
    out.ratios[static_cast<std::size_t>(j)] = lf / std::max(lb, 1.0);
  }
  return out;
}

// Mode of real-valued ratios: center of the most populated of 10 equal-width
// bins, ties toward the lower bin.
double ratio_mode(const std::vector<double>& ratios) {
  const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
  const double lo = *mn, hi = *mx;
  if (hi == lo) return lo;
  constexpr int kBins = 10;
  int counts[kBins] = {0};
  for (double v : ratios) {
    int bin = static_cast<int>((v - lo) / (hi - lo) * kBins);
    counts[std::clamp(bin, 0, kBins - 1)]++;
  }
  const int best = static_cast<int>(std::max_element(counts, counts + kBins) - counts);
  return lo + (best + 0.5) * (hi - lo) / kBins;
}

IndexSet below_mode(const std::vector<double>& ratios) {
  const double mode = ratio_mode(ratios);
  IndexSet s;
  for (std::size_t j = 0; j < ratios.size(); ++j) {
    if (ratios[j] < mode) s.push_back(static_cast<Index>(j));
  }
  if (s.empty()) {
    const auto mn = std::min_element(ratios.begin(), ratios.end());
    s.push_back(static_cast<Index>(mn - ratios.begin()));
  }
  return s;
}

Matrix columns_at(const Matrix& a, const IndexSet& idx) {
  Matrix out(a.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = a.col(idx[j]);
  return out;
}

BatchDiagnostics make_diagnostics(int batch, const IndexSet& prior, Index k, Index r,
                                  const SolveReport& rep) {
  BatchDiagnostics d;
  d.batch = batch;
  d.prior_columns = prior;
  d.k = k;
  d.r = r;
  d.iterations = rep.iterations;
  d.converged = rep.converged;
  d.final_objective = rep.objective_trace.back();
  d.objective_trace = rep.objective_trace;
  return d;
}

}  // namespace

void validate(const BgParams& params) {
  if (!(params.alpha > 0.0) || !(params.beta >= params.alpha)) {
    throw std::invalid_argument("BgParams: need 0 < alpha <= beta");
  }
  if (params.p < 1) throw std::invalid_argument("BgParams: p must be at least 1");
  if (params.k_max < 1) throw std::invalid_argument("BgParams: k_max must be at least 1");
  if (params.i1 < 1) throw std::invalid_argument("BgParams: i1 must be at least 1");
  if (params.i2 < 0 || params.ir < 0) {
    throw std::invalid_argument("BgParams: rank increments must be non-negative");
  }
  if (!(params.eps > 0.0)) throw std::invalid_argument("BgParams: eps must be positive");
  if (params.init_rank < 1) throw std::invalid_argument("BgParams: init_rank must be at least 1");
}

double otsu_threshold(const Matrix& values, int bins) {
  if (values.size() == 0) throw std::invalid_argument("otsu_threshold: empty input");
  if (bins < 2) throw std::invalid_argument("otsu_threshold: need at least 2 bins");
  const Matrix mag = values.cwiseAbs();
  const double hi = mag.maxCoeff();
  if (hi == 0.0) return 0.0;

  std::vector<long> hist(static_cast<std::size_t>(bins), 0);
  for (Index i = 0; i < mag.size(); ++i) {
    int bin = static_cast<int>(mag.reshaped()(i) / hi * bins);
    hist[static_cast<std::size_t>(std::clamp(bin, 0, bins - 1))]++;
  }

  const double total = static_cast<double>(mag.size());
  double total_mean = 0;
  for (int b = 0; b < bins; ++b) total_mean += (b + 0.5) * static_cast<double>(hist[b]);
  total_mean /= total;

  double w0 = 0, sum0 = 0, best_var = -1.0;
  int best_split = 0;
  for (int split = 0; split < bins - 1; ++split) {
    w0 += static_cast<double>(hist[split]) / total;
    sum0 += (split + 0.5) * static_cast<double>(hist[split]) / total;
    const double w1 = 1.0 - w0;
    if (w0 <= 0.0 || w1 <= 0.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (total_mean - sum0) / w1;
    const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (var > best_var) {
      best_var = var;
      best_split = split;
    }
  }
  return (best_split + 1) * hi / bins;
}

IndexSet learn_bg_indices(const Matrix& b_in, const Matrix& f_in,
                          std::optional<double> eps1) {
  const ColumnScores sc = column_scores(b_in, f_in, eps1);
  if (sc.all_zero) {
    IndexSet all(static_cast<std::size_t>(f_in.cols()));
    std::iota(all.begin(), all.end(), Index{0});
    return all;
  }
  return below_mode(sc.ratios);
}

IndexSet score_columns(const Matrix& a_prev, const Matrix& b, Index k_max,
                       std::optional<double> eps1) {
  if (k_max < 1) throw std::invalid_argument("score_columns: k_max must be at least 1");
  const Matrix f = a_prev - b;
  const ColumnScores sc = column_scores(b, f, eps1);
  IndexSet candidates;
  if (sc.all_zero) {
    candidates.resize(static_cast<std::size_t>(f.cols()));
    std::iota(candidates.begin(), candidates.end(), Index{0});
  } else {
    candidates = below_mode(sc.ratios);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](Index a, Index c) {
    return sc.ratios[static_cast<std::size_t>(a)] < sc.ratios[static_cast<std::size_t>(c)];
  });
  if (static_cast<Index>(candidates.size()) > k_max) {
    candidates.resize(static_cast<std::size_t>(k_max));
  }
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

Matrix threshold_foreground(const Matrix& f, double eps1) {
  return (f.cwiseAbs().array() > eps1).select(f, Matrix::Zero(f.rows(), f.cols()));
}

BgResult batch_background(const Matrix& a, const BgParams& params) {
  validate(params);
  const Index m = a.rows(), n = a.cols();
  if (n < 2) throw std::invalid_argument("batch_background: need at least 2 frames");

  // Coarse PCA split, then learn likely-background frame indices from it.
  const Matrix b_in = hard_threshold(a, std::min(params.init_rank, std::min(m, n)));
  const Matrix f_in = a - b_in;
  const ColumnScores sc = column_scores(b_in, f_in, params.eps1);
  IndexSet learned;
  if (sc.all_zero) {
    learned.resize(static_cast<std::size_t>(n));
    std::iota(learned.begin(), learned.end(), Index{0});
  } else {
    learned = below_mode(sc.ratios);
  }

  const Index k = (static_cast<Index>(learned.size()) + params.i1 - 1) / params.i1;
  if (k >= n) {
    throw std::invalid_argument("batch_background: k = " + std::to_string(k) +
                                " leaves no free columns (n = " + std::to_string(n) + ")");
  }
  const Index r = k + params.i2;
  if (r > std::min(m, n)) {
    throw std::invalid_argument("batch_background: rank " + std::to_string(r) +
                                " exceeds min(m, n)");
  }

  std::mt19937_64 rng(params.seed);
  IndexSet chosen;
  std::sample(learned.begin(), learned.end(), std::back_inserter(chosen),
              static_cast<std::size_t>(k), rng);

  std::vector<bool> is_prior(static_cast<std::size_t>(n), false);
  for (Index j : chosen) is_prior[static_cast<std::size_t>(j)] = true;
  IndexSet rest;
  for (Index j = 0; j < n; ++j) {
    if (!is_prior[static_cast<std::size_t>(j)]) rest.push_back(j);
  }

  const Matrix a1 = columns_at(a, chosen);
  const Matrix a2 = columns_at(a, rest);
  const BlockWeight w = random_weight(m, k, params.alpha, params.beta, rng);

  SolveOptions opts;
  opts.eps = params.eps;
  opts.max_iter = params.max_iter;
  const SolveResult sol = solve(a1, a2, w, r, opts);

  // Restore the original column order.
  Matrix background(m, n);
  const Matrix x2 = sol.state.x1 * sol.state.c + sol.state.b * sol.state.d;
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    background.col(chosen[j]) = sol.state.x1.col(static_cast<Index>(j));
  }
  for (std::size_t j = 0; j < rest.size(); ++j) {
    background.col(rest[j]) = x2.col(static_cast<Index>(j));
  }

  BgResult out;
  out.parts.background = background;
  out.parts.foreground = a - background;
  out.foreground_threshold = sc.all_zero ? 0.0 : sc.eps1;
  BatchDiagnostics d = make_diagnostics(0, chosen, k, r, sol.report);
  out.converged = sol.report.converged;
  out.batches.push_back(std::move(d));
  return out;
}

BgResult incremental_background(const Matrix& a, const BgParams& params) {
  validate(params);
  const Index m = a.rows(), n = a.cols();
  const Index width = (n + params.p - 1) / params.p;
  std::vector<std::pair<Index, Index>> batches;  // [begin, end)
  for (Index begin = 0; begin < n; begin += width) {
    batches.emplace_back(begin, std::min(n, begin + width));
  }
  if (static_cast<int>(batches.size()) != params.p) {
    throw std::invalid_argument("incremental_background: cannot split " + std::to_string(n) +
                                " frames into " + std::to_string(params.p) + " batches");
  }
  for (const auto& [b, e] : batches) {
    if (e - b < 2) {
      throw std::invalid_argument("incremental_background: batch of " + std::to_string(e - b) +
                                  " frames is too small");
    }
  }

  const Index n1 = batches.front().second - batches.front().first;
  const double tau = params.tau > 0 ? params.tau : default_svt_tau(m, n1);

  Matrix a_prev = a.middleCols(batches.front().first, n1);
  Matrix b_prev = svt_shrink(a_prev, tau);

  std::mt19937_64 rng(params.seed);
  BgResult out;
  Matrix background(m, n);

  for (int j = 0; j < params.p; ++j) {
    const auto [begin, end] = batches[static_cast<std::size_t>(j)];
    const Index batch_width = end - begin;
    const Matrix a_j = a.middleCols(begin, batch_width);

    Index k_cap = params.k_max;
    bool clamped = false;
    if (k_cap > a_prev.cols()) {
      k_cap = a_prev.cols();
      clamped = true;
    }
    IndexSet s = score_columns(a_prev, b_prev, k_cap, params.eps1);
    if (params.prior_source == BgParams::PriorSource::background) {
      // Background estimates are low rank, so the selected columns can be
      // nearly dependent; keep a well-conditioned independent subset.
      IndexSet keep;
      Matrix basis(m, 0);
      for (Index idx : s) {
        const Vector col = b_prev.col(idx);
        const Vector resid = col - basis * (basis.transpose() * col);
        if (keep.empty() || resid.norm() > 1e-3 * col.norm()) {
          keep.push_back(idx);
          if (resid.norm() > 0) {
            basis.conservativeResize(m, basis.cols() + 1);
            basis.col(basis.cols() - 1) = resid / resid.norm();
          }
        }
      }
      s = std::move(keep);
    }
    const Index k = static_cast<Index>(s.size());
    Index r = k + params.ir;
    if (r > std::min(m, k + batch_width)) {
      r = std::min(m, k + batch_width);
      clamped = true;
    }

    const Matrix& prior = params.prior_source == BgParams::PriorSource::data ? a_prev : b_prev;
    const Matrix a1 = columns_at(prior, s);
    const BlockWeight w = random_weight(m, k, params.alpha, params.beta, rng);

    SolveOptions opts;
    opts.eps = params.eps;
    opts.max_iter = params.max_iter;
    const SolveResult sol = solve(a1, a_j, w, r, opts);

    const Matrix b_j = sol.state.x1 * sol.state.c + sol.state.b * sol.state.d;
    background.middleCols(begin, batch_width) = b_j;

    IndexSet global(s.size());
    const Index prev_begin = j == 0 ? batches.front().first : batches[static_cast<std::size_t>(j - 1)].first;
    for (std::size_t t = 0; t < s.size(); ++t) global[t] = prev_begin + s[t];
    BatchDiagnostics d = make_diagnostics(j, global, k, r, sol.report);
    d.k_max_clamped = clamped;
    out.converged = out.converged && sol.report.converged;
    out.batches.push_back(std::move(d));

    a_prev = a_j;
    b_prev = b_j;
  }

  out.parts.background = background;
  out.parts.foreground = a - background;
  out.foreground_threshold = otsu_threshold(out.parts.foreground);
  return out;
}

void write_diagnostics_csv(const BgResult& result, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_diagnostics_csv: cannot open " + path);
  os << "batch,k,r,iterations,converged,final_objective,prior_columns,objective_trace\n";
  char buf[64];
  for (const BatchDiagnostics& d : result.batches) {
    os << d.batch << "," << d.k << "," << d.r << "," << d.iterations << ","
       << (d.converged ? 1 : 0) << ",";
    std::snprintf(buf, sizeof(buf), "%.12g", d.final_objective);
    os << buf << ",";
    for (std::size_t i = 0; i < d.prior_columns.size(); ++i) {
      os << (i ? ";" : "") << d.prior_columns[i];
    }
    os << ",";
    for (std::size_t i = 0; i < d.objective_trace.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.12g", d.objective_trace[i]);
      os << (i ? ";" : "") << buf;
    }
    os << "\n";
  }
}

}  // namespace wlra
