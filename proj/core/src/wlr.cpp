#include "wlra/wlr.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace wlra {

namespace {

constexpr double kRowConditionLimit = 1e12;
constexpr double kPinvCutoff = 1e-12;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_shapes(const Matrix& a1, const Matrix& a2, const BlockWeight& w,
                  const FactorState& s) {
  const Index m = a1.rows(), k = a1.cols(), n2 = a2.cols();
  const Index rk = s.b.cols();
  require(k >= 1, "wlr: a1 must have at least one column");
  require(a2.rows() == m || a2.size() == 0, "wlr: a1 and a2 row counts differ");
  require(w.w1.rows() == m && w.w1.cols() == k, "wlr: weight block must match a1");
  require(s.x1.rows() == m && s.x1.cols() == k, "wlr: x1 shape mismatch");
  require(s.c.rows() == k && s.c.cols() == n2, "wlr: c shape mismatch");
  require(s.b.rows() == m, "wlr: b shape mismatch");
  require(s.d.rows() == rk && s.d.cols() == n2, "wlr: d shape mismatch");
}

// Gram solve with pseudo-inverse fallback when the factorization fails or
// returns non-finite values.
Matrix solve_gram(const Matrix& gram, const Matrix& rhs, SolverWarnings* warn) {
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() == Eigen::Success) {
    Matrix x = llt.solve(rhs);
    if (x.allFinite()) return x;
  }
  if (warn) ++warn->pinv_fallbacks;
  return pinv_solve(gram, rhs, kPinvCutoff);
}

}  // namespace

BlockWeight uniform_weight(Index rows, Index cols, double value) {
  require(value > 0.0, "uniform_weight: value must be positive");
  return BlockWeight{Matrix::Constant(rows, cols, value), value, value};
}

BlockWeight random_weight(Index rows, Index cols, double alpha, double beta,
                          std::mt19937_64& rng) {
  require(alpha > 0.0 && beta >= alpha, "random_weight: need 0 < alpha <= beta");
  std::uniform_real_distribution<double> dist(alpha, beta);
  Matrix w1(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) w1(i, j) = dist(rng);
  }
  return BlockWeight{std::move(w1), alpha, beta};
}

double objective(const Matrix& a1, const Matrix& a2, const BlockWeight& w,
                 const FactorState& s) {
  check_shapes(a1, a2, w, s);
  const double weighted = (a1 - s.x1).cwiseProduct(w.w1).squaredNorm();
  if (a2.cols() == 0) return weighted;
  const Matrix x2 = s.x1 * s.c + s.b * s.d;
  return weighted + (a2 - x2).squaredNorm();
}

Matrix update_x1(const Matrix& a1, const Matrix& a2, const BlockWeight& w,
                 const FactorState& s, SolverWarnings* warn) {
  check_shapes(a1, a2, w, s);
  const Index m = a1.rows(), k = a1.cols();

  const Matrix w2 = w.w1.cwiseProduct(w.w1);
  Matrix e = a1.cwiseProduct(w2);
  if (a2.cols() > 0) e += (a2 - s.b * s.d) * s.c.transpose();

  const Matrix gram = s.c * s.c.transpose();  // shared across rows
  const double gram_trace = gram.trace();

  Matrix x1(m, k);
  std::atomic<int> pinv_rows{0};
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < m; ++i) {
    Matrix mi = gram;
    mi.diagonal() += w2.row(i).transpose();
    const Vector rhs = e.row(i).transpose();
    // lambda_min(mi) >= min w^2 because the Gram part is positive
    // semi-definite, so this bounds the condition number from above.
    const double wmin = w2.row(i).minCoeff();
    const double wmax = w2.row(i).maxCoeff();
    const double cond_bound = (gram_trace + wmax) / wmin;
    Vector xi;
    bool used_pinv = false;
    if (wmin > 0.0 && cond_bound < kRowConditionLimit) {
      Eigen::LLT<Matrix> llt(mi);
      if (llt.info() == Eigen::Success) {
        xi = llt.solve(rhs);
        if (!xi.allFinite()) used_pinv = true;
      } else {
        used_pinv = true;
      }
    } else {
      used_pinv = true;
    }
    if (used_pinv) {
      xi = pinv_solve(mi, rhs, kPinvCutoff);
      pinv_rows.fetch_add(1, std::memory_order_relaxed);
    }
    x1.row(i) = xi.transpose();
  }
  if (warn) warn->ill_conditioned_rows += pinv_rows.load();
  return x1;
}

Matrix update_c(const Matrix& a2, const FactorState& s, SolverWarnings* warn) {
  const Index k = s.x1.cols(), n2 = a2.cols();
  if (n2 == 0) return Matrix(k, 0);
  const Matrix resid = a2 - s.b * s.d;
  const Matrix gram = s.x1.transpose() * s.x1;
  return solve_gram(gram, s.x1.transpose() * resid, warn);
}

Matrix update_b(const Matrix& a2, const FactorState& s, SolverWarnings* warn) {
  const Index m = s.x1.rows(), rk = s.b.cols();
  if (rk == 0 || a2.cols() == 0) return Matrix(m, rk);
  const Matrix resid = a2 - s.x1 * s.c;
  const Matrix gram = s.d * s.d.transpose();
  // b = resid dᵀ (d dᵀ)^{-1}, solved transposed so the Gram sits on the left.
  return solve_gram(gram, (resid * s.d.transpose()).transpose(), warn).transpose();
}

Matrix update_d(const Matrix& a2, const FactorState& s, SolverWarnings* warn) {
  const Index rk = s.b.cols(), n2 = a2.cols();
  if (rk == 0 || n2 == 0) return Matrix(rk, n2);
  const Matrix resid = a2 - s.x1 * s.c;
  const Matrix gram = s.b.transpose() * s.b;
  return solve_gram(gram, s.b.transpose() * resid, warn);
}

FactorState auto_init(const Matrix& a1, const Matrix& a2, Index r) {
  const Index m = a1.rows(), k = a1.cols(), n2 = a2.cols();
  const Index rk = r - k;
  FactorState s;
  s.x1 = a1;
  if (n2 == 0) {
    s.c = Matrix(k, 0);
    s.b = Matrix(m, rk);
    s.d = Matrix(rk, 0);
    return s;
  }
  const Matrix gram = a1.transpose() * a1;
  s.c = solve_gram(gram, a1.transpose() * a2, nullptr);
  if (rk == 0) {
    s.b = Matrix(m, 0);
    s.d = Matrix(0, n2);
    return s;
  }
  const Matrix resid = a2 - a1 * s.c;
  const SvdTriple dec = svd(resid);
  s.b = dec.u.leftCols(rk) * dec.singular_values.head(rk).asDiagonal();
  s.d = dec.v.leftCols(rk).transpose();
  return s;
}

FactorState random_init(Index m, Index k, Index n2, Index r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  auto fill = [&](Index rows, Index cols) {
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) out(i, j) = dist(rng);
    }
    return out;
  };
  FactorState s;
  s.x1 = fill(m, k);
  s.c = fill(k, n2);
  s.b = fill(m, r - k);
  s.d = fill(r - k, n2);
  return s;
}

SolveResult solve(const Matrix& a1, const Matrix& a2, const BlockWeight& w,
                  Index r, const SolveOptions& opts) {
  const Index m = a1.rows(), k = a1.cols(), n2 = a2.cols();
  require(opts.eps > 0.0, "solve: eps must be positive");
  require(opts.max_iter >= 1, "solve: max_iter must be at least 1");
  require(r >= k && r <= std::min(m, k + n2),
          "solve: rank must satisfy k <= r <= min(m, n)");
  require(w.alpha > 0.0 && w.beta >= w.alpha, "solve: need 0 < alpha <= beta");
  require((w.w1.array() >= w.alpha).all() && (w.w1.array() <= w.beta).all(),
          "solve: weight entries must lie in [alpha, beta]");

  FactorState s;
  if (opts.init) {
    s = *opts.init;
  } else if (opts.random_init_seed) {
    s = random_init(m, k, n2, r, *opts.random_init_seed);
  } else {
    s = auto_init(a1, a2, r);
  }
  check_shapes(a1, a2, w, s);
  require(s.b.cols() == r - k, "solve: init factor rank does not match r");

  SolveResult out;
  SolveReport& rep = out.report;
  double m_prev = objective(a1, a2, w, s);
  rep.objective_trace.push_back(m_prev);

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const FactorState prev = s;
    s.x1 = update_x1(a1, a2, w, s, &rep.warnings);
    s.c = update_c(a2, s, &rep.warnings);
    s.b = update_b(a2, s, &rep.warnings);
    s.d = update_d(a2, s, &rep.warnings);

    const double m_new = objective(a1, a2, w, s);
    if (!std::isfinite(m_new)) {
      throw DivergenceError("solve: objective became non-finite at iteration " +
                                std::to_string(iter + 1),
                            iter + 1);
    }
    const double decrease = m_prev - m_new;

    // Exact decrease identity: the drop must equal the five update terms.
    const Matrix dx1 = prev.x1 - s.x1;
    const double t1 = dx1.cwiseProduct(w.w1).squaredNorm();
    double five = t1;
    five += (dx1 * prev.c).squaredNorm();
    five += (s.x1 * (prev.c - s.c)).squaredNorm();
    five += ((prev.b - s.b) * prev.d).squaredNorm();
    five += (s.b * (prev.d - s.d)).squaredNorm();
    rep.decrease_identity_residuals.push_back(std::abs(decrease - five) /
                                              std::max(1.0, m_prev));
    rep.bd_change_sq.push_back((s.b * s.d - prev.b * prev.d).squaredNorm());
    rep.x1_change_weighted_sq.push_back(t1);
    rep.objective_trace.push_back(m_new);
    rep.sqrt_decrease_partial_sum += std::sqrt(std::max(0.0, decrease));
    rep.iterations = iter + 1;

    const bool done = decrease / std::max(1.0, m_prev) < opts.eps;
    m_prev = m_new;
    if (done) {
      rep.converged = true;
      break;
    }
  }

  out.state = std::move(s);
  return out;
}

void write_trace_csv(const SolveReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_trace_csv: cannot open " + path);
  os << "iteration,objective,decrease,identity_residual\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "0,%.12g,,\n", report.objective_trace.empty()
                                                     ? 0.0
                                                     : report.objective_trace.front());
  os << buf;
  for (int p = 0; p < report.iterations; ++p) {
    const double before = report.objective_trace[p];
    const double after = report.objective_trace[p + 1];
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g\n", p + 1, after,
                  before - after, report.decrease_identity_residuals[p]);
    os << buf;
  }
}

}  // namespace wlra
