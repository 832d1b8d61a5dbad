#include "wlra/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace wlra {

namespace {

constexpr double kC1 = (0.01 * kMaxPixel) * (0.01 * kMaxPixel);
constexpr double kC2 = (0.03 * kMaxPixel) * (0.03 * kMaxPixel);

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_pair(const Matrix& g, const Matrix& r) {
  require(g.rows() == r.rows() && g.cols() == r.cols(), "metrics: image shapes differ");
  require(g.size() > 0, "metrics: empty image");
}

// Valid-region separable convolution with a unit-sum window.
Matrix valid_filter(const Matrix& img, const Vector& win) {
  const Index ws = win.size();
  const Index h = img.rows(), w = img.cols();
  Matrix cols(h, w - ws + 1);
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x + ws <= w; ++x) {
      double acc = 0.0;
      for (Index t = 0; t < ws; ++t) acc += win(t) * img(y, x + t);
      cols(y, x) = acc;
    }
  }
  Matrix out(h - ws + 1, w - ws + 1);
  for (Index x = 0; x < cols.cols(); ++x) {
    for (Index y = 0; y + ws <= h; ++y) {
      double acc = 0.0;
      for (Index t = 0; t < ws; ++t) acc += win(t) * cols(y + t, x);
      out(y, x) = acc;
    }
  }
  return out;
}

struct SsimStats {
  Matrix luminance;          // (2 mu1 mu2 + C1) / (mu1^2 + mu2^2 + C1)
  Matrix contrast_structure; // (2 s12 + C2) / (s1 + s2 + C2)
};

SsimStats ssim_stats(const Matrix& g, const Matrix& r, int window, double sigma) {
  const Vector win = gaussian_window(window, sigma);
  const Matrix mu1 = valid_filter(g, win);
  const Matrix mu2 = valid_filter(r, win);
  const Matrix s1 = valid_filter(g.cwiseProduct(g), win) - mu1.cwiseProduct(mu1);
  const Matrix s2 = valid_filter(r.cwiseProduct(r), win) - mu2.cwiseProduct(mu2);
  const Matrix s12 = valid_filter(g.cwiseProduct(r), win) - mu1.cwiseProduct(mu2);

  SsimStats st;
  st.luminance = (2.0 * mu1.cwiseProduct(mu2).array() + kC1) /
                 (mu1.array().square() + mu2.array().square() + kC1);
  st.contrast_structure = (2.0 * s12.array() + kC2) / (s1.array() + s2.array() + kC2);
  return st;
}

// 2x2 block average; trailing odd row/column is dropped.
Matrix downsample2(const Matrix& img) {
  const Index h = img.rows() / 2, w = img.cols() / 2;
  Matrix out(h, w);
  for (Index y = 0; y < h; ++y) {
    for (Index x = 0; x < w; ++x) {
      out(y, x) = 0.25 * (img(2 * y, 2 * x) + img(2 * y + 1, 2 * x) +
                          img(2 * y, 2 * x + 1) + img(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

const char* fmt(double v, char* buf, std::size_t n) {
  if (std::isnan(v)) return "undefined";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::snprintf(buf, n, "%.12g", v);
  return buf;
}

}  // namespace

Vector gaussian_window(int size, double sigma) {
  require(size >= 1 && size % 2 == 1, "gaussian_window: size must be odd and positive");
  require(sigma > 0.0, "gaussian_window: sigma must be positive");
  Vector win(size);
  const double c = (size - 1) / 2.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    win(i) = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return win / win.sum();
}

double psnr(const Matrix& g, const Matrix& r) {
  check_pair(g, r);
  const double mse = (g - r).squaredNorm() / static_cast<double>(g.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(kMaxPixel * kMaxPixel / mse);
}

Matrix ssim_map(const Matrix& g, const Matrix& r, int window, double sigma) {
  check_pair(g, r);
  require(g.rows() >= window && g.cols() >= window,
          "ssim_map: image smaller than the " + std::to_string(window) + "x" +
              std::to_string(window) + " window");
  const SsimStats st = ssim_stats(g, r, window, sigma);
  Matrix map = st.luminance.cwiseProduct(st.contrast_structure);
  // Exact arithmetic keeps the map in [-1, 1]; clamp rounding excursions.
  return map.cwiseMax(-1.0).cwiseMin(1.0);
}

double mssim(const Matrix& g, const Matrix& r, int window, double sigma) {
  return ssim_map(g, r, window, sigma).mean();
}

double msssim(const Matrix& g, const Matrix& r, int window, double sigma, int scales) {
  check_pair(g, r);
  require(scales >= 1, "msssim: scales must be positive");
  // Standard 5-scale exponents; truncated and renormalized for fewer scales.
  static constexpr double kExponents[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  require(scales <= 5, "msssim: at most 5 scales supported");

  Index h = g.rows(), w = g.cols();
  for (int j = 1; j < scales; ++j) {
    h /= 2;
    w /= 2;
  }
  if (h < window || w < window) {
    const long need = static_cast<long>(window) << (scales - 1);
    throw std::invalid_argument("msssim: image too small; need at least " +
                                std::to_string(need) + "x" + std::to_string(need) +
                                " for " + std::to_string(scales) + " scales with a " +
                                std::to_string(window) + "-pixel window");
  }

  Matrix cur_g = g, cur_r = r;
  double result = 1.0;
  for (int j = 0; j < scales; ++j) {
    const SsimStats st = ssim_stats(cur_g, cur_r, window, sigma);
    const double cs = std::max(st.contrast_structure.mean(), 0.0);
    result *= std::pow(cs, kExponents[j]);
    if (j == scales - 1) {
      const double lum = std::max(st.luminance.mean(), 0.0);
      result *= std::pow(lum, kExponents[j]);
    } else {
      cur_g = downsample2(cur_g);
      cur_r = downsample2(cur_r);
    }
  }
  return result;
}

RocCurve roc(const Matrix& gt, const Matrix& recovered, int n_thresholds) {
  check_pair(gt, recovered);
  require(n_thresholds >= 2, "roc: need at least two thresholds");

  long positives = 0, negatives = 0;
  for (Index i = 0; i < gt.size(); ++i) {
    (gt.reshaped()(i) != 0.0 ? positives : negatives)++;
  }

  RocCurve curve;
  curve.degenerate = (positives == 0 || negatives == 0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  curve.points.reserve(n_thresholds);
  for (int t = 0; t < n_thresholds; ++t) {
    const double thresh = kMaxPixel * t / (n_thresholds - 1);
    long tp = 0, fp = 0;
    for (Index i = 0; i < gt.size(); ++i) {
      if (std::abs(recovered.reshaped()(i)) > thresh) {
        (gt.reshaped()(i) != 0.0 ? tp : fp)++;
      }
    }
    RocPoint pt;
    pt.threshold = thresh;
    pt.tpr = positives > 0 ? static_cast<double>(tp) / positives : nan;
    pt.fpr = negatives > 0 ? static_cast<double>(fp) / negatives : nan;
    curve.points.push_back(pt);
  }
  return curve;
}

double auc(const RocCurve& curve) {
  if (curve.degenerate || curve.points.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::vector<std::pair<double, double>> pts;  // (fpr, tpr)
  pts.reserve(curve.points.size() + 2);
  pts.emplace_back(0.0, 0.0);
  for (const RocPoint& p : curve.points) pts.emplace_back(p.fpr, p.tpr);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  }
  return area;
}

void write_metrics_report(const std::vector<FrameMetrics>& frames,
                          const RocCurve* curve, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_metrics_report: cannot open " + path);
  char b1[64], b2[64], b3[64];
  os << "frame,psnr,mssim,msssim\n";
  FrameMetrics agg;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameMetrics& f = frames[i];
    os << i << "," << fmt(f.psnr, b1, sizeof(b1)) << "," << fmt(f.mssim, b2, sizeof(b2))
       << "," << fmt(f.msssim, b3, sizeof(b3)) << "\n";
    agg.psnr += f.psnr;
    agg.mssim += f.mssim;
    agg.msssim += f.msssim;
  }
  if (!frames.empty()) {
    const double n = static_cast<double>(frames.size());
    os << "aggregate," << fmt(agg.psnr / n, b1, sizeof(b1)) << ","
       << fmt(agg.mssim / n, b2, sizeof(b2)) << "," << fmt(agg.msssim / n, b3, sizeof(b3))
       << "\n";
  }
  if (curve != nullptr) {
    os << "\nthreshold,fpr,tpr\n";
    for (const RocPoint& p : curve->points) {
      os << fmt(p.threshold, b1, sizeof(b1)) << "," << fmt(p.fpr, b2, sizeof(b2)) << ","
         << fmt(p.tpr, b3, sizeof(b3)) << "\n";
    }
    os << "auc," << fmt(auc(*curve), b1, sizeof(b1)) << ",\n";
  }
}

}  // namespace wlra
