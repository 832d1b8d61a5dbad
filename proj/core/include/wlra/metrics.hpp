#pragma once

#include "wlra/matrix.hpp"

#include <string>
#include <vector>

namespace wlra {

// 8-bit grayscale dynamic range.
inline constexpr double kMaxPixel = 255.0;

// Peak signal-to-noise ratio in dB; +infinity when the images are identical.
double psnr(const Matrix& g, const Matrix& r);

// Local structural similarity over a Gaussian window (valid region only, so
// the map is (h - window + 1) x (w - window + 1)). Entries lie in [-1, 1].
Matrix ssim_map(const Matrix& g, const Matrix& r, int window = 11, double sigma = 1.5);

// Mean of the SSIM map.
double mssim(const Matrix& g, const Matrix& r, int window = 11, double sigma = 1.5);

// Multi-scale SSIM over dyadic downsamplings: contrast/structure at every
// scale, luminance at the coarsest, combined with the standard exponents.
double msssim(const Matrix& g, const Matrix& r, int window = 11, double sigma = 1.5,
              int scales = 5);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;  // one per threshold, sorted by threshold
  bool degenerate = false;       // ground truth had only one class
};

// Pixel-wise ROC: binarize |recovered| > t over a uniform threshold grid on
// [0, 255] and accumulate the confusion matrix over every entry. Ground-truth
// entries are positive when nonzero.
RocCurve roc(const Matrix& gt, const Matrix& recovered, int n_thresholds = 100);

// Trapezoidal area under the curve sorted by FPR, with the conventional
// (0,0) and (1,1) anchors. NaN for degenerate curves.
double auc(const RocCurve& curve);

// Unit-sum 1-D Gaussian window used by the SSIM family.
Vector gaussian_window(int size, double sigma);

// Report rows: frame,psnr,mssim,msssim per frame plus an aggregate row, then
// a threshold,fpr,tpr table and an auc row when a curve is supplied.
// Non-finite values are written as `inf` / `undefined`.
struct FrameMetrics {
  double psnr = 0;
  double mssim = 0;
  double msssim = 0;
};
void write_metrics_report(const std::vector<FrameMetrics>& frames,
                          const RocCurve* curve, const std::string& path);

}  // namespace wlra
