#include "wlra/background.hpp"

#include "wlra/frames.hpp"
#include "wlra/ghs.hpp"
#include "wlra/metrics.hpp"
#include "wlra/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace wlra;

namespace {

// Standard 60-frame desk scene: static background, moderate noise, one box
// crossing the middle frames so every batch of 20 still sees clean frames.
SynthSpec standard_scene() {
  SynthSpec spec;
  spec.height = 48;
  spec.width = 64;
  spec.n_frames = 60;
  spec.kind = BackgroundKind::constant;
  spec.p0 = 120.0;
  spec.noise_sigma = 1.0;
  spec.seed = 7;
  BoxEvent ev;
  ev.x = 4;
  ev.y = 10;
  ev.box_width = 12;
  ev.box_height = 10;
  ev.amplitude = 80.0;
  ev.from = 25;
  ev.to = 50;
  ev.dx = 1.0;
  ev.dy = 0.3;
  spec.events.push_back(ev);
  return spec;
}

double min_frame_mssim(const SynthVideo& video, const Matrix& background) {
  double worst = 1.0;
  for (Index t = 0; t < video.frames.frames(); ++t) {
    const Matrix truth = frame_image(video.background, t);
    const Matrix got = unvectorize(background.col(t).cwiseMax(0.0).cwiseMin(255.0),
                                   video.frames.height, video.frames.width);
    worst = std::min(worst, mssim(truth, got));
  }
  return worst;
}

double tail_box_deviation(const SynthVideo& video, const Matrix& background, Index from) {
  double worst = 0.0;
  for (Index t = from; t < video.frames.frames(); ++t) {
    for (Index i = 0; i < video.frames.pixels(); ++i) {
      if (video.masks.data(i, t) > 0.0) {
        worst = std::max(worst,
                         std::abs(background(i, t) - video.background.data(i, t)));
      }
    }
  }
  return worst;
}

}  // namespace

TEST_SUITE_BEGIN("background");

TEST_CASE("otsu threshold splits a bimodal magnitude histogram") {
  Matrix values(1, 100);
  for (Index j = 0; j < 100; ++j) values(0, j) = j < 80 ? 2.0 : 200.0;
  const double t = otsu_threshold(values);
  CHECK(t > 2.0);
  CHECK(t < 200.0);
  CHECK(otsu_threshold(Matrix::Zero(3, 3)) == 0.0);
}

TEST_CASE("learn_bg_indices marks everything when there is no foreground") {
  const Matrix b = Matrix::Constant(30, 8, 100.0);
  const IndexSet s = learn_bg_indices(b, Matrix::Zero(30, 8));
  REQUIRE(s.size() == 8);
  CHECK(s.front() == 0);
  CHECK(s.back() == 7);
}

TEST_CASE("learn_bg_indices finds the clean half of a synthetic split") {
  // Frames 0..9 carry no foreground; frames 10..19 carry a 20%-area box of
  // amplitude 200 on top of noise-scale residuals.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Index m = 400, n = 20;
  const Matrix b_in = Matrix::Constant(m, n, 120.0);
  Matrix f_in(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) {
      f_in(i, j) = noise(rng);
      if (j >= 10 && i < m / 5) f_in(i, j) += 200.0;
    }
  }
  const IndexSet s = learn_bg_indices(b_in, f_in);
  REQUIRE_FALSE(s.empty());
  for (Index j : s) CHECK(j < 10);
}

TEST_CASE("a single foreground spike is excluded") {
  const Index m = 200, n = 12;
  const Matrix b_in = Matrix::Constant(m, n, 90.0);
  Matrix f_in = Matrix::Zero(m, n);
  for (Index i = 0; i < 60; ++i) f_in(i, 5) = 220.0;
  const IndexSet s = learn_bg_indices(b_in, f_in);
  REQUIRE_FALSE(s.empty());
  for (Index j : s) CHECK(j != 5);
}

TEST_CASE("score_columns caps ties at k_max and keeps order") {
  const Matrix b = Matrix::Constant(50, 9, 75.0);

  SUBCASE("all identical columns") {
    const IndexSet s = score_columns(b, b, 4);
    REQUIRE(s.size() == 4);
    CHECK(s == IndexSet{0, 1, 2, 3});
    CHECK(score_columns(b, b, 20).size() == 9);
  }
  SUBCASE("the one clean column ranks first") {
    Matrix a = b;
    for (Index j = 0; j < 9; ++j) {
      if (j == 6) continue;
      for (Index i = 0; i < 20 + j; ++i) a(i, j) += 150.0;
    }
    const IndexSet s = score_columns(a, b, 1);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == 6);
  }
}

TEST_CASE("batch pipeline reproduces a static scene") {
  Vector base(200);
  for (Index i = 0; i < 200; ++i) base(i) = 40.0 + (i % 160);
  const Matrix a = base * Eigen::RowVectorXd::Ones(12);

  BgParams params;
  params.seed = 2;
  const BgResult res = batch_background(a, params);
  CHECK((res.parts.background - a).norm() <= 1e-6 * a.norm());
  CHECK(res.parts.foreground.norm() <= 1e-6 * a.norm());
  CHECK(res.converged);

  // Exact additive split and the declared rank bound.
  CHECK((res.parts.background + res.parts.foreground - a).cwiseAbs().maxCoeff() <
        1e-10 * a.norm());
  CHECK(numerical_rank(res.parts.background, 1e-8) <= res.batches[0].r);
}

TEST_CASE("batch pipeline rejects a weighted block that covers everything") {
  const Matrix a = Matrix::Constant(40, 6, 90.0) +
                   Vector::LinSpaced(40, 0.0, 1.0) * Eigen::RowVectorXd::Ones(6);
  BgParams params;
  params.i1 = 1;        // k = |S| = n on an all-background scene
  params.init_rank = 6;  // full-rank split leaves exactly zero foreground
  CHECK_THROWS_AS(batch_background(a, params), std::invalid_argument);
}

TEST_CASE("batch pipeline recovers the standard scene background") {
  const SynthVideo video = synth_video(standard_scene());
  BgParams params;
  params.i2 = 0;
  params.seed = 1;
  const BgResult res = batch_background(video.frames.data, params);
  CHECK(res.converged);
  CHECK(min_frame_mssim(video, res.parts.background) >= 0.95);

  const Matrix fg = threshold_foreground(res.parts.foreground, res.foreground_threshold);
  CHECK(auc(roc(video.masks.data, fg)) >= 0.95);
}

TEST_CASE("pipelines are deterministic under the seed") {
  const SynthVideo video = synth_video(standard_scene());
  BgParams params;
  params.i2 = 0;
  params.seed = 9;
  const BgResult a = batch_background(video.frames.data, params);
  const BgResult b = batch_background(video.frames.data, params);
  CHECK((a.parts.background - b.parts.background).norm() == 0.0);
  CHECK(a.batches[0].prior_columns == b.batches[0].prior_columns);

  BgParams inc = params;
  inc.p = 3;
  inc.ir = 0;
  const BgResult c = incremental_background(video.frames.data, inc);
  const BgResult d = incremental_background(video.frames.data, inc);
  CHECK((c.parts.background - d.parts.background).norm() == 0.0);
}

TEST_CASE("a static foreground tail stays out of the weighted background") {
  SynthSpec spec = standard_scene();
  spec.events[0].from = 20;
  spec.events[0].to = 60;
  spec.events[0].dx = 1.0;
  spec.events[0].dy = 0.0;
  spec.events[0].amplitude = 100.0;
  spec.events[0].static_from = 50;
  const SynthVideo video = synth_video(spec);

  BgParams params;
  params.i2 = 0;
  params.seed = 1;
  const BgResult batch = batch_background(video.frames.data, params);
  CHECK(tail_box_deviation(video, batch.parts.background, 50) <= 10.0);

  BgParams inc = params;
  inc.p = 3;
  inc.ir = 0;
  const BgResult incremental = incremental_background(video.frames.data, inc);
  CHECK(tail_box_deviation(video, incremental.parts.background, 50) <= 10.0);

  // The rank-matched truncated SVD keeps the parked box in its background.
  const Matrix svd_bg = hard_threshold(video.frames.data, batch.batches[0].r);
  CHECK(tail_box_deviation(video, svd_bg, 50) > 25.0);
}

TEST_CASE("incremental with a single batch agrees with batch on a static scene") {
  Vector base(150);
  for (Index i = 0; i < 150; ++i) base(i) = 30.0 + (i % 97);
  const Matrix a = base * Eigen::RowVectorXd::Ones(10);

  BgParams params;
  params.seed = 4;
  const BgResult batch = batch_background(a, params);
  params.p = 1;
  const BgResult inc = incremental_background(a, params);
  CHECK((batch.parts.background - inc.parts.background).norm() <= 1e-6 * a.norm());
}

TEST_CASE("incremental pipeline tracks the standard scene") {
  const SynthVideo video = synth_video(standard_scene());
  BgParams params;
  params.p = 3;
  params.ir = 0;
  params.prior_source = BgParams::PriorSource::background;
  params.seed = 1;
  const BgResult res = incremental_background(video.frames.data, params);
  CHECK(res.converged);
  CHECK(min_frame_mssim(video, res.parts.background) >= 0.95);

  const Matrix fg = threshold_foreground(res.parts.foreground, res.foreground_threshold);
  CHECK(auc(roc(video.masks.data, fg)) >= 0.95);

  // Per-batch rank bound at the solved rank.
  Index begin = 0;
  for (const BatchDiagnostics& d : res.batches) {
    const Index width = video.frames.frames() / 3;
    CHECK(numerical_rank(res.parts.background.middleCols(begin, width), 1e-8) <= d.r);
    begin += width;
  }
}

TEST_CASE("incremental tracking beats batch on a slowly brightening scene") {
  SynthSpec spec = standard_scene();
  spec.kind = BackgroundKind::drifting_gain;
  spec.p0 = 1.0;
  spec.p1 = 1.2;
  spec.events[0].from = 25;
  spec.events[0].to = 60;
  spec.events[0].dx = 0.8;
  const SynthVideo video = synth_video(spec);

  BgParams inc;
  inc.p = 6;
  inc.ir = 0;
  inc.prior_source = BgParams::PriorSource::background;
  inc.seed = 1;
  const BgResult res_inc = incremental_background(video.frames.data, inc);
  CHECK(min_frame_mssim(video, res_inc.parts.background) >= 0.90);

  BgParams batch;
  batch.i2 = 0;
  batch.seed = 1;
  const BgResult res_batch = batch_background(video.frames.data, batch);

  auto late_mean = [&](const Matrix& bg) {
    double sum = 0.0;
    for (Index t = 40; t < 60; ++t) {
      const Matrix got = unvectorize(bg.col(t).cwiseMax(0.0).cwiseMin(255.0),
                                     video.frames.height, video.frames.width);
      sum += mssim(frame_image(video.background, t), got);
    }
    return sum / 20.0;
  };
  CHECK(late_mean(res_inc.parts.background) > late_mean(res_batch.parts.background));
}

TEST_CASE("incremental validates the partition") {
  const Matrix a = Matrix::Constant(20, 10, 50.0);
  BgParams params;
  params.p = 4;  // widths 3,3,3,1: final batch too small
  CHECK_THROWS_AS(incremental_background(a, params), std::invalid_argument);
  params.p = 8;  // cannot produce 8 contiguous non-empty batches
  CHECK_THROWS_AS(incremental_background(a, params), std::invalid_argument);
}

TEST_CASE("k_max larger than a batch is clamped and flagged") {
  Vector base(80);
  for (Index i = 0; i < 80; ++i) base(i) = 20.0 + (i % 53);
  const Matrix a = base * Eigen::RowVectorXd::Ones(12);
  BgParams params;
  params.p = 3;  // batches of 4 < k_max = 10
  const BgResult res = incremental_background(a, params);
  CHECK(res.batches[0].k_max_clamped);
  CHECK(res.batches[0].k <= 4);
}

TEST_CASE("params validation") {
  BgParams params;
  params.alpha = 0.0;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
  params = {};
  params.beta = params.alpha - 1.0;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
  params = {};
  params.p = 0;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
  params = {};
  params.k_max = 0;
  CHECK_THROWS_AS(validate(params), std::invalid_argument);
}

TEST_CASE("diagnostics csv lists one row per batch") {
  const SynthVideo video = synth_video(standard_scene());
  BgParams params;
  params.p = 3;
  params.ir = 0;
  params.seed = 1;
  const BgResult res = incremental_background(video.frames.data, params);
  const auto path = std::filesystem::temp_directory_path() / "wlra_diag_test.csv";
  write_diagnostics_csv(res, path.string());
  std::ifstream is(path);
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line ==
        "batch,k,r,iterations,converged,final_objective,prior_columns,objective_trace");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3);
  std::filesystem::remove(path);
}

TEST_SUITE_END();
