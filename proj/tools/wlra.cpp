// wlra: weighted low-rank background modeling toolkit.
//
// Subcommands: synth (generate a synthetic sequence), decompose (batch or
// incremental background estimation), ghs (closed-form baseline), metrics
// (PSNR/MSSIM/MSSSIM and ROC/AUC reports), solve (raw solver on a CSV matrix).

#include <CLI11.hpp>

#include "wlra/background.hpp"
#include "wlra/frames.hpp"
#include "wlra/ghs.hpp"
#include "wlra/metrics.hpp"
#include "wlra/synth.hpp"
#include "wlra/wlr.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace wlra;

namespace {

// Accept either a directory of .pgm files or a parent holding a named
// subdirectory of them (as written by `synth` / `decompose`).
fs::path resolve_sequence_dir(const fs::path& dir, const std::string& preferred) {
  if (fs::is_directory(dir / preferred)) return dir / preferred;
  return dir;
}

Matrix load_matrix_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open matrix file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (const std::exception&) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) +
                          ": bad number '" + field + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": ragged row (" + std::to_string(row.size()) + " fields)");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path.string() + ": empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

// Expands `--config <file>` into the equivalent flags: every `key = value`
// line becomes --key value unless that flag already appears on the command
// line, so explicit flags override the file.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw FormatError("--config needs a file argument");
      file = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      file = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (file.empty()) return args;

  std::ifstream is(file);
  if (!is) throw FormatError("cannot open config file " + file);
  auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(file + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string flag = "--" + trim(line.substr(0, eq));
    const bool already_set =
        std::any_of(args.begin(), args.end(), [&](const std::string& a) {
          return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    if (!already_set) {
      args.push_back(flag);
      args.push_back(trim(line.substr(eq + 1)));
    }
  }
  return args;
}

FrameSequence sequence_like(const FrameSequence& shape, const Matrix& data) {
  FrameSequence seq;
  seq.height = shape.height;
  seq.width = shape.width;
  seq.data = data;
  return seq;
}

void write_decomposition(const FrameSequence& input, const BgResult& res,
                         const fs::path& out, bool raw_foreground) {
  const Matrix thresholded =
      threshold_foreground(res.parts.foreground, res.foreground_threshold);
  write_frames(sequence_like(input, res.parts.background), out / "background");
  write_frames(sequence_like(input, thresholded.cwiseAbs()), out / "foreground");
  if (raw_foreground) {
    write_frames(sequence_like(input, res.parts.foreground.cwiseAbs()),
                 out / "foreground_raw");
  }
  write_diagnostics_csv(res, (out / "diagnostics.csv").string());
}

struct SynthArgs {
  std::string spec;
  std::string out;
};

int run_synth(const SynthArgs& args) {
  const SynthSpec spec = load_synth_spec(args.spec);
  const SynthVideo video = synth_video(spec);
  const fs::path out(args.out);
  write_frames(video.frames, out / "frames");
  write_frames(video.background, out / "background");
  write_frames(video.masks, out / "masks");
  std::printf("wrote %lld frames of %lldx%lld to %s\n",
              static_cast<long long>(video.frames.frames()),
              static_cast<long long>(spec.width), static_cast<long long>(spec.height),
              out.string().c_str());
  return 0;
}

struct DecomposeArgs {
  std::string mode;
  std::string in;
  std::string out;
  BgParams params;
  double eps1_override = -1.0;
  std::string prior_source = "data";
  bool raw_foreground = false;
};

int run_decompose(const DecomposeArgs& args) {
  const FrameSequence input = read_frames(resolve_sequence_dir(args.in, "frames"));
  BgParams params = args.params;
  if (args.eps1_override >= 0.0) params.eps1 = args.eps1_override;
  params.prior_source = args.prior_source == "background"
                            ? BgParams::PriorSource::background
                            : BgParams::PriorSource::data;
  const BgResult res = args.mode == "batch"
                           ? batch_background(input.data, params)
                           : incremental_background(input.data, params);
  write_decomposition(input, res, args.out, args.raw_foreground);
  for (const BatchDiagnostics& d : res.batches) {
    std::printf("batch %d: k=%lld r=%lld iterations=%d converged=%d\n", d.batch,
                static_cast<long long>(d.k), static_cast<long long>(d.r), d.iterations,
                d.converged ? 1 : 0);
  }
  if (!res.converged) {
    std::fprintf(stderr, "warning: solver did not converge within max iterations\n");
    return 2;
  }
  return 0;
}

struct GhsArgs {
  std::string in;
  std::string out;
  Index k = 0;
  Index r = 0;
};

int run_ghs(const GhsArgs& args) {
  const FrameSequence input = read_frames(resolve_sequence_dir(args.in, "frames"));
  if (args.k < 1 || args.k >= input.frames()) {
    throw std::invalid_argument("ghs: k must be in [1, n_frames)");
  }
  PartitionedInput part;
  part.a1 = input.data.leftCols(args.k);  // first k frames are the preserved block
  part.a2 = input.data.rightCols(input.frames() - args.k);
  part.rank = args.r;
  const GhsSolution sol = ghs_solve(part);
  if (!sol.unique) {
    std::fprintf(stderr, "warning: tied singular values; the minimizer is not unique\n");
  }
  Matrix background(input.pixels(), input.frames());
  background.leftCols(args.k) = part.a1;
  background.rightCols(input.frames() - args.k) = sol.a2_estimate;
  const Matrix foreground = input.data - background;
  const double eps1 = otsu_threshold(foreground);
  const fs::path out(args.out);
  write_frames(sequence_like(input, background), out / "background");
  write_frames(sequence_like(input, threshold_foreground(foreground, eps1).cwiseAbs()),
               out / "foreground");
  std::printf("ghs: k=%lld r=%lld unique=%d\n", static_cast<long long>(args.k),
              static_cast<long long>(args.r), sol.unique ? 1 : 0);
  return 0;
}

struct MetricsArgs {
  std::string truth;
  std::string result;
  std::string masks;
  std::string out;
  int window = 11;
};

int run_metrics(const MetricsArgs& args) {
  const FrameSequence truth = read_frames(resolve_sequence_dir(args.truth, "background"));
  const FrameSequence result = read_frames(resolve_sequence_dir(args.result, "background"));
  if (truth.frames() != result.frames() || truth.pixels() != result.pixels()) {
    throw std::invalid_argument("metrics: truth and result shapes differ");
  }

  bool msssim_ok = true;
  std::vector<FrameMetrics> frames;
  frames.reserve(static_cast<std::size_t>(truth.frames()));
  for (Index t = 0; t < truth.frames(); ++t) {
    const Matrix g = frame_image(truth, t);
    const Matrix r = frame_image(result, t);
    FrameMetrics fm;
    fm.psnr = psnr(g, r);
    fm.mssim = mssim(g, r, args.window);
    try {
      fm.msssim = msssim(g, r, args.window);
    } catch (const std::invalid_argument&) {
      fm.msssim = std::numeric_limits<double>::quiet_NaN();
      msssim_ok = false;
    }
    frames.push_back(fm);
  }
  if (!msssim_ok) {
    std::fprintf(stderr,
                 "warning: frames too small for 5-scale msssim; wrote undefined\n");
  }

  RocCurve curve;
  bool have_curve = false;
  if (!args.masks.empty()) {
    const FrameSequence masks = read_frames(resolve_sequence_dir(args.masks, "masks"));
    // Detection is scored on the recovered foreground when present.
    const fs::path fg_dir = resolve_sequence_dir(args.result, "foreground");
    const FrameSequence recovered = read_frames(fg_dir);
    if (masks.frames() != recovered.frames() || masks.pixels() != recovered.pixels()) {
      throw std::invalid_argument("metrics: masks and foreground shapes differ");
    }
    curve = roc(masks.data, recovered.data);
    if (curve.degenerate) {
      std::fprintf(stderr, "warning: single-class ground truth; auc is undefined\n");
    }
    have_curve = true;
  }
  write_metrics_report(frames, have_curve ? &curve : nullptr, args.out);
  std::printf("wrote %s\n", args.out.c_str());
  return 0;
}

struct SolveArgs {
  std::string matrix;
  std::string trace;
  Index k = 0;
  Index r = 0;
  double alpha = 500.0;
  double beta = 1000.0;
  double eps = 1e-7;
  int max_iter = 500;
  std::uint64_t seed = 0;
};

int run_solve(const SolveArgs& args) {
  const Matrix a = load_matrix_csv(args.matrix);
  if (args.k < 1 || args.k >= a.cols()) {
    throw std::invalid_argument("solve: k must be in [1, cols)");
  }
  std::mt19937_64 rng(args.seed);
  const BlockWeight w = random_weight(a.rows(), args.k, args.alpha, args.beta, rng);
  SolveOptions opts;
  opts.eps = args.eps;
  opts.max_iter = args.max_iter;
  const SolveResult res =
      solve(a.leftCols(args.k), a.rightCols(a.cols() - args.k), w, args.r, opts);
  if (!args.trace.empty()) write_trace_csv(res.report, args.trace);
  std::printf("objective=%.12g iterations=%d converged=%d\n",
              res.report.objective_trace.back(), res.report.iterations,
              res.report.converged ? 1 : 0);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weighted low-rank matrix approximation and background modeling"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic sequence");
  synth_cmd->add_option("--spec", synth_args.spec, "Scene spec file")
      ->required()
      ->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();

  DecomposeArgs dec_args;
  CLI::App* dec_cmd = app.add_subcommand("decompose", "Estimate background and foreground");
  dec_cmd->add_option("--mode", dec_args.mode, "batch or incremental")
      ->required()
      ->check(CLI::IsMember({"batch", "incremental"}));
  dec_cmd->add_option("--in", dec_args.in, "Input frame directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  dec_cmd->add_option("--out", dec_args.out, "Output directory")->required();
  dec_cmd->add_option("--p", dec_args.params.p, "Batch count (incremental mode)");
  dec_cmd->add_option("--tau", dec_args.params.tau, "SVT shrinkage (<=0: automatic)");
  dec_cmd->add_option("--alpha", dec_args.params.alpha, "Weight lower bound");
  dec_cmd->add_option("--beta", dec_args.params.beta, "Weight upper bound");
  dec_cmd->add_option("--eps", dec_args.params.eps, "Solver threshold");
  dec_cmd->add_option("--i1", dec_args.params.i1, "Prior-count divisor (batch mode)");
  dec_cmd->add_option("--i2", dec_args.params.i2, "Rank increment (batch mode)");
  dec_cmd->add_option("--ir", dec_args.params.ir, "Rank increment (incremental mode)");
  dec_cmd->add_option("--kmax", dec_args.params.k_max, "Prior column cap (incremental)");
  dec_cmd->add_option("--seed", dec_args.params.seed, "RNG seed");
  dec_cmd->add_option("--init-rank", dec_args.params.init_rank,
                      "PCA split rank (batch mode)");
  dec_cmd->add_option("--eps1", dec_args.eps1_override,
                      "Override the learned binarization threshold");
  dec_cmd->add_option("--prior-source", dec_args.prior_source,
                      "Weighted block source: data or background")
      ->check(CLI::IsMember({"data", "background"}));
  dec_cmd->add_flag("--raw-foreground", dec_args.raw_foreground,
                    "Also write the unthresholded |foreground|");

  GhsArgs ghs_args;
  CLI::App* ghs_cmd = app.add_subcommand("ghs", "Closed-form baseline (first k frames kept)");
  ghs_cmd->add_option("--in", ghs_args.in, "Input frame directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  ghs_cmd->add_option("--k", ghs_args.k, "Preserved column count")->required();
  ghs_cmd->add_option("--r", ghs_args.r, "Target rank")->required();
  ghs_cmd->add_option("--out", ghs_args.out, "Output directory")->required();

  MetricsArgs met_args;
  CLI::App* met_cmd = app.add_subcommand("metrics", "Image quality and detection report");
  met_cmd->add_option("--truth", met_args.truth, "Ground-truth frame directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  met_cmd->add_option("--result", met_args.result, "Recovered frame directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  met_cmd->add_option("--masks", met_args.masks, "Ground-truth mask directory")
      ->check(CLI::ExistingDirectory);
  met_cmd->add_option("--out", met_args.out, "Report CSV path")->required();
  met_cmd->add_option("--window", met_args.window, "SSIM window size")
      ->check(CLI::IsMember({11, 9}));

  SolveArgs solve_args;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Run the solver on a CSV matrix");
  solve_cmd->add_option("--matrix", solve_args.matrix, "CSV matrix path")
      ->required()
      ->check(CLI::ExistingFile);
  solve_cmd->add_option("--k", solve_args.k, "Weighted block width")->required();
  solve_cmd->add_option("--r", solve_args.r, "Target rank")->required();
  solve_cmd->add_option("--alpha", solve_args.alpha, "Weight lower bound");
  solve_cmd->add_option("--beta", solve_args.beta, "Weight upper bound");
  solve_cmd->add_option("--eps", solve_args.eps, "Convergence threshold");
  solve_cmd->add_option("--max-iter", solve_args.max_iter, "Iteration cap");
  solve_cmd->add_option("--seed", solve_args.seed, "RNG seed");
  solve_cmd->add_option("--trace", solve_args.trace, "Per-iteration trace CSV path");

  try {
    // Every subcommand accepts `--config <file>` with plain `key = value`
    // lines supplying any of its flags; explicit flags win.
    std::vector<std::string> args = expand_config({argv + 1, argv + argc});
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth_args);
    if (dec_cmd->parsed()) return run_decompose(dec_args);
    if (ghs_cmd->parsed()) return run_ghs(ghs_args);
    if (met_cmd->parsed()) return run_metrics(met_args);
    if (solve_cmd->parsed()) return run_solve(solve_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
