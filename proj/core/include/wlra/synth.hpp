#pragma once

#include "wlra/frames.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace wlra {

enum class BackgroundKind { constant, gradient, drifting_gain, oscillating_texture };

// Rectangular foreground event. The box sits at (x, y) on frame `from` and
// moves by (dx, dy) per frame over [from, to); from static_from on it stays
// frozen at the position it had there.
struct BoxEvent {
  double x = 0, y = 0;
  Index box_width = 0, box_height = 0;
  double amplitude = 0;
  Index from = 0, to = 0;
  double dx = 0, dy = 0;
  std::optional<Index> static_from;
};

struct SynthSpec {
  Index height = 0, width = 0, n_frames = 0;
  BackgroundKind kind = BackgroundKind::constant;
  // Meaning by kind: constant{level}; gradient{lo, hi};
  // drifting_gain{gain0, gain1} over a ramp base with a horizontal vignette;
  // oscillating_texture{level, amplitude, period}.
  double p0 = 120, p1 = 0, p2 = 0;
  std::vector<BoxEvent> events;
  double noise_sigma = 0;
  std::uint64_t seed = 0;
};

struct SynthVideo {
  FrameSequence frames;      // clip(background + foreground + noise, 0, 255)
  FrameSequence background;  // noise-free ground truth
  FrameSequence masks;       // 255 on foreground pixels, 0 elsewhere
};

void validate(const SynthSpec& spec);

// Deterministic under spec.seed.
SynthVideo synth_video(const SynthSpec& spec);

// `key = value` lines with # comments; the `event` key repeats and takes a
// comma-separated list such as
//   event = x=10, y=8, w=12, h=10, amp=80, from=15, to=55, dx=0.6, static-from=45
SynthSpec parse_synth_spec(std::istream& is);
SynthSpec load_synth_spec(const std::filesystem::path& file);

}  // namespace wlra
