#include "wlra/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace wlra {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Box position at frame t, frozen from static_from on.
std::pair<Index, Index> event_position(const BoxEvent& ev, Index t) {
  Index eff = t;
  if (ev.static_from && t > *ev.static_from) eff = *ev.static_from;
  const double steps = static_cast<double>(eff - ev.from);
  return {static_cast<Index>(std::lround(ev.x + ev.dx * steps)),
          static_cast<Index>(std::lround(ev.y + ev.dy * steps))};
}

void validate_event(const BoxEvent& ev, const SynthSpec& spec, std::size_t idx) {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("synth spec: event " + std::to_string(idx) + ": " + why);
  };
  if (ev.box_width <= 0 || ev.box_height <= 0) fail("box size must be positive");
  if (ev.from < 0 || ev.to > spec.n_frames || ev.from >= ev.to) {
    fail("frame range [" + std::to_string(ev.from) + ", " + std::to_string(ev.to) +
         ") outside the sequence");
  }
  if (ev.static_from && *ev.static_from < ev.from) fail("static-from before the event start");
  // Motion is linear until frozen, so the extreme positions are at the ends.
  const Index last_moving = std::min<Index>(ev.to - 1, ev.static_from.value_or(ev.to - 1));
  for (Index t : {ev.from, last_moving}) {
    const auto [px, py] = event_position(ev, t);
    if (px < 0 || py < 0 || px + ev.box_width > spec.width || py + ev.box_height > spec.height) {
      fail("box leaves the frame bounds at frame " + std::to_string(t));
    }
  }
}

double background_pixel(const SynthSpec& spec, Index t, Index y, Index x) {
  const double fx = spec.width > 1 ? static_cast<double>(x) / (spec.width - 1) : 0.0;
  const double fy = spec.height > 1 ? static_cast<double>(y) / (spec.height - 1) : 0.0;
  switch (spec.kind) {
    case BackgroundKind::constant:
      return spec.p0;
    case BackgroundKind::gradient:
      return spec.p0 + (spec.p1 - spec.p0) * fx;
    case BackgroundKind::drifting_gain: {
      const double base = 70.0 + 110.0 * fy;
      const double ft = spec.n_frames > 1 ? static_cast<double>(t) / (spec.n_frames - 1) : 0.0;
      const double gain = spec.p0 + (spec.p1 - spec.p0) * ft;
      return base * (1.0 + (gain - 1.0) * fx);
    }
    case BackgroundKind::oscillating_texture: {
      const double period = spec.p2 > 0 ? spec.p2 : 20.0;
      return spec.p0 + spec.p1 * std::sin(2.0 * kPi * x / 16.0) *
                           std::sin(2.0 * kPi * y / 16.0) *
                           std::cos(2.0 * kPi * t / period);
    }
  }
  return spec.p0;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw FormatError("synth spec line " + std::to_string(line) + ": bad number '" + v + "'");
  }
}

BoxEvent parse_event(const std::string& value, int line) {
  BoxEvent ev;
  std::stringstream ss(value);
  std::string field;
  while (std::getline(ss, field, ',')) {
    field = trim(field);
    if (field.empty()) continue;
    const auto eq = field.find('=');
    if (eq == std::string::npos) {
      throw FormatError("synth spec line " + std::to_string(line) +
                        ": event field '" + field + "' is not key=value");
    }
    const std::string key = trim(field.substr(0, eq));
    const double num = parse_number(trim(field.substr(eq + 1)), line);
    if (key == "x") ev.x = num;
    else if (key == "y") ev.y = num;
    else if (key == "w") ev.box_width = static_cast<Index>(num);
    else if (key == "h") ev.box_height = static_cast<Index>(num);
    else if (key == "amp") ev.amplitude = num;
    else if (key == "from") ev.from = static_cast<Index>(num);
    else if (key == "to") ev.to = static_cast<Index>(num);
    else if (key == "dx") ev.dx = num;
    else if (key == "dy") ev.dy = num;
    else if (key == "static-from") ev.static_from = static_cast<Index>(num);
    else {
      throw FormatError("synth spec line " + std::to_string(line) +
                        ": unknown event field '" + key + "'");
    }
  }
  return ev;
}

void parse_background(const std::string& value, SynthSpec& spec, int line) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ':')) parts.push_back(trim(part));
  if (parts.empty()) throw FormatError("synth spec line " + std::to_string(line) + ": empty background");
  double* slots[3] = {&spec.p0, &spec.p1, &spec.p2};
  if (parts[0] == "constant") spec.kind = BackgroundKind::constant;
  else if (parts[0] == "gradient") spec.kind = BackgroundKind::gradient;
  else if (parts[0] == "drifting-gain") spec.kind = BackgroundKind::drifting_gain;
  else if (parts[0] == "oscillating-texture") spec.kind = BackgroundKind::oscillating_texture;
  else {
    throw FormatError("synth spec line " + std::to_string(line) +
                      ": unknown background kind '" + parts[0] + "'");
  }
  for (std::size_t i = 1; i < parts.size() && i <= 3; ++i) {
    *slots[i - 1] = parse_number(parts[i], line);
  }
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.height <= 0 || spec.width <= 0 || spec.n_frames <= 0) {
    throw std::invalid_argument("synth spec: dimensions must be positive");
  }
  if (spec.noise_sigma < 0) throw std::invalid_argument("synth spec: negative noise sigma");
  for (std::size_t i = 0; i < spec.events.size(); ++i) validate_event(spec.events[i], spec, i);
}

SynthVideo synth_video(const SynthSpec& spec) {
  validate(spec);
  SynthVideo out;
  out.frames = make_sequence(spec.height, spec.width, spec.n_frames);
  out.background = make_sequence(spec.height, spec.width, spec.n_frames);
  out.masks = make_sequence(spec.height, spec.width, spec.n_frames);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (Index t = 0; t < spec.n_frames; ++t) {
    Matrix bg(spec.height, spec.width);
    for (Index y = 0; y < spec.height; ++y) {
      for (Index x = 0; x < spec.width; ++x) bg(y, x) = background_pixel(spec, t, y, x);
    }
    Matrix fg = Matrix::Zero(spec.height, spec.width);
    Matrix mask = Matrix::Zero(spec.height, spec.width);
    for (const BoxEvent& ev : spec.events) {
      if (t < ev.from || t >= ev.to) continue;
      const auto [px, py] = event_position(ev, t);
      for (Index y = py; y < py + ev.box_height; ++y) {
        for (Index x = px; x < px + ev.box_width; ++x) {
          fg(y, x) += ev.amplitude;
          mask(y, x) = 255.0;
        }
      }
    }
    Matrix frame = bg + fg;
    if (spec.noise_sigma > 0) {
      for (Index x = 0; x < spec.width; ++x) {
        for (Index y = 0; y < spec.height; ++y) {
          frame(y, x) += spec.noise_sigma * noise(rng);
        }
      }
    }
    frame = frame.cwiseMax(0.0).cwiseMin(255.0);
    set_frame(out.frames, t, frame);
    set_frame(out.background, t, bg.cwiseMax(0.0).cwiseMin(255.0));
    set_frame(out.masks, t, mask);
  }
  return out;
}

SynthSpec parse_synth_spec(std::istream& is) {
  SynthSpec spec;
  bool have_h = false, have_w = false, have_n = false;
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) {
      throw FormatError("synth spec line " + std::to_string(line) + ": expected key = value");
    }
    const std::string key = trim(raw.substr(0, eq));
    const std::string value = trim(raw.substr(eq + 1));
    if (key == "height") { spec.height = static_cast<Index>(parse_number(value, line)); have_h = true; }
    else if (key == "width") { spec.width = static_cast<Index>(parse_number(value, line)); have_w = true; }
    else if (key == "frames") { spec.n_frames = static_cast<Index>(parse_number(value, line)); have_n = true; }
    else if (key == "background") parse_background(value, spec, line);
    else if (key == "noise-sigma") spec.noise_sigma = parse_number(value, line);
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(parse_number(value, line));
    else if (key == "event") spec.events.push_back(parse_event(value, line));
    else throw FormatError("synth spec line " + std::to_string(line) + ": unknown key '" + key + "'");
  }
  if (!have_h || !have_w || !have_n) {
    throw FormatError("synth spec: height, width and frames are required");
  }
  validate(spec);
  return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw FormatError("synth spec: cannot open " + file.string());
  return parse_synth_spec(is);
}

}  // namespace wlra
