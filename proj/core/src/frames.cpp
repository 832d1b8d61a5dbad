#include "wlra/frames.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <vector>

namespace wlra {

namespace {

// Reads one whitespace/comment-delimited header token from a PGM stream.
std::string next_token(std::istream& is) {
  std::string tok;
  int c;
  while ((c = is.get()) != EOF) {
    if (c == '#') {  // comment runs to end of line
      while ((c = is.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

long parse_count(const std::string& tok, const std::string& what,
                 const std::filesystem::path& file) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(tok, &pos);
    if (pos != tok.size() || v <= 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError("read_frames: bad " + what + " '" + tok + "' in " + file.string());
  }
}

struct PgmImage {
  Index height = 0, width = 0;
  std::vector<std::uint8_t> pixels;  // row-major scanlines
};

PgmImage read_pgm(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw FormatError("read_frames: cannot open " + file.string());
  char magic[2] = {0, 0};
  is.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5') {
    throw FormatError("read_frames: " + file.string() + " is not a binary P5 graymap");
  }
  PgmImage img;
  img.width = parse_count(next_token(is), "width", file);
  img.height = parse_count(next_token(is), "height", file);
  const long maxval = parse_count(next_token(is), "maxval", file);
  if (maxval != 255) {
    throw FormatError("read_frames: " + file.string() + " has maxval " +
                      std::to_string(maxval) + ", expected 255");
  }
  // The header token reader consumed the single whitespace before the raster.
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  is.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (is.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw FormatError("read_frames: truncated raster in " + file.string());
  }
  return img;
}

}  // namespace

FrameSequence make_sequence(Index height, Index width, Index n_frames) {
  if (height <= 0 || width <= 0 || n_frames < 0) {
    throw std::invalid_argument("make_sequence: invalid dimensions");
  }
  FrameSequence seq;
  seq.height = height;
  seq.width = width;
  seq.data = Matrix::Zero(height * width, n_frames);
  return seq;
}

Vector vectorize(const Matrix& image) {
  const Index h = image.rows(), w = image.cols();
  Vector v(h * w);
  for (Index x = 0; x < w; ++x) {
    for (Index y = 0; y < h; ++y) v(x * h + y) = image(y, x);
  }
  return v;
}

Matrix unvectorize(const Vector& v, Index height, Index width) {
  if (v.size() != height * width) {
    throw std::invalid_argument("unvectorize: size does not match height*width");
  }
  Matrix img(height, width);
  for (Index x = 0; x < width; ++x) {
    for (Index y = 0; y < height; ++y) img(y, x) = v(x * height + y);
  }
  return img;
}

Matrix frame_image(const FrameSequence& seq, Index j) {
  if (j < 0 || j >= seq.frames()) throw std::invalid_argument("frame_image: index out of range");
  return unvectorize(seq.data.col(j), seq.height, seq.width);
}

void set_frame(FrameSequence& seq, Index j, const Matrix& image) {
  if (j < 0 || j >= seq.frames()) throw std::invalid_argument("set_frame: index out of range");
  if (image.rows() != seq.height || image.cols() != seq.width) {
    throw std::invalid_argument("set_frame: image shape does not match sequence");
  }
  seq.data.col(j) = vectorize(image);
}

FrameSequence read_frames(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw FormatError("read_frames: " + dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw FormatError("read_frames: no frames found in " + dir.string());
  std::sort(files.begin(), files.end());

  FrameSequence seq;
  for (std::size_t j = 0; j < files.size(); ++j) {
    const PgmImage img = read_pgm(files[j]);
    if (j == 0) {
      seq = make_sequence(img.height, img.width, static_cast<Index>(files.size()));
    } else if (img.height != seq.height || img.width != seq.width) {
      throw FormatError("read_frames: " + files[j].string() + " is " +
                        std::to_string(img.width) + "x" + std::to_string(img.height) +
                        ", expected " + std::to_string(seq.width) + "x" +
                        std::to_string(seq.height));
    }
    for (Index x = 0; x < seq.width; ++x) {
      for (Index y = 0; y < seq.height; ++y) {
        seq.data(x * seq.height + y, static_cast<Index>(j)) =
            static_cast<double>(img.pixels[static_cast<std::size_t>(y) * seq.width + x]);
      }
    }
  }
  return seq;
}

void write_frames(const FrameSequence& seq, const std::filesystem::path& dir,
                  const std::string& prefix) {
  std::filesystem::create_directories(dir);
  std::vector<std::uint8_t> raster(static_cast<std::size_t>(seq.pixels()));
  for (Index j = 0; j < seq.frames(); ++j) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s%04lld.pgm", prefix.c_str(),
                  static_cast<long long>(j));
    const std::filesystem::path file = dir / name;
    std::ofstream os(file, std::ios::binary);
    if (!os) throw std::runtime_error("write_frames: cannot open " + file.string());
    os << "P5\n" << seq.width << " " << seq.height << "\n255\n";
    for (Index y = 0; y < seq.height; ++y) {
      for (Index x = 0; x < seq.width; ++x) {
        const double v = std::clamp(seq.data(x * seq.height + y, j), 0.0, 255.0);
        raster[static_cast<std::size_t>(y) * seq.width + x] =
            static_cast<std::uint8_t>(std::lround(v));
      }
    }
    os.write(reinterpret_cast<const char*>(raster.data()),
             static_cast<std::streamsize>(raster.size()));
  }
}

}  // namespace wlra
