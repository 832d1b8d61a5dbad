#pragma once

#include "wlra/matrix.hpp"

#include <filesystem>
#include <string>

namespace wlra {

// Stack of grayscale frames. Column j of data is frame j vectorized with a
// column-major pixel scan: matrix row (x * height + y) holds pixel (y, x).
// Values live in [0, 255].
struct FrameSequence {
  Index height = 0;
  Index width = 0;
  Matrix data;  // (height * width) x n_frames

  Index frames() const { return data.cols(); }
  Index pixels() const { return height * width; }
};

FrameSequence make_sequence(Index height, Index width, Index n_frames);

// Column-major vectorization and its inverse.
Vector vectorize(const Matrix& image);
Matrix unvectorize(const Vector& v, Index height, Index width);

Matrix frame_image(const FrameSequence& seq, Index j);
void set_frame(FrameSequence& seq, Index j, const Matrix& image);

// Reads every *.pgm file (binary P5, maxval 255) in the directory in
// lexicographic filename order. Throws FormatError on malformed or mixed-size
// input, or when no frames are found.
FrameSequence read_frames(const std::filesystem::path& dir);

// Writes frames as binary P5 files <prefix>NNNN.pgm (values rounded and
// clamped to [0, 255]). read_frames(write_frames(seq)) is bit-exact for
// integer-valued sequences.
void write_frames(const FrameSequence& seq, const std::filesystem::path& dir,
                  const std::string& prefix = "frame_");

}  // namespace wlra
