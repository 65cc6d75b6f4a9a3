#include "pulseforge/augment.hpp"

#include <random>
#include <vector>

namespace pulseforge {

std::string_view to_string(SpatialOp op) {
  switch (op) {
    case SpatialOp::Rotate0: return "rotate0";
    case SpatialOp::Rotate90: return "rotate90";
    case SpatialOp::Rotate180: return "rotate180";
    case SpatialOp::Rotate270: return "rotate270";
    case SpatialOp::FlipHorizontal: return "flip_horizontal";
    case SpatialOp::FlipVertical: return "flip_vertical";
  }
  return "unknown";
}

namespace {

// Builds a cube of shape (out_h, out_w) where output pixel (h, w) reads input
// pixel source(h, w).
template <typename Source>
VideoCube remap(const VideoCube& cube, int out_h, int out_w, Source source) {
  const int C = cube.channels();
  std::vector<Eigen::Index> from(std::size_t(out_h) * out_w);
  for (int h = 0; h < out_h; ++h)
    for (int w = 0; w < out_w; ++w) {
      const auto [sh, sw] = source(h, w);
      from[std::size_t(h) * out_w + w] = cube.column(sh, sw, 0);
    }
  // Expand the pixel map to a column map once, then gather row by row.
  std::vector<Eigen::Index> col_from(from.size() * std::size_t(C));
  for (std::size_t p = 0; p < from.size(); ++p)
    for (int c = 0; c < C; ++c) col_from[p * std::size_t(C) + std::size_t(c)] = from[p] + c;
  FrameMatrix data(cube.frames(), cube.pixels_per_frame());
  for (int t = 0; t < cube.frames(); ++t) {
    const float* in = cube.data().data() + Eigen::Index(t) * cube.pixels_per_frame();
    float* out = data.data() + Eigen::Index(t) * cube.pixels_per_frame();
    for (std::size_t j = 0; j < col_from.size(); ++j) out[j] = in[col_from[j]];
  }
  return VideoCube::assume_valid(cube.frames(), out_h, out_w, C, cube.fps(), std::move(data));
}

}  // namespace

VideoCube rotate(const VideoCube& cube, int quarter_turns) {
  if (quarter_turns < 0 || quarter_turns > 3)
    throw Error(ErrorKind::InvalidArgument, "quarter turns must be 0, 1, 2 or 3");
  const int k = quarter_turns;
  const int H = cube.height(), W = cube.width();
  if ((k % 2 == 1) && H != W)
    throw Error(ErrorKind::InvalidArgument, "odd quarter turns need square frames");
  switch (k) {
    case 0: return cube;
    case 1: return remap(cube, W, H, [&](int h, int w) { return std::pair{w, W - 1 - h}; });
    case 2: return remap(cube, H, W, [&](int h, int w) { return std::pair{H - 1 - h, W - 1 - w}; });
    default: return remap(cube, W, H, [&](int h, int w) { return std::pair{H - 1 - w, h}; });
  }
}

VideoCube flip(const VideoCube& cube, FlipAxis axis) {
  const int H = cube.height(), W = cube.width();
  if (axis == FlipAxis::Horizontal)
    return remap(cube, H, W, [&](int h, int w) { return std::pair{h, W - 1 - w}; });
  return remap(cube, H, W, [&](int h, int w) { return std::pair{H - 1 - h, w}; });
}

VideoCube apply(const VideoCube& cube, SpatialOp op) {
  switch (op) {
    case SpatialOp::Rotate0: return rotate(cube, 0);
    case SpatialOp::Rotate90: return rotate(cube, 1);
    case SpatialOp::Rotate180: return rotate(cube, 2);
    case SpatialOp::Rotate270: return rotate(cube, 3);
    case SpatialOp::FlipHorizontal: return flip(cube, FlipAxis::Horizontal);
    case SpatialOp::FlipVertical: return flip(cube, FlipAxis::Vertical);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown spatial op");
}

PositivePair sample_positive_pair(const VideoCube& cube, std::uint64_t seed) {
  std::vector<SpatialOp> legal;
  for (SpatialOp op : kSpatialOps) {
    const bool odd_turn = op == SpatialOp::Rotate90 || op == SpatialOp::Rotate270;
    if (!odd_turn || cube.height() == cube.width()) legal.push_back(op);
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, legal.size() - 1);
  const std::size_t a = pick(rng);
  std::size_t b = pick(rng);
  while (b == a) b = pick(rng);
  return {legal[a], legal[b], apply(cube, legal[a]), apply(cube, legal[b])};
}

}  // namespace pulseforge
