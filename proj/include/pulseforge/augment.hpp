#pragma once

#include "pulseforge/core_types.hpp"

#include <array>
#include <cstdint>
#include <string_view>

namespace pulseforge {

enum class FlipAxis { Horizontal, Vertical };

enum class SpatialOp { Rotate0, Rotate90, Rotate180, Rotate270, FlipHorizontal, FlipVertical };

inline constexpr std::array<SpatialOp, 6> kSpatialOps{SpatialOp::Rotate0,   SpatialOp::Rotate90,
                                                      SpatialOp::Rotate180, SpatialOp::Rotate270,
                                                      SpatialOp::FlipHorizontal, SpatialOp::FlipVertical};

std::string_view to_string(SpatialOp op);

/// Counter-clockwise quarter turns of every frame. Odd turns need H == W.
VideoCube rotate(const VideoCube& cube, int quarter_turns);
VideoCube flip(const VideoCube& cube, FlipAxis axis);
VideoCube apply(const VideoCube& cube, SpatialOp op);

struct PositivePair {
  SpatialOp first_op;
  SpatialOp second_op;
  VideoCube first;
  VideoCube second;
};

/// Two distinct spatial ops drawn uniformly (ops illegal for the frame shape are skipped).
PositivePair sample_positive_pair(const VideoCube& cube, std::uint64_t seed);

}  // namespace pulseforge
