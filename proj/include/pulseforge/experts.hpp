#pragma once

#include "pulseforge/core_types.hpp"

#include <functional>
#include <vector>

namespace pulseforge {

/// Rectangular tile of a frame, [row0, row0 + rows) x [col0, col0 + cols).
struct Tile {
  int row0;
  int col0;
  int rows;
  int cols;
  int area() const noexcept { return rows * cols; }
};

/// Near-equal rectangular partition of an H x W frame; region l is tile
/// (l / cols, l % cols) and remainder pixels go to the last row/column.
class RegionGrid {
 public:
  RegionGrid(int height, int width, int rows, int cols);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int size() const noexcept { return rows_ * cols_; }

  const Tile& tile(int region) const { return tiles_.at(std::size_t(region)); }
  int region_of(int h, int w) const;

  /// Column indices into a frame row (h, w, c order) covering `region`,
  /// ascending.
  std::vector<Eigen::Index> columns(int region, int channels) const;

 private:
  int height_;
  int width_;
  int rows_;
  int cols_;
  std::vector<int> row_edges_;
  std::vector<int> col_edges_;
  std::vector<Tile> tiles_;
};

RegionGrid partition(int height, int width, int rows, int cols);

/// Per-region signal extractor: (cube, grid, region index) -> signal of length T.
using RegionExtractor = std::function<Signal(const VideoCube&, const RegionGrid&, int)>;

/// Spatial mean over the region's pixels and channels, standardized.
Signal extract_region_signal(const VideoCube& cube, const RegionGrid& grid, int region);

/// L local expert signals plus L x T gating logits.
struct ExpertBundle {
  std::vector<Signal> experts;
  Matrix gating_logits;
};

/// Column-wise softmax over experts: every column of the result sums to 1.
template <typename Derived>
Matrix gate_weights(const Eigen::MatrixBase<Derived>& logits) {
  Matrix w(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.cols(); ++t) {
    const auto col = logits.col(t);
    const Vector e = (col.array() - col.maxCoeff()).exp();
    w.col(t) = e / e.sum();
  }
  return w;
}

/// Reverse-mode product through gate_weights: dL/dlogits from dL/dweights.
Matrix gate_weights_vjp(const Matrix& weights, const Matrix& grad_weights);

/// y[t] = sum_l experts[l][t] * gate_weights(logits)(l, t).
Signal aggregate(const ExpertBundle& bundle);

/// Extract every region with `extractor` and aggregate with `logits`.
Signal run_rea(const VideoCube& cube, const RegionGrid& grid, const RegionExtractor& extractor,
               const Matrix& logits);

}  // namespace pulseforge
