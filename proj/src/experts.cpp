#include "pulseforge/experts.hpp"

#include <algorithm>

namespace pulseforge {

namespace {

std::vector<int> edges(int extent, int parts) {
  std::vector<int> e(std::size_t(parts) + 1);
  const int step = extent / parts;
  for (int i = 0; i < parts; ++i) e[std::size_t(i)] = i * step;
  e[std::size_t(parts)] = extent;
  return e;
}

}  // namespace

RegionGrid::RegionGrid(int height, int width, int rows, int cols)
    : height_(height), width_(width), rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw Error(ErrorKind::InvalidArgument, "grid needs at least one row and column");
  if (rows > height || cols > width) throw Error(ErrorKind::InvalidArgument, "grid finer than frame");
  row_edges_ = edges(height, rows);
  col_edges_ = edges(width, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      tiles_.push_back({row_edges_[std::size_t(r)], col_edges_[std::size_t(c)],
                        row_edges_[std::size_t(r) + 1] - row_edges_[std::size_t(r)],
                        col_edges_[std::size_t(c) + 1] - col_edges_[std::size_t(c)]});
}

int RegionGrid::region_of(int h, int w) const {
  if (h < 0 || h >= height_ || w < 0 || w >= width_) throw Error(ErrorKind::OutOfRange, "pixel outside grid");
  const int r = std::min(h / (height_ / rows_), rows_ - 1);
  const int c = std::min(w / (width_ / cols_), cols_ - 1);
  return r * cols_ + c;
}

std::vector<Eigen::Index> RegionGrid::columns(int region, int channels) const {
  const Tile& t = tile(region);
  std::vector<Eigen::Index> out;
  out.reserve(std::size_t(t.area()) * std::size_t(channels));
  for (int h = t.row0; h < t.row0 + t.rows; ++h)
    for (int w = t.col0; w < t.col0 + t.cols; ++w)
      for (int c = 0; c < channels; ++c) out.push_back((Eigen::Index(h) * width_ + w) * channels + c);
  return out;
}

RegionGrid partition(int height, int width, int rows, int cols) { return RegionGrid(height, width, rows, cols); }

Signal extract_region_signal(const VideoCube& cube, const RegionGrid& grid, int region) {
  if (grid.height() != cube.height() || grid.width() != cube.width())
    throw Error(ErrorKind::SizeMismatch, "grid does not match cube dimensions");
  const std::vector<Eigen::Index> cols = grid.columns(region, cube.channels());
  if (cols.empty()) throw Error(ErrorKind::InvalidArgument, "empty region");
  Vector mean(cube.frames());
  for (int t = 0; t < cube.frames(); ++t) {
    double acc = 0.0;
    for (Eigen::Index j : cols) acc += double(cube.data()(t, j));
    mean[t] = acc / double(cols.size());
  }
  return Signal(standardize(mean), cube.fps());
}

Matrix gate_weights_vjp(const Matrix& weights, const Matrix& grad_weights) {
  Matrix out(weights.rows(), weights.cols());
  for (Eigen::Index t = 0; t < weights.cols(); ++t) {
    const double inner = weights.col(t).dot(grad_weights.col(t));
    out.col(t) = weights.col(t).array() * (grad_weights.col(t).array() - inner);
  }
  return out;
}

Signal aggregate(const ExpertBundle& bundle) {
  const auto& ex = bundle.experts;
  if (ex.empty()) throw Error(ErrorKind::InvalidArgument, "bundle has no experts");
  const Eigen::Index T = ex.front().size();
  const double fs = ex.front().fs();
  for (const Signal& e : ex)
    if (e.size() != T || e.fs() != fs) throw Error(ErrorKind::SizeMismatch, "experts differ in length or rate");
  if (bundle.gating_logits.rows() != Eigen::Index(ex.size()) || bundle.gating_logits.cols() != T)
    throw Error(ErrorKind::SizeMismatch, "gating logits must be L x T");
  if (!bundle.gating_logits.allFinite()) throw Error(ErrorKind::NonFinite, "gating logits not finite");
  const Matrix w = gate_weights(bundle.gating_logits);
  Vector y = Vector::Zero(T);
  for (std::size_t l = 0; l < ex.size(); ++l)
    y.array() += ex[l].samples().array() * w.row(Eigen::Index(l)).transpose().array();
  return Signal(std::move(y), fs);
}

Signal run_rea(const VideoCube& cube, const RegionGrid& grid, const RegionExtractor& extractor,
               const Matrix& logits) {
  if (grid.height() != cube.height() || grid.width() != cube.width())
    throw Error(ErrorKind::SizeMismatch, "grid does not match cube dimensions");
  ExpertBundle bundle{{}, logits};
  bundle.experts.reserve(std::size_t(grid.size()));
  for (int l = 0; l < grid.size(); ++l) {
    Signal e = extractor(cube, grid, l);
    if (e.size() != cube.frames()) throw Error(ErrorKind::SizeMismatch, "extractor returned wrong length");
    bundle.experts.push_back(std::move(e));
  }
  return aggregate(bundle);
}

}  // namespace pulseforge
