#pragma once

#include "pulseforge/core_types.hpp"
#include "pulseforge/experts.hpp"

#include <cstdint>
#include <vector>

namespace pulseforge {

/// Gradient of a scalar with respect to every Estimator parameter.
struct EstimatorGrad {
  std::vector<Vector> weights;
  Matrix logits;

  EstimatorGrad& operator+=(const EstimatorGrad& other);
  Vector flatten() const;
};

/// Parametric stand-in for the learned per-region pathway: each expert is a
/// weighted sum of its region's pixels (all channels) per frame, standardized;
/// the experts are combined by softmax gating over free L x T logits.
///
/// Cubes longer than the logit horizon reuse the logits periodically, so a
/// model trained on T-frame clips can score a full recording.
class Estimator {
 public:
  Estimator(RegionGrid grid, int channels, int horizon);

  /// N(0, 1) pixel weights and zero logits.
  static Estimator random(RegionGrid grid, int channels, int horizon, std::uint64_t seed);

  const RegionGrid& grid() const noexcept { return grid_; }
  int channels() const noexcept { return channels_; }
  int horizon() const noexcept { return int(logits_.cols()); }
  int regions() const noexcept { return grid_.size(); }

  const Vector& weights(int region) const { return weights_.at(std::size_t(region)); }
  Vector& weights(int region) { return weights_.at(std::size_t(region)); }
  const Matrix& logits() const noexcept { return logits_; }
  Matrix& logits() noexcept { return logits_; }

  Eigen::Index parameter_count() const;
  Vector parameters() const;
  void set_parameters(const Vector& flat);

  /// Intermediates kept by forward() for backward().
  struct Trace {
    Matrix raw;      // T x L region sums
    Matrix experts;  // T x L standardized
    Vector scale;    // per-expert sample std (0 when constant)
    Matrix gates;    // L x T softmax weights (tiled)
  };

  Signal forward(const VideoCube& cube, Trace* trace = nullptr) const;
  EstimatorGrad backward(const VideoCube& cube, const Trace& trace, const Vector& grad_signal) const;

  EstimatorGrad zero_grad() const;
  void check_compatible(const VideoCube& cube) const;

 private:
  RegionGrid grid_;
  int channels_;
  /// Contiguous column runs of each region within a frame row.
  struct Run {
    Eigen::Index column;
    Eigen::Index offset;  // into the region's weight vector
    Eigen::Index length;
  };
  std::vector<std::vector<Run>> runs_;
  std::vector<Vector> weights_;
  Matrix logits_;
};

}  // namespace pulseforge
