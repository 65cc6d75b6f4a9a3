#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pulseforge {

enum class ErrorKind {
  InvalidArgument,
  DegenerateSpectrum,
  EmptyBand,
  SizeMismatch,
  MalformedHeader,
  OutOfRange,
  TooFewPeaks,
  UndefinedRatio,
  InsufficientFrames,
  NonFinite,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure in the library is reported through this type; `kind()` is the
/// machine-readable category the CLI forwards in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Frame-major pixel storage: one row per frame, columns in (h, w, c) order.
using FrameMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniformly sampled 1-D time series.
class Signal {
 public:
  Signal(Vector samples, double fs);

  const Vector& samples() const noexcept { return samples_; }
  double fs() const noexcept { return fs_; }
  Eigen::Index size() const noexcept { return samples_.size(); }
  double operator[](Eigen::Index i) const { return samples_[i]; }

 private:
  Vector samples_;
  double fs_;
};

/// T x H x W x C pixel intensities in [0, 1].
class VideoCube {
 public:
  VideoCube(int frames, int height, int width, int channels, double fps, FrameMatrix data);

  /// Skips the per-element range scan; for data derived from a valid cube by
  /// permutation, slicing or clamping.
  static VideoCube assume_valid(int frames, int height, int width, int channels, double fps, FrameMatrix data);

  int frames() const noexcept { return frames_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  double fps() const noexcept { return fps_; }
  Eigen::Index pixels_per_frame() const noexcept {
    return Eigen::Index(height_) * width_ * channels_;
  }
  Eigen::Index numel() const noexcept { return Eigen::Index(frames_) * pixels_per_frame(); }

  const FrameMatrix& data() const noexcept { return data_; }
  float at(int t, int h, int w, int c) const { return data_(t, column(h, w, c)); }
  Eigen::Index column(int h, int w, int c) const noexcept {
    return (Eigen::Index(h) * width_ + w) * channels_ + c;
  }

  bool same_shape(const VideoCube& other) const noexcept;

  /// Frames [first, first + count) as a new cube.
  VideoCube clip(int first, int count) const;

  /// Per-frame mean over every pixel and channel, summed in storage order.
  Vector global_mean() const;

 private:
  struct Unchecked {};
  VideoCube(Unchecked, int frames, int height, int width, int channels, double fps, FrameMatrix data);
  void check_shape() const;

  int frames_;
  int height_;
  int width_;
  int channels_;
  double fps_;
  FrameMatrix data_;
};

/// Multiplier applied to a signal's frequency. Always strictly positive.
class FrequencyRatio {
 public:
  explicit FrequencyRatio(double value);
  double value() const noexcept { return value_; }
  bool in_sampling_range() const noexcept;

 private:
  double value_;
};

/// Half-open frequency interval [lo, hi) in Hz.
struct BandSpec {
  double lo;
  double hi;

  BandSpec(double lo_hz, double hi_hz);
  bool contains(double f) const noexcept { return f >= lo && f < hi; }
};

/// Pulse band used by every loss-related spectrum (30 to 180 bpm).
inline BandSpec default_pulse_band() { return {0.5, 3.0}; }

/// Zero mean, unit sample standard deviation. Constant input maps to zeros.
template <typename Derived>
Vector standardize(const Eigen::MatrixBase<Derived>& x) {
  const Eigen::Index n = x.size();
  const double mean = x.mean();
  Vector centered = x.array() - mean;
  if (n < 2) return Vector::Zero(n);
  const double sd = std::sqrt(centered.squaredNorm() / double(n - 1));
  if (!(sd > 1e-14 * (1.0 + std::abs(mean)))) return Vector::Zero(n);
  return centered / sd;
}

Signal detrend_and_standardize(const Signal& s);

/// Smallest power of two >= 4 * length.
Eigen::Index default_pad_len(Eigen::Index length);

}  // namespace pulseforge
