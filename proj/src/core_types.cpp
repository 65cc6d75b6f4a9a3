#include "pulseforge/core_types.hpp"

#include <string>

namespace pulseforge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DegenerateSpectrum: return "degenerate_spectrum";
    case ErrorKind::EmptyBand: return "empty_band";
    case ErrorKind::SizeMismatch: return "size_mismatch";
    case ErrorKind::MalformedHeader: return "malformed_header";
    case ErrorKind::OutOfRange: return "out_of_range";
    case ErrorKind::TooFewPeaks: return "too_few_peaks";
    case ErrorKind::UndefinedRatio: return "undefined_ratio";
    case ErrorKind::InsufficientFrames: return "insufficient_frames";
    case ErrorKind::NonFinite: return "non_finite";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

Signal::Signal(Vector samples, double fs) : samples_(std::move(samples)), fs_(fs) {
  if (samples_.size() < 2)
    throw Error(ErrorKind::InvalidArgument, "signal needs at least 2 samples");
  if (!(fs_ > 0.0) || !std::isfinite(fs_))
    throw Error(ErrorKind::InvalidArgument, "sampling rate must be positive");
  if (!samples_.allFinite()) throw Error(ErrorKind::NonFinite, "signal contains NaN or Inf");
}

VideoCube::VideoCube(Unchecked, int frames, int height, int width, int channels, double fps, FrameMatrix data)
    : frames_(frames), height_(height), width_(width), channels_(channels), fps_(fps),
      data_(std::move(data)) {
  check_shape();
}

VideoCube::VideoCube(int frames, int height, int width, int channels, double fps, FrameMatrix data)
    : VideoCube(Unchecked{}, frames, height, width, channels, fps, std::move(data)) {
  // NaN fails both comparisons.
  if (!(data_.array() >= 0.0f && data_.array() <= 1.0f).all()) {
    const float* p = data_.data();
    Eigen::Index i = 0;
    while (p[i] >= 0.0f && p[i] <= 1.0f) ++i;
    throw Error(ErrorKind::OutOfRange, "cube value outside [0,1] at element " + std::to_string(i));
  }
}

VideoCube VideoCube::assume_valid(int frames, int height, int width, int channels, double fps, FrameMatrix data) {
  return VideoCube(Unchecked{}, frames, height, width, channels, fps, std::move(data));
}

void VideoCube::check_shape() const {
  if (frames_ < 2) throw Error(ErrorKind::InvalidArgument, "cube needs at least 2 frames");
  if (height_ < 1 || width_ < 1 || channels_ < 1)
    throw Error(ErrorKind::InvalidArgument, "cube dimensions must be positive");
  if (!(fps_ > 0.0) || !std::isfinite(fps_))
    throw Error(ErrorKind::InvalidArgument, "fps must be positive");
  if (data_.rows() != frames_ || data_.cols() != pixels_per_frame())
    throw Error(ErrorKind::SizeMismatch, "cube data does not match T*H*W*C");
}

bool VideoCube::same_shape(const VideoCube& other) const noexcept {
  return frames_ == other.frames_ && height_ == other.height_ && width_ == other.width_ &&
         channels_ == other.channels_;
}

VideoCube VideoCube::clip(int first, int count) const {
  if (first < 0 || count < 2 || first + count > frames_)
    throw Error(ErrorKind::InsufficientFrames, "clip range exceeds cube frames");
  return assume_valid(count, height_, width_, channels_, fps_, data_.middleRows(first, count));
}

Vector VideoCube::global_mean() const {
  Vector out(frames_);
  const Eigen::Index n = pixels_per_frame();
  for (int t = 0; t < frames_; ++t) {
    const float* row = data_.data() + Eigen::Index(t) * n;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc += double(row[i]);
    out[t] = acc / double(n);
  }
  return out;
}

FrequencyRatio::FrequencyRatio(double value) : value_(value) {
  if (!(value_ > 0.0) || !std::isfinite(value_))
    throw Error(ErrorKind::InvalidArgument, "frequency ratio must be positive");
}

bool FrequencyRatio::in_sampling_range() const noexcept {
  return (value_ > 0.3 && value_ < 0.8) || (value_ > 1.2 && value_ < 1.7);
}

BandSpec::BandSpec(double lo_hz, double hi_hz) : lo(lo_hz), hi(hi_hz) {
  if (!(lo >= 0.0) || !(hi > lo) || !std::isfinite(hi))
    throw Error(ErrorKind::InvalidArgument, "band requires 0 <= lo < hi");
}

Signal detrend_and_standardize(const Signal& s) { return Signal(standardize(s.samples()), s.fs()); }

Eigen::Index default_pad_len(Eigen::Index length) {
  Eigen::Index n = 1;
  while (n < 4 * length) n <<= 1;
  return n;
}

}  // namespace pulseforge
