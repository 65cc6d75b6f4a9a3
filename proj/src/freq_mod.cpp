#include "pulseforge/freq_mod.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace pulseforge {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

ModulationVector analytic_modulation_vector(const PulseModel& model, FrequencyRatio r, Eigen::Index samples,
                                            double fs, double clamp) {
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 samples");
  ModulationVector m{Vector(samples), r, std::vector<bool>(std::size_t(samples), false)};
  for (Eigen::Index n = 0; n < samples; ++n) {
    const double theta = kTwoPi * model.frequency * (double(n) / fs + model.phase);
    const double den = std::sin(theta);
    const double num = std::sin(r.value() * theta);
    if (std::abs(den) > kModulationEpsilon) {
      m.values[n] = num / den;
      continue;
    }
    // sin(r x)/sin(x) near x = j*pi tends to r*cos(r*j*pi)/cos(j*pi); away from
    // integer r the numerator stays finite and the ratio blows up with the
    // sign of num/den.
    double sign;
    if (std::abs(num) > kModulationEpsilon) {
      sign = (num > 0) == (den >= 0) ? 1.0 : -1.0;
    } else {
      const double j = std::round(theta / std::numbers::pi);
      sign = (r.value() * std::cos(r.value() * j * std::numbers::pi) * std::cos(j * std::numbers::pi)) >= 0 ? 1.0 : -1.0;
    }
    m.values[n] = sign * clamp;
    m.clamped[std::size_t(n)] = true;
  }
  return m;
}

Signal modulate_parametric(const PulseModel& model, FrequencyRatio r, Eigen::Index samples, double fs) {
  PulseModel scaled = model;
  scaled.frequency = model.frequency * r.value();
  Vector y(samples);
  for (Eigen::Index n = 0; n < samples; ++n) y[n] = scaled(double(n) / fs);
  return Signal(std::move(y), fs);
}

Signal modulate_resample(const Signal& s, FrequencyRatio r, Eigen::Index out_len) {
  const Eigen::Index n = s.size();
  if (out_len < 2) throw Error(ErrorKind::InvalidArgument, "output needs at least 2 samples");
  if (double(n - 1) / r.value() < 1.0)
    throw Error(ErrorKind::InvalidArgument, "ratio leaves fewer than 2 effective source samples");
  const double last = double(n - 1);
  Vector out(out_len);
  for (Eigen::Index i = 0; i < out_len; ++i) {
    double pos = double(i) * r.value();
    // Reflect about the end points until inside [0, last].
    const double period = 2.0 * last;
    pos = std::fmod(pos, period);
    if (pos > last) pos = period - pos;
    const auto lo = Eigen::Index(std::floor(pos));
    const Eigen::Index hi = std::min(lo + 1, n - 1);
    const double frac = pos - double(lo);
    out[i] = frac == 0.0 ? s[lo] : (1.0 - frac) * s[lo] + frac * s[hi];
  }
  return Signal(std::move(out), s.fs());
}

std::vector<FrequencyRatio> sample_ratios(int k, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "need at least one ratio");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<FrequencyRatio> out;
  out.reserve(std::size_t(k));
  while (int(out.size()) < k) {
    // Both intervals have length 0.5, so a uniform draw over total length 1
    // maps onto them piecewise.
    const double u = unit(rng);
    const double v = u < 0.5 ? 0.3 + u : 1.2 + (u - 0.5);
    const FrequencyRatio r(v);
    if (r.in_sampling_range()) out.push_back(r);  // rejects the open-interval end points
  }
  return out;
}

std::vector<VideoCube> make_negatives(const VideoCube& cube, const PulseTruth& truth,
                                      const std::vector<FrequencyRatio>& ratios) {
  if (ratios.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one ratio");
  if (truth.gain.size() != cube.pixels_per_frame())
    throw Error(ErrorKind::SizeMismatch, "pulse gain map does not match cube frame size");
  const Signal original = modulate_parametric(truth.pulse, FrequencyRatio(1.0), cube.frames(), cube.fps());
  const Eigen::VectorXf gain = truth.gain.cast<float>();
  std::vector<VideoCube> out;
  out.reserve(ratios.size());
  for (const FrequencyRatio& r : ratios) {
    const Signal scaled = modulate_parametric(truth.pulse, r, cube.frames(), cube.fps());
    const Eigen::VectorXf delta = (scaled.samples() - original.samples()).cast<float>();
    FrameMatrix data = cube.data();
    for (int t = 0; t < cube.frames(); ++t) {
      if (delta[t] == 0.0f) continue;
      data.row(t) = (data.row(t) + delta[t] * gain.transpose()).cwiseMax(0.0f).cwiseMin(1.0f);
    }
    out.push_back(VideoCube::assume_valid(cube.frames(), cube.height(), cube.width(), cube.channels(), cube.fps(),
                                          std::move(data)));
  }
  return out;
}

}  // namespace pulseforge
