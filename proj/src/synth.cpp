#include "pulseforge/synth.hpp"

#include "pulseforge/experts.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

namespace pulseforge {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double PulseModel::operator()(double t) const {
  return baseline + amplitude * std::sin(kTwoPi * frequency * (t + phase));
}

PulseModel PulseModel::shifted(double seconds) const {
  PulseModel out = *this;
  out.phase += seconds;
  return out;
}

void PulseModel::validate() const {
  if (!(amplitude > 0.0)) throw Error(ErrorKind::InvalidArgument, "pulse amplitude must be positive");
  if (!(frequency >= 0.5 && frequency <= 3.0))
    throw Error(ErrorKind::InvalidArgument, "pulse frequency must lie in [0.5, 3] Hz");
  if (!(baseline >= 0.0 && baseline <= 1.0))
    throw Error(ErrorKind::InvalidArgument, "pulse baseline must lie in [0, 1]");
  if (!std::isfinite(phase)) throw Error(ErrorKind::InvalidArgument, "pulse phase must be finite");
}

int SceneSpec::grid_side() const {
  const int side = int(std::lround(std::sqrt(double(sensitivities.size()))));
  if (side < 1 || std::size_t(side) * std::size_t(side) != sensitivities.size())
    throw Error(ErrorKind::InvalidArgument, "sensitivity count must be a perfect square");
  return side;
}

void SceneSpec::validate_layout() const {
  pulse.validate();
  const int side = grid_side();
  if (side > height || side > width) throw Error(ErrorKind::InvalidArgument, "grid finer than frame");
  for (double s : sensitivities)
    if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorKind::InvalidArgument, "sensitivities must lie in [0, 1]");
  if (!(noise.white_sigma >= 0.0) || !(noise.drift_amplitude >= 0.0) || noise.transient_count < 0)
    throw Error(ErrorKind::InvalidArgument, "noise parameters must be nonnegative");
}

void SceneSpec::validate() const {
  validate_layout();
  if (std::none_of(sensitivities.begin(), sensitivities.end(), [](double s) { return s > 0.0; }))
    throw Error(ErrorKind::InvalidArgument, "at least one region must pulsate");
}

SceneSpec default_scene() {
  SceneSpec spec;
  spec.pulse = {0.03, 1.2, 0.0, 0.0};
  spec.sensitivities = {0.9, 1.0, 0.8, 0.3, 0.0, 0.4, 0.7, 0.2, 1.0};
  spec.noise = {0.02, 0.01, 0.15, 2, 0.03};
  return spec;
}

Signal generate_signal(const PulseModel& model, Eigen::Index samples, double fs) {
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 samples");
  Vector y(samples);
  for (Eigen::Index n = 0; n < samples; ++n) y[n] = model(double(n) / fs);
  return Signal(std::move(y), fs);
}

Vector pulse_gain_map(const SceneSpec& spec) {
  const int side = spec.grid_side();
  const RegionGrid grid = partition(spec.height, spec.width, side, side);
  const int channels = int(kChannelGains.size());
  Vector gain(Eigen::Index(spec.height) * spec.width * channels);
  for (int h = 0; h < spec.height; ++h)
    for (int w = 0; w < spec.width; ++w)
      for (int c = 0; c < channels; ++c)
        gain[(Eigen::Index(h) * spec.width + w) * channels + c] =
            spec.sensitivities[std::size_t(grid.region_of(h, w))] * kChannelGains[std::size_t(c)];
  return gain;
}

GeneratedCube generate_cube(const SceneSpec& spec, int frames, double fps) {
  spec.validate_layout();
  if (frames < 2) throw Error(ErrorKind::InvalidArgument, "need at least 2 frames");
  const int channels = int(kChannelGains.size());
  const Eigen::Index cols = Eigen::Index(spec.height) * spec.width * channels;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Smooth static appearance in roughly [0.3, 0.6].
  const double fx = 0.5 + unit(rng), fy = 0.5 + unit(rng), shade_phase = kTwoPi * unit(rng);
  constexpr std::array<double, 3> kChannelOffset{0.05, 0.0, -0.05};
  Vector base(cols);
  for (int h = 0; h < spec.height; ++h)
    for (int w = 0; w < spec.width; ++w) {
      const double shade = 0.45 + 0.1 * std::sin(kTwoPi * (fx * h / spec.height + fy * w / spec.width) + shade_phase);
      for (int c = 0; c < channels; ++c)
        base[(Eigen::Index(h) * spec.width + w) * channels + c] = shade + kChannelOffset[std::size_t(c)];
    }

  // Global illumination drift and region-local motion ramps.
  const int side = spec.grid_side();
  const RegionGrid grid = partition(spec.height, spec.width, side, side);
  const double drift_phase = kTwoPi * unit(rng);
  Matrix transient = Matrix::Zero(frames, grid.size());
  for (int m = 0; m < spec.noise.transient_count; ++m) {
    const int start = int(unit(rng) * frames) % frames;
    const int length = 5 + int(unit(rng) * 10.0);
    const int region = int(unit(rng) * grid.size()) % grid.size();
    const double amp = spec.noise.transient_amplitude * (2.0 * unit(rng) - 1.0);
    for (int i = 0; i < length && start + i < frames; ++i)
      transient(start + i, region) += amp * double(i + 1) / double(length);
  }
  std::vector<int> column_region(static_cast<std::size_t>(cols));
  for (int h = 0; h < spec.height; ++h)
    for (int w = 0; w < spec.width; ++w)
      for (int c = 0; c < channels; ++c)
        column_region[std::size_t((Eigen::Index(h) * spec.width + w) * channels + c)] = grid.region_of(h, w);

  const Vector gain = pulse_gain_map(spec);
  const Signal truth = generate_signal(spec.pulse, frames, fps);
  FrameMatrix data(frames, cols);
  for (int t = 0; t < frames; ++t) {
    const double time = double(t) / fps;
    const double drift = spec.noise.drift_amplitude * std::sin(kTwoPi * spec.noise.drift_frequency * time + drift_phase);
    const double pulse = truth[t];
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v = base[j] + gain[j] * pulse + drift + transient(t, column_region[std::size_t(j)]);
      if (spec.noise.white_sigma > 0.0) v += spec.noise.white_sigma * gauss(rng);
      data(t, j) = float(std::clamp(v, 0.0, 1.0));
    }
  }
  return {VideoCube(frames, spec.height, spec.width, channels, fps, std::move(data)), truth};
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<CorpusItem> build_corpus(int n, double hr_lo_bpm, double hr_hi_bpm,
                                     const SceneSpec& scene_template, int frames, double fps,
                                     std::uint64_t seed, int jobs) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "corpus needs at least one item");
  if (!(hr_lo_bpm <= hr_hi_bpm) || !(hr_lo_bpm >= 30.0) || !(hr_hi_bpm <= 180.0))
    throw Error(ErrorKind::InvalidArgument, "heart-rate range must be a nonempty subset of [30, 180] bpm");
  if (std::none_of(scene_template.sensitivities.begin(), scene_template.sensitivities.end(),
                   [](double s) { return s > 0.0; }))
    throw Error(ErrorKind::InvalidArgument, "at least one region must pulsate");
  std::vector<std::optional<CorpusItem>> slots(static_cast<std::size_t>(n));
  detail::parallel_for(n, jobs, [&](int i) {
    std::mt19937_64 rng(split_seed(seed, std::uint64_t(i)));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SceneSpec spec = scene_template;
    const double bpm = hr_lo_bpm == hr_hi_bpm ? hr_lo_bpm : hr_lo_bpm + (hr_hi_bpm - hr_lo_bpm) * unit(rng);
    spec.pulse.frequency = bpm / 60.0;
    spec.pulse.phase = unit(rng) / spec.pulse.frequency;
    spec.seed = rng();
    GeneratedCube g = generate_cube(spec, frames, fps);
    slots[std::size_t(i)].emplace(CorpusItem{std::move(spec), std::move(g.cube), std::move(g.truth)});
  });
  std::vector<CorpusItem> corpus;
  corpus.reserve(std::size_t(n));
  for (auto& s : slots) corpus.push_back(std::move(*s));
  return corpus;
}

}  // namespace pulseforge
