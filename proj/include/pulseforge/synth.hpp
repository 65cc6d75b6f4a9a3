#pragma once

#include "pulseforge/core_types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace pulseforge {

/// y(t) = baseline + amplitude * sin(2*pi*frequency*(t + phase)).
struct PulseModel {
  double amplitude = 1.0;
  double frequency = 1.0;  // Hz
  double phase = 0.0;      // seconds
  double baseline = 0.0;

  double operator()(double t) const;
  /// Same waveform observed `seconds` later.
  PulseModel shifted(double seconds) const;
  /// Throws InvalidArgument unless A > 0, F in [0.5, 3] Hz and B in [0, 1].
  void validate() const;
};

struct NoiseSpec {
  double white_sigma = 0.0;
  double drift_amplitude = 0.0;
  double drift_frequency = 0.2;  // Hz
  int transient_count = 0;
  double transient_amplitude = 0.05;
};

struct SceneSpec {
  PulseModel pulse;
  /// One entry per region, row-major over a grid_side x grid_side partition.
  std::vector<double> sensitivities;
  NoiseSpec noise;
  int height = 64;
  int width = 64;
  std::uint64_t seed = 0;

  int grid_side() const;
  /// Shape, range and noise checks plus at least one pulsatile region.
  void validate() const;
  /// validate() without the pulsatile-region requirement; generate_cube
  /// accepts pulse-free control scenes.
  void validate_layout() const;
};

/// Channel gains (R, G, B); green carries the strongest pulsation.
inline constexpr std::array<double, 3> kChannelGains{0.6, 1.0, 0.4};

/// Scene used by the trainer and the acceptance suite: 3x3 regions with a
/// mix of strongly, weakly and non-pulsatile skin.
SceneSpec default_scene();

Signal generate_signal(const PulseModel& model, Eigen::Index samples, double fs);

/// Per-column multiplier of the pulse in a frame: sensitivity(region) * channel gain.
Vector pulse_gain_map(const SceneSpec& spec);

struct GeneratedCube {
  VideoCube cube;
  Signal truth;
};

/// pixel(t,h,w,c) = clamp(base + gain(h,w,c) * pulse(t) + noise(t,h,w,c), 0, 1).
/// A pure function of (spec, frames, fps).
GeneratedCube generate_cube(const SceneSpec& spec, int frames, double fps);

struct CorpusItem {
  SceneSpec spec;
  VideoCube cube;
  Signal truth;
};

/// Per-item seed derivation shared by every corpus-parallel path.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

/// `n` scenes built from `scene_template` with pulse frequencies drawn
/// uniformly from [hr_lo_bpm, hr_hi_bpm] / 60 and random phase.
std::vector<CorpusItem> build_corpus(int n, double hr_lo_bpm, double hr_hi_bpm,
                                     const SceneSpec& scene_template, int frames, double fps,
                                     std::uint64_t seed, int jobs = 1);

}  // namespace pulseforge
