#pragma once

#include "pulseforge/core_types.hpp"
#include "pulseforge/synth.hpp"

#include <cstdint>
#include <vector>

namespace pulseforge {

/// Per-sample multiplier m such that m * y carries the scaled frequency.
struct ModulationVector {
  Vector values;
  FrequencyRatio ratio;
  /// True where |sin| fell below the singularity threshold and the value was clamped.
  std::vector<bool> clamped;
};

inline constexpr double kModulationEpsilon = 1e-3;

/// values[n] = sin(2*pi*r*F*(t_n + phi)) / sin(2*pi*F*(t_n + phi)). Near zeros of
/// the denominator the value is clamped to +-clamp with the sign of the limit.
ModulationVector analytic_modulation_vector(const PulseModel& model, FrequencyRatio r, Eigen::Index samples,
                                            double fs, double clamp = 10.0);

/// A*sin(2*pi*r*F*(t + phi)) + B.
Signal modulate_parametric(const PulseModel& model, FrequencyRatio r, Eigen::Index samples, double fs);

/// out[n] = s(n*r) by linear interpolation, reflecting about the last sample
/// when n*r runs past the end.
Signal modulate_resample(const Signal& s, FrequencyRatio r, Eigen::Index out_len);

/// Uniform over (0.3, 0.8) U (1.2, 1.7).
std::vector<FrequencyRatio> sample_ratios(int k, std::uint64_t seed);

/// What the negative generator needs to re-embed a pulse: the embedded
/// waveform and its per-column gain (see pulse_gain_map).
struct PulseTruth {
  PulseModel pulse;
  Vector gain;
};

/// For each ratio, the cube with its embedded pulse replaced by the
/// frequency-scaled pulse; appearance and noise realization are untouched.
std::vector<VideoCube> make_negatives(const VideoCube& cube, const PulseTruth& truth,
                                      const std::vector<FrequencyRatio>& ratios);

}  // namespace pulseforge
