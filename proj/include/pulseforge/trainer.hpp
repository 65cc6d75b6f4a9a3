#pragma once

#include "pulseforge/estimator.hpp"
#include "pulseforge/freq_mod.hpp"
#include "pulseforge/losses.hpp"
#include "pulseforge/synth.hpp"
#include "pulseforge/vitals.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace pulseforge {

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  int clip_length = 150;
  int grid_side = 3;
  LossConfig loss;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A recording as the trainer sees it: the pixels, and the pulse embedding
/// that the analytic negative generator re-modulates. No ground-truth
/// signal is carried.
struct TrainingItem {
  VideoCube cube;
  PulseTruth modulation_source;
};

TrainingItem training_item(const CorpusItem& item);
std::vector<TrainingItem> training_items(const std::vector<CorpusItem>& corpus);

struct Batch {
  int anchor_clip;
  std::vector<int> neighbor_clips;
  CubeBatch cubes;
};

/// Cut the recording into J + 1 clips of T frames; one random clip is the
/// anchor, the rest are its neighbours. Positives come from two spatial ops,
/// negatives from k sampled ratios.
Batch make_batch(const TrainingItem& item, const TrainConfig& cfg, std::uint64_t seed);

struct TrainResult {
  Estimator estimator;
  /// Per epoch, the mean loss over a fixed probe batch per item, measured
  /// with the parameters at the start of the epoch.
  std::vector<LossBreakdown> trace;
};

using EpochCallback = std::function<void(int epoch, const LossBreakdown&)>;

TrainResult train(const std::vector<TrainingItem>& corpus, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});
/// Continue from `init` (used by tests that need a specific start point).
TrainResult train(const std::vector<TrainingItem>& corpus, const TrainConfig& cfg, Estimator init,
                  const EpochCallback& on_epoch = {});

Estimator initial_estimator(const VideoCube& shape_like, const TrainConfig& cfg);

/// Held-out recording with its reference frequency.
struct EvalItem {
  VideoCube cube;
  double frequency_hz;
};

std::vector<EvalItem> eval_items(const std::vector<CorpusItem>& corpus);

struct EvaluationReport {
  std::vector<double> hr_est;
  std::vector<double> hr_gt;
  double mae;
  double rmse;
  std::optional<double> r;  // undefined when either list is constant
  double std;
  BlandAltman bland_altman;
};

using SignalExtractor = std::function<Signal(const VideoCube&)>;

/// Band-limits each extracted signal to the pulse band and reads HR from it.
/// Items are scored on up to `jobs` threads; `extract` must be thread-safe.
EvaluationReport evaluate(const SignalExtractor& extract, const std::vector<EvalItem>& corpus, int jobs = 1);
EvaluationReport evaluate(const Estimator& est, const std::vector<EvalItem>& corpus, int jobs = 1);

}  // namespace pulseforge
