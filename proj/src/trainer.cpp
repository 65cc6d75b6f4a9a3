#include "pulseforge/trainer.hpp"

#include "pulseforge/augment.hpp"
#include "pulseforge/spectral.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace pulseforge {

namespace {

// Seed streams inside one batch.
enum : std::uint64_t { kAnchorStream = 1, kPositiveStream = 2, kRatioStream = 3 };
// Seed streams inside one training run.
enum : std::uint64_t { kInitStream = 11, kProbeStream = 12, kStepStream = 13 };

double rms(const Vector& v) { return v.size() ? std::sqrt(v.squaredNorm() / double(v.size())) : 0.0; }

void accumulate(LossBreakdown& acc, const LossBreakdown& x) {
  acc.l_fc += x.l_fc;
  acc.l_fr += x.l_fr;
  acc.l_fa += x.l_fa;
  acc.l_vr += x.l_vr;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorKind::InvalidArgument, "epochs must be at least 1");
  if (!(learning_rate >= 0.0)) throw Error(ErrorKind::InvalidArgument, "learning rate must be nonnegative");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorKind::InvalidArgument, "momentum must lie in [0, 1)");
  if (clip_length < 2) throw Error(ErrorKind::InvalidArgument, "clip length must be at least 2");
  if (grid_side < 1) throw Error(ErrorKind::InvalidArgument, "grid side must be at least 1");
  loss.validate();
}

TrainingItem training_item(const CorpusItem& item) {
  return {item.cube, {item.spec.pulse, pulse_gain_map(item.spec)}};
}

std::vector<TrainingItem> training_items(const std::vector<CorpusItem>& corpus) {
  std::vector<TrainingItem> out;
  for (const CorpusItem& c : corpus) out.push_back(training_item(c));
  return out;
}

Batch make_batch(const TrainingItem& item, const TrainConfig& cfg, std::uint64_t seed) {
  const int T = cfg.clip_length;
  const int clips = cfg.loss.J + 1;
  if (item.cube.frames() < clips * T)
    throw Error(ErrorKind::InsufficientFrames, "recording has " + std::to_string(item.cube.frames()) +
                                                   " frames, batch needs " + std::to_string(clips * T));
  std::mt19937_64 rng(split_seed(seed, kAnchorStream));
  const int anchor = std::uniform_int_distribution<int>(0, clips - 1)(rng);

  Batch b{anchor, {}, {item.cube.clip(anchor * T, T), item.cube.clip(anchor * T, T),
                       item.cube.clip(anchor * T, T), {}, {}, {}}};
  PositivePair pair = sample_positive_pair(b.cubes.anchor, split_seed(seed, kPositiveStream));
  b.cubes.p1 = std::move(pair.first);
  b.cubes.p2 = std::move(pair.second);
  b.cubes.ratios = sample_ratios(cfg.loss.k, split_seed(seed, kRatioStream));
  PulseTruth clip_truth = item.modulation_source;
  clip_truth.pulse = clip_truth.pulse.shifted(double(anchor * T) / item.cube.fps());
  b.cubes.negatives = make_negatives(b.cubes.anchor, clip_truth, b.cubes.ratios);
  for (int c = 0; c < clips; ++c) {
    if (c == anchor) continue;
    b.neighbor_clips.push_back(c);
    b.cubes.neighbors.push_back(item.cube.clip(c * T, T));
  }
  return b;
}

Estimator initial_estimator(const VideoCube& shape_like, const TrainConfig& cfg) {
  return Estimator::random(partition(shape_like.height(), shape_like.width(), cfg.grid_side, cfg.grid_side),
                           shape_like.channels(), cfg.clip_length, split_seed(cfg.seed, kInitStream));
}

TrainResult train(const std::vector<TrainingItem>& corpus, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  if (corpus.empty()) throw Error(ErrorKind::InvalidArgument, "training corpus is empty");
  return train(corpus, cfg, initial_estimator(corpus.front().cube, cfg), on_epoch);
}

TrainResult train(const std::vector<TrainingItem>& corpus, const TrainConfig& cfg, Estimator est,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (corpus.empty()) throw Error(ErrorKind::InvalidArgument, "training corpus is empty");
  for (const TrainingItem& item : corpus) est.check_compatible(item.cube);
  if (est.horizon() != cfg.clip_length) throw Error(ErrorKind::SizeMismatch, "estimator horizon differs from clip length");

  TrainResult result{est, {}};
  Estimator& model = result.estimator;
  EstimatorGrad velocity = model.zero_grad();
  std::vector<double> weight_rms0, weight_peak(std::size_t(model.regions()), 0.0);
  for (int l = 0; l < model.regions(); ++l) weight_rms0.push_back(std::max(rms(model.weights(l)), 1e-12));
  double logit_peak = 0.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    LossBreakdown probe{};
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const Batch b = make_batch(corpus[i], cfg, split_seed(split_seed(cfg.seed, kProbeStream), i));
      accumulate(probe, estimator_loss(model, b.cubes, cfg.loss));
    }
    const double n = double(corpus.size());
    probe = LossBreakdown::from_components(probe.l_fc / n, probe.l_fr / n, probe.l_fa / n, probe.l_vr / n);
    if (!std::isfinite(probe.total))
      throw Error(ErrorKind::NonFinite, "training diverged: non-finite loss at epoch " + std::to_string(epoch));
    result.trace.push_back(probe);
    if (on_epoch) on_epoch(epoch, probe);

    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const std::uint64_t step = std::uint64_t(epoch) * corpus.size() + i;
      const Batch b = make_batch(corpus[i], cfg, split_seed(split_seed(cfg.seed, kStepStream), step));
      TotalGrad tg;
      try {
        tg = grad_total(model, b.cubes, cfg.loss);
      } catch (const Error& e) {
        throw Error(e.kind(), "training failed at epoch " + std::to_string(epoch) + ", item " +
                                  std::to_string(i) + ": " + e.what());
      }
      // Momentum descent on gradients divided by the largest gradient RMS the
      // block has produced so far, times the block's initial RMS (1 for the
      // zero-initialised logits).
      for (int l = 0; l < model.regions(); ++l) {
        const Vector& g = tg.grad.weights[std::size_t(l)];
        double& peak = weight_peak[std::size_t(l)];
        peak = std::max(peak, rms(g));
        Vector& v = velocity.weights[std::size_t(l)];
        v = cfg.momentum * v + (peak > 0.0 ? weight_rms0[std::size_t(l)] / peak : 0.0) * g;
        model.weights(l) -= cfg.learning_rate * v;
      }
      logit_peak = std::max(logit_peak, rms(tg.grad.logits.reshaped()));
      velocity.logits = cfg.momentum * velocity.logits + (logit_peak > 0.0 ? 1.0 / logit_peak : 0.0) * tg.grad.logits;
      model.logits() -= cfg.learning_rate * velocity.logits;
    }
  }
  return result;
}

std::vector<EvalItem> eval_items(const std::vector<CorpusItem>& corpus) {
  std::vector<EvalItem> out;
  for (const CorpusItem& c : corpus) out.push_back({c.cube, c.spec.pulse.frequency});
  return out;
}

EvaluationReport evaluate(const SignalExtractor& extract, const std::vector<EvalItem>& corpus, int jobs) {
  if (corpus.empty()) throw Error(ErrorKind::InvalidArgument, "evaluation corpus is empty");
  EvaluationReport rep{};
  rep.hr_est.assign(corpus.size(), 0.0);
  detail::parallel_for(int(corpus.size()), jobs, [&](int i) {
    const Signal y = bandpass(extract(corpus[std::size_t(i)].cube), default_pulse_band());
    rep.hr_est[std::size_t(i)] = hr_from_signal(y);
  });
  for (const EvalItem& item : corpus) rep.hr_gt.push_back(60.0 * item.frequency_hz);
  double abs_acc = 0.0, sq_acc = 0.0;
  std::vector<double> err;
  for (std::size_t i = 0; i < rep.hr_est.size(); ++i) {
    err.push_back(rep.hr_est[i] - rep.hr_gt[i]);
    abs_acc += std::abs(err.back());
    sq_acc += err.back() * err.back();
  }
  const double n = double(err.size());
  rep.mae = abs_acc / n;
  rep.rmse = std::sqrt(sq_acc / n);
  try {
    rep.r = pearson(rep.hr_est, rep.hr_gt);
  } catch (const Error&) {
    rep.r = std::nullopt;
  }
  rep.bland_altman = bland_altman(rep.hr_est, rep.hr_gt);
  double var = 0.0;
  for (double e : err) var += (e - rep.bland_altman.bias) * (e - rep.bland_altman.bias);
  rep.std = err.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  return rep;
}

EvaluationReport evaluate(const Estimator& est, const std::vector<EvalItem>& corpus, int jobs) {
  return evaluate([&](const VideoCube& cube) { return est.forward(cube); }, corpus, jobs);
}

}  // namespace pulseforge
