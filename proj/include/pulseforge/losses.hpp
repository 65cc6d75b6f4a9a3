#pragma once

#include "pulseforge/core_types.hpp"
#include "pulseforge/estimator.hpp"
#include "pulseforge/spectral.hpp"

#include <span>
#include <vector>

namespace pulseforge {

struct LossConfig {
  double temperature = 0.08;
  Eigen::Index pad_len = 0;  // 0 selects default_pad_len(T)
  BandSpec band = default_pulse_band();
  double sharpness = 200.0;  // soft dominant-frequency surrogate
  int k = 4;                 // negatives
  int J = 3;                 // neighbours

  void validate() const;
  Eigen::Index pad_for(Eigen::Index length) const { return pad_len > 0 ? pad_len : default_pad_len(length); }
};

struct LossBreakdown {
  double l_fc = 0.0;
  double l_fr = 0.0;
  double l_fa = 0.0;
  double l_vr = 0.0;
  double total = 0.0;

  static LossBreakdown from_components(double fc, double fr, double fa, double vr);
};

enum class PeakMode { Hard, Soft };

// Scalar forms over precomputed distances / peaks.

/// log(exp(d_pp/tau) / sum_i(exp(d_1i/tau) + exp(d_2i/tau)) + 1), evaluated in log-sum-exp form.
double contrastive_from_distances(double d_pp, std::span<const double> d_p1n, std::span<const double> d_p2n,
                                  double temperature);
double ratio_consistency_from_peaks(double peak_p1, double peak_p2, std::span<const double> peak_n,
                                    std::span<const double> ratios);
double agreement_from_distances(std::span<const double> d_p1b, std::span<const double> d_p2b);

// Signal-level losses.

/// Mean over negatives of the RMS pixel difference to the input.
double l_vr(const VideoCube& input, const std::vector<VideoCube>& negatives);
/// d l_vr / d negative[i] element-wise; zero where the difference vanishes.
std::vector<Matrix> l_vr_grad(const VideoCube& input, const std::vector<VideoCube>& negatives);

double l_fc(const Signal& p1, const Signal& p2, const std::vector<Signal>& negatives, const LossConfig& cfg);
double l_fr(const Signal& p1, const Signal& p2, const std::vector<Signal>& negatives,
            const std::vector<FrequencyRatio>& ratios, const LossConfig& cfg, PeakMode mode);
double l_fa(const Signal& p1, const Signal& p2, const std::vector<Signal>& neighbors, const LossConfig& cfg);

/// Estimated signals for one training sample.
struct SignalBatch {
  Signal p1;
  Signal p2;
  std::vector<Signal> negatives;
  std::vector<FrequencyRatio> ratios;
  std::vector<Signal> neighbors;
};

/// Unit-weight sum of the four losses; `l_vr_value` comes from the cubes.
LossBreakdown total_loss(const SignalBatch& batch, double l_vr_value, const LossConfig& cfg,
                         PeakMode mode = PeakMode::Hard);

/// dL/dsamples for every signal of a SignalBatch.
struct SignalGradients {
  Vector p1;
  Vector p2;
  std::vector<Vector> negatives;
  std::vector<Vector> neighbors;
};

/// Soft-mode loss value and its exact gradient with respect to every signal
/// sample, routed through the explicit DFT basis.
struct SignalLossGrad {
  LossBreakdown value;
  SignalGradients grad;
};
SignalLossGrad signal_loss_and_grad(const SignalBatch& batch, double l_vr_value, const LossConfig& cfg);

/// Cubes for one training sample.
struct CubeBatch {
  VideoCube anchor;
  VideoCube p1;
  VideoCube p2;
  std::vector<VideoCube> negatives;
  std::vector<FrequencyRatio> ratios;
  std::vector<VideoCube> neighbors;
};

struct TotalGrad {
  LossBreakdown value;
  EstimatorGrad grad;
};

/// Soft-mode unit-weight total through the estimator and its gradient with respect
/// to every estimator parameter.
TotalGrad grad_total(const Estimator& est, const CubeBatch& batch, const LossConfig& cfg);

/// Soft-mode total only; the function grad_total differentiates.
LossBreakdown estimator_loss(const Estimator& est, const CubeBatch& batch, const LossConfig& cfg);

}  // namespace pulseforge
