#pragma once

#include "pulseforge/core_types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pulseforge {

inline constexpr double kRefractorySeconds = 0.33;
inline constexpr double kHrvResampleHz = 4.0;
inline const BandSpec kLfBand{0.04, 0.15};
inline const BandSpec kHfBand{0.15, 0.4};
inline const BandSpec kRespBand{0.1, 0.5};

struct PeakTrain {
  std::vector<Eigen::Index> indices;
  /// Peak times in seconds, refined to sub-sample precision.
  std::vector<double> times;
  /// Interbeat intervals in seconds, ibis[i] = times[i + 1] - times[i].
  std::vector<double> ibis;

  /// Peak train whose first beat is at `start` and whose intervals are `ibis`.
  static PeakTrain from_intervals(const std::vector<double>& ibis, double start = 0.0);
};

/// Local maxima above mean + 0.3 std, at least kRefractorySeconds apart
/// (the higher peak wins a conflict). Peak times use parabolic refinement.
PeakTrain detect_peaks(const Signal& s);

/// 60 / mean(ibi); falls back to 60 * dominant frequency when peak detection fails.
double hr_from_signal(const Signal& s);

struct HrvBands {
  double lf;
  double hf;
  double lf_hf;
};

/// The interbeat series resampled at 4 Hz, as a signal.
Signal ibi_series(const PeakTrain& pt);

/// Normalized-unit LF/HF powers of the resampled interbeat series (lf + hf = 1).
HrvBands hrv_lf_hf(const PeakTrain& pt);

/// Dominant frequency of the resampled interbeat series in [0.1, 0.5) Hz.
double rf_from_peaks(const PeakTrain& pt);
double rf_from_signal(const Signal& s);

struct VitalsReport {
  double hr;
  bool hr_reliable;
  std::optional<HrvBands> hrv;
  std::optional<double> rf;
  std::vector<std::string> notes;
};

VitalsReport vitals_report(const Signal& s);

struct AgreementMetrics {
  double mae;
  double rmse;
  double r;
  double std;  // sample std (n-1) of est - gt
};

double pearson(const std::vector<double>& a, const std::vector<double>& b);
AgreementMetrics metrics(const std::vector<double>& est, const std::vector<double>& gt);

struct BlandAltman {
  struct Row {
    double mean;
    double diff;
  };
  std::vector<Row> rows;
  double bias;
  double lower;  // bias - 1.96 std(diff)
  double upper;  // bias + 1.96 std(diff)
};

BlandAltman bland_altman(const std::vector<double>& est, const std::vector<double>& gt);

}  // namespace pulseforge
