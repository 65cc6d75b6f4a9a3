#include "pulseforge/vitals.hpp"

#include "pulseforge/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pulseforge {

namespace {

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / double(v.size() - 1));
}

void check_pair(const std::vector<double>& est, const std::vector<double>& gt) {
  if (est.empty() || est.size() != gt.size())
    throw Error(ErrorKind::SizeMismatch, "estimate and ground truth need equal nonzero lengths");
}

}  // namespace

PeakTrain PeakTrain::from_intervals(const std::vector<double>& ibis, double start) {
  PeakTrain pt;
  pt.ibis = ibis;
  double t = start;
  pt.times.push_back(t);
  for (double ibi : ibis) pt.times.push_back(t += ibi);
  return pt;
}

PeakTrain detect_peaks(const Signal& s) {
  const Eigen::Index n = s.size();
  if (double(n) < 2.0 * s.fs()) throw Error(ErrorKind::InvalidArgument, "peak detection needs at least 2 s of signal");
  const Vector& x = s.samples();
  const double mean = x.mean();
  const double sd = std::sqrt((x.array() - mean).square().sum() / double(n - 1));
  const double threshold = mean + 0.3 * sd;
  const double refractory = kRefractorySeconds * s.fs();

  std::vector<Eigen::Index> peaks;
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    if (!(x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] > threshold)) continue;
    if (!peaks.empty() && double(i - peaks.back()) < refractory) {
      if (x[i] > x[peaks.back()]) peaks.back() = i;
      continue;
    }
    peaks.push_back(i);
  }
  if (peaks.size() < 2) throw Error(ErrorKind::TooFewPeaks, "fewer than 2 peaks found");

  PeakTrain pt;
  pt.indices = peaks;
  for (Eigen::Index i : peaks) {
    // Vertex of the parabola through the three samples around the maximum.
    const double a = x[i - 1], b = x[i], c = x[i + 1];
    const double den = a - 2.0 * b + c;
    const double offset = den < 0.0 ? std::clamp(0.5 * (a - c) / den, -0.5, 0.5) : 0.0;
    pt.times.push_back((double(i) + offset) / s.fs());
  }
  for (std::size_t i = 1; i < pt.times.size(); ++i) pt.ibis.push_back(pt.times[i] - pt.times[i - 1]);
  return pt;
}

double hr_from_signal(const Signal& s) {
  try {
    const PeakTrain pt = detect_peaks(s);
    const double mean_ibi = std::accumulate(pt.ibis.begin(), pt.ibis.end(), 0.0) / double(pt.ibis.size());
    return 60.0 / mean_ibi;
  } catch (const Error& peak_failure) {
    try {
      return 60.0 * dominant_frequency(periodogram(s, default_pulse_band()));
    } catch (const Error& spectral_failure) {
      throw Error(ErrorKind::TooFewPeaks, std::string("heart rate unavailable: ") + peak_failure.what() +
                                              "; " + spectral_failure.what());
    }
  }
}

Signal ibi_series(const PeakTrain& pt) {
  if (pt.ibis.size() < 2) throw Error(ErrorKind::TooFewPeaks, "need at least 2 interbeat intervals");
  // Each interval is stamped at the beat that closes it.
  const double t0 = pt.times[1];
  const double t1 = pt.times.back();
  const auto count = Eigen::Index(std::floor((t1 - t0) * kHrvResampleHz)) + 1;
  if (count < 2) throw Error(ErrorKind::TooFewPeaks, "interbeat series too short to resample");
  Vector out(count);
  std::size_t seg = 1;
  for (Eigen::Index i = 0; i < count; ++i) {
    const double t = t0 + double(i) / kHrvResampleHz;
    while (seg + 1 < pt.times.size() - 1 && pt.times[seg + 1] < t) ++seg;
    const double ta = pt.times[seg], tb = pt.times[seg + 1];
    const double va = pt.ibis[seg - 1], vb = pt.ibis[seg];
    const double u = std::clamp((t - ta) / (tb - ta), 0.0, 1.0);
    out[i] = va + u * (vb - va);
  }
  return Signal(std::move(out), kHrvResampleHz);
}

HrvBands hrv_lf_hf(const PeakTrain& pt) {
  if (pt.ibis.size() < 8) throw Error(ErrorKind::TooFewPeaks, "HRV needs at least 8 interbeat intervals");
  const PowerSpectrum ps = periodogram(ibi_series(pt), BandSpec(kLfBand.lo, kHfBand.hi));
  const double lf_raw = band_power(ps, kLfBand);
  const double hf_raw = band_power(ps, kHfBand);
  const double total = lf_raw + hf_raw;
  const double lf = lf_raw / total, hf = hf_raw / total;
  if (!(hf > 0.0)) throw Error(ErrorKind::UndefinedRatio, "no HF power; LF/HF undefined");
  return {lf, hf, lf / hf};
}

double rf_from_peaks(const PeakTrain& pt) {
  if (pt.ibis.size() < 8) throw Error(ErrorKind::TooFewPeaks, "RF needs at least 8 interbeat intervals");
  return dominant_frequency(periodogram(ibi_series(pt), kRespBand));
}

double rf_from_signal(const Signal& s) { return rf_from_peaks(detect_peaks(s)); }

VitalsReport vitals_report(const Signal& s) {
  VitalsReport rep{hr_from_signal(s), true, std::nullopt, std::nullopt, {}};
  rep.hr_reliable = rep.hr >= 30.0 && rep.hr <= 240.0;
  if (!rep.hr_reliable) rep.notes.push_back("hr outside [30, 240] bpm");
  try {
    const PeakTrain pt = detect_peaks(s);
    try {
      rep.hrv = hrv_lf_hf(pt);
    } catch (const Error& e) {
      rep.notes.push_back(std::string("hrv: ") + e.what());
    }
    try {
      rep.rf = rf_from_peaks(pt);
    } catch (const Error& e) {
      rep.notes.push_back(std::string("rf: ") + e.what());
    }
  } catch (const Error& e) {
    rep.notes.push_back(std::string("peaks: ") + e.what());
  }
  return rep;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  check_pair(a, b);
  const double n = double(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw Error(ErrorKind::InvalidArgument, "Pearson r undefined for constant input");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

AgreementMetrics metrics(const std::vector<double>& est, const std::vector<double>& gt) {
  check_pair(est, gt);
  std::vector<double> err(est.size());
  double abs_acc = 0.0, sq_acc = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    err[i] = est[i] - gt[i];
    abs_acc += std::abs(err[i]);
    sq_acc += err[i] * err[i];
  }
  const double n = double(est.size());
  return {abs_acc / n, std::sqrt(sq_acc / n), pearson(est, gt), sample_std(err)};
}

BlandAltman bland_altman(const std::vector<double>& est, const std::vector<double>& gt) {
  check_pair(est, gt);
  BlandAltman ba;
  std::vector<double> diffs;
  for (std::size_t i = 0; i < est.size(); ++i) {
    ba.rows.push_back({0.5 * (est[i] + gt[i]), est[i] - gt[i]});
    diffs.push_back(est[i] - gt[i]);
  }
  ba.bias = std::accumulate(diffs.begin(), diffs.end(), 0.0) / double(diffs.size());
  const double sd = sample_std(diffs);
  ba.lower = ba.bias - 1.96 * sd;
  ba.upper = ba.bias + 1.96 * sd;
  return ba;
}

}  // namespace pulseforge
