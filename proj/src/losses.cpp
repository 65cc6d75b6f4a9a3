#include "pulseforge/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pulseforge {

namespace {

double log_sum_exp(std::span<const double> a, std::span<const double> b, double scale) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : a) m = std::max(m, v * scale);
  for (double v : b) m = std::max(m, v * scale);
  double acc = 0.0;
  for (double v : a) acc += std::exp(v * scale - m);
  for (double v : b) acc += std::exp(v * scale - m);
  return m + std::log(acc);
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }
double sign(double x) { return double(x > 0) - double(x < 0); }

void check_batch(const SignalBatch& b, const LossConfig& cfg) {
  cfg.validate();
  if (b.negatives.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one negative");
  if (b.neighbors.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one neighbour");
  if (b.ratios.size() != b.negatives.size())
    throw Error(ErrorKind::SizeMismatch, "ratios and negatives differ in count");
  auto same = [&](const Signal& s) { return s.size() == b.p1.size() && s.fs() == b.p1.fs(); };
  bool ok = same(b.p2);
  for (const Signal& s : b.negatives) ok = ok && same(s);
  for (const Signal& s : b.neighbors) ok = ok && same(s);
  if (!ok) throw Error(ErrorKind::SizeMismatch, "all signals must share length and sampling rate");
}

double distance(const Vector& a, const Vector& b) { return (a - b).squaredNorm() / double(a.size()); }

double frame_rms(const VideoCube& a, const VideoCube& b) {
  double acc = 0.0;
  const float* pa = a.data().data();
  const float* pb = b.data().data();
  for (Eigen::Index i = 0; i < a.numel(); ++i) {
    const double d = double(pa[i]) - double(pb[i]);
    acc += d * d;
  }
  return std::sqrt(acc / double(a.numel()));
}

SignalLossGrad loss_and_grad_with(const SignalBatch& b, double l_vr_value, const LossConfig& cfg,
                                  const SpectralBasis& basis) {
  check_batch(b, cfg);
  const std::size_t k = b.negatives.size();
  const std::size_t J = b.neighbors.size();
  const double K = double(basis.bins());
  const double tau = cfg.temperature;

  const Vector s1 = basis.psd(b.p1.samples());
  const Vector s2 = basis.psd(b.p2.samples());
  std::vector<Vector> sn, sb;
  for (const Signal& s : b.negatives) sn.push_back(basis.psd(s.samples()));
  for (const Signal& s : b.neighbors) sb.push_back(basis.psd(s.samples()));

  // Spectrum-space gradients accumulated below.
  Vector g1 = Vector::Zero(basis.bins()), g2 = g1;
  std::vector<Vector> gn(k, Vector::Zero(basis.bins())), gb(J, Vector::Zero(basis.bins()));

  // Contrastive term.
  const double d_pp = distance(s1, s2);
  std::vector<double> d1n(k), d2n(k);
  for (std::size_t i = 0; i < k; ++i) {
    d1n[i] = distance(s1, sn[i]);
    d2n[i] = distance(s2, sn[i]);
  }
  const double lse = log_sum_exp(d1n, d2n, 1.0 / tau);
  const double x = d_pp / tau - lse;
  const double fc = softplus(x);
  {
    const double sg = sigmoid(x);
    const Vector dd_pp = 2.0 * (s1 - s2) / K;
    g1 += sg / tau * dd_pp;
    g2 -= sg / tau * dd_pp;
    for (std::size_t i = 0; i < k; ++i) {
      const double w1 = std::exp(d1n[i] / tau - lse), w2 = std::exp(d2n[i] / tau - lse);
      const Vector dd1 = 2.0 * (s1 - sn[i]) / K, dd2 = 2.0 * (s2 - sn[i]) / K;
      g1 -= sg * w1 / tau * dd1;
      gn[i] += sg * w1 / tau * dd1;
      g2 -= sg * w2 / tau * dd2;
      gn[i] += sg * w2 / tau * dd2;
    }
  }

  // Ratio consistency through the soft peak.
  const Vector& f = basis.freqs();
  const double beta = cfg.sharpness;
  const double P1 = soft_peak(f, s1, beta), P2 = soft_peak(f, s2, beta);
  if (!(P1 > 0.0) || !(P2 > 0.0)) throw Error(ErrorKind::UndefinedRatio, "zero dominant frequency");
  double fr = 0.0, dP1 = 0.0, dP2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double Pn = soft_peak(f, sn[i], beta);
    const double a = Pn / P1 - b.ratios[i].value(), c = Pn / P2 - b.ratios[i].value();
    fr += std::abs(a) + std::abs(c);
    const double scale = 1.0 / (2.0 * double(k));
    const double dPn = scale * (sign(a) / P1 + sign(c) / P2);
    dP1 -= scale * sign(a) * Pn / (P1 * P1);
    dP2 -= scale * sign(c) * Pn / (P2 * P2);
    gn[i] += dPn * soft_peak_grad(f, sn[i], beta);
  }
  fr /= 2.0 * double(k);
  g1 += dP1 * soft_peak_grad(f, s1, beta);
  g2 += dP2 * soft_peak_grad(f, s2, beta);

  // Cross-video agreement.
  double fa = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    fa += distance(s1, sb[j]) + distance(s2, sb[j]);
    const double scale = 1.0 / (2.0 * double(J));
    const Vector d1 = 2.0 * (s1 - sb[j]) / K, d2 = 2.0 * (s2 - sb[j]) / K;
    g1 += scale * d1;
    g2 += scale * d2;
    gb[j] -= scale * (d1 + d2);
  }
  fa /= 2.0 * double(J);

  SignalLossGrad out{LossBreakdown::from_components(fc, fr, fa, l_vr_value), {}};
  out.grad.p1 = basis.psd_vjp(b.p1.samples(), g1);
  out.grad.p2 = basis.psd_vjp(b.p2.samples(), g2);
  for (std::size_t i = 0; i < k; ++i) out.grad.negatives.push_back(basis.psd_vjp(b.negatives[i].samples(), gn[i]));
  for (std::size_t j = 0; j < J; ++j) out.grad.neighbors.push_back(basis.psd_vjp(b.neighbors[j].samples(), gb[j]));
  return out;
}

struct ForwardBatch {
  SignalBatch signals;
  std::vector<Estimator::Trace> traces;  // p1, p2, negatives..., neighbors...
};

ForwardBatch run_forward(const Estimator& est, const CubeBatch& batch) {
  std::vector<Estimator::Trace> traces(2 + batch.negatives.size() + batch.neighbors.size());
  std::size_t at = 0;
  Signal p1 = est.forward(batch.p1, &traces[at++]);
  Signal p2 = est.forward(batch.p2, &traces[at++]);
  std::vector<Signal> neg, nb;
  for (const VideoCube& c : batch.negatives) neg.push_back(est.forward(c, &traces[at++]));
  for (const VideoCube& c : batch.neighbors) nb.push_back(est.forward(c, &traces[at++]));
  return {{std::move(p1), std::move(p2), std::move(neg), batch.ratios, std::move(nb)}, std::move(traces)};
}

}  // namespace

void LossConfig::validate() const {
  if (!(temperature > 0.0)) throw Error(ErrorKind::InvalidArgument, "temperature must be positive");
  if (!(sharpness > 0.0)) throw Error(ErrorKind::InvalidArgument, "sharpness must be positive");
  if (k < 1 || J < 1) throw Error(ErrorKind::InvalidArgument, "k and J must be at least 1");
  if (pad_len < 0) throw Error(ErrorKind::InvalidArgument, "pad_len must be nonnegative");
}

LossBreakdown LossBreakdown::from_components(double fc, double fr, double fa, double vr) {
  return {fc, fr, fa, vr, fc + fr + fa + vr};
}

double contrastive_from_distances(double d_pp, std::span<const double> d_p1n, std::span<const double> d_p2n,
                                  double temperature) {
  if (d_p1n.empty() || d_p1n.size() != d_p2n.size())
    throw Error(ErrorKind::InvalidArgument, "need matching, nonempty negative distance lists");
  if (!(temperature > 0.0)) throw Error(ErrorKind::InvalidArgument, "temperature must be positive");
  return softplus(d_pp / temperature - log_sum_exp(d_p1n, d_p2n, 1.0 / temperature));
}

double ratio_consistency_from_peaks(double peak_p1, double peak_p2, std::span<const double> peak_n,
                                    std::span<const double> ratios) {
  if (peak_n.empty() || peak_n.size() != ratios.size())
    throw Error(ErrorKind::InvalidArgument, "need matching, nonempty peak and ratio lists");
  if (!(peak_p1 > 0.0) || !(peak_p2 > 0.0)) throw Error(ErrorKind::UndefinedRatio, "zero dominant frequency");
  double acc = 0.0;
  for (std::size_t i = 0; i < peak_n.size(); ++i)
    acc += std::abs(peak_n[i] / peak_p1 - ratios[i]) + std::abs(peak_n[i] / peak_p2 - ratios[i]);
  return acc / (2.0 * double(peak_n.size()));
}

double agreement_from_distances(std::span<const double> d_p1b, std::span<const double> d_p2b) {
  if (d_p1b.empty() || d_p1b.size() != d_p2b.size())
    throw Error(ErrorKind::InvalidArgument, "need matching, nonempty neighbour distance lists");
  double acc = 0.0;
  for (std::size_t j = 0; j < d_p1b.size(); ++j) acc += d_p1b[j] + d_p2b[j];
  return acc / (2.0 * double(d_p1b.size()));
}

double l_vr(const VideoCube& input, const std::vector<VideoCube>& negatives) {
  if (negatives.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one negative");
  double acc = 0.0;
  for (const VideoCube& n : negatives) {
    if (!n.same_shape(input)) throw Error(ErrorKind::SizeMismatch, "negative cube shape differs from input");
    acc += frame_rms(n, input);
  }
  return acc / double(negatives.size());
}

std::vector<Matrix> l_vr_grad(const VideoCube& input, const std::vector<VideoCube>& negatives) {
  if (negatives.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one negative");
  const double k = double(negatives.size());
  const double numel = double(input.numel());
  std::vector<Matrix> out;
  for (const VideoCube& n : negatives) {
    if (!n.same_shape(input)) throw Error(ErrorKind::SizeMismatch, "negative cube shape differs from input");
    const double rms = frame_rms(n, input);
    Matrix diff = n.data().cast<double>() - input.data().cast<double>();
    if (rms > 0.0)
      diff /= k * rms * numel;
    else
      diff.setZero();
    out.push_back(std::move(diff));
  }
  return out;
}

double l_fc(const Signal& p1, const Signal& p2, const std::vector<Signal>& negatives, const LossConfig& cfg) {
  cfg.validate();
  if (negatives.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one negative");
  const Eigen::Index pad = cfg.pad_for(p1.size());
  std::vector<double> d1, d2;
  for (const Signal& n : negatives) {
    d1.push_back(psd_distance(p1, n, pad, cfg.band));
    d2.push_back(psd_distance(p2, n, pad, cfg.band));
  }
  return contrastive_from_distances(psd_distance(p1, p2, pad, cfg.band), d1, d2, cfg.temperature);
}

double l_fr(const Signal& p1, const Signal& p2, const std::vector<Signal>& negatives,
            const std::vector<FrequencyRatio>& ratios, const LossConfig& cfg, PeakMode mode) {
  cfg.validate();
  if (negatives.size() != ratios.size()) throw Error(ErrorKind::SizeMismatch, "ratios and negatives differ in count");
  const Eigen::Index pad = cfg.pad_for(p1.size());
  auto peak = [&](const Signal& s) {
    const PowerSpectrum ps = periodogram(s, pad, cfg.band);
    return mode == PeakMode::Hard ? dominant_frequency(ps) : soft_dominant_frequency(ps, cfg.sharpness);
  };
  std::vector<double> pn, rs;
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    pn.push_back(peak(negatives[i]));
    rs.push_back(ratios[i].value());
  }
  return ratio_consistency_from_peaks(peak(p1), peak(p2), pn, rs);
}

double l_fa(const Signal& p1, const Signal& p2, const std::vector<Signal>& neighbors, const LossConfig& cfg) {
  cfg.validate();
  const Eigen::Index pad = cfg.pad_for(p1.size());
  std::vector<double> d1, d2;
  for (const Signal& b : neighbors) {
    d1.push_back(psd_distance(p1, b, pad, cfg.band));
    d2.push_back(psd_distance(p2, b, pad, cfg.band));
  }
  return agreement_from_distances(d1, d2);
}

LossBreakdown total_loss(const SignalBatch& batch, double l_vr_value, const LossConfig& cfg, PeakMode mode) {
  check_batch(batch, cfg);
  return LossBreakdown::from_components(l_fc(batch.p1, batch.p2, batch.negatives, cfg),
                                        l_fr(batch.p1, batch.p2, batch.negatives, batch.ratios, cfg, mode),
                                        l_fa(batch.p1, batch.p2, batch.neighbors, cfg), l_vr_value);
}

SignalLossGrad signal_loss_and_grad(const SignalBatch& batch, double l_vr_value, const LossConfig& cfg) {
  const SpectralBasis basis(batch.p1.size(), batch.p1.fs(), cfg.pad_for(batch.p1.size()), cfg.band);
  return loss_and_grad_with(batch, l_vr_value, cfg, basis);
}

TotalGrad grad_total(const Estimator& est, const CubeBatch& batch, const LossConfig& cfg) {
  const ForwardBatch fwd = run_forward(est, batch);
  const SignalLossGrad sg = signal_loss_and_grad(fwd.signals, l_vr(batch.anchor, batch.negatives), cfg);

  TotalGrad out{sg.value, est.zero_grad()};
  std::size_t at = 0;
  out.grad += est.backward(batch.p1, fwd.traces[at++], sg.grad.p1);
  out.grad += est.backward(batch.p2, fwd.traces[at++], sg.grad.p2);
  for (std::size_t i = 0; i < batch.negatives.size(); ++i)
    out.grad += est.backward(batch.negatives[i], fwd.traces[at++], sg.grad.negatives[i]);
  for (std::size_t j = 0; j < batch.neighbors.size(); ++j)
    out.grad += est.backward(batch.neighbors[j], fwd.traces[at++], sg.grad.neighbors[j]);
  if (!std::isfinite(out.value.total) || !out.grad.flatten().allFinite())
    throw Error(ErrorKind::NonFinite, "non-finite loss or gradient");
  return out;
}

LossBreakdown estimator_loss(const Estimator& est, const CubeBatch& batch, const LossConfig& cfg) {
  const ForwardBatch fwd = run_forward(est, batch);
  return signal_loss_and_grad(fwd.signals, l_vr(batch.anchor, batch.negatives), cfg).value;
}

}  // namespace pulseforge
