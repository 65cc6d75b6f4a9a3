#include "pulseforge/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <complex>
#include <numbers>
#include <vector>

namespace pulseforge {

namespace {

struct BinRange {
  Eigen::Index first;
  Eigen::Index count;
};

BinRange band_bins(double fs, Eigen::Index pad_len, BandSpec band) {
  if (band.hi > fs / 2.0 + 1e-12)
    throw Error(ErrorKind::InvalidArgument, "band upper edge exceeds Nyquist frequency");
  const double width = fs / double(pad_len);
  Eigen::Index first = -1, last = -1;
  for (Eigen::Index k = 0; k <= pad_len / 2; ++k) {
    if (band.contains(double(k) * width)) {
      if (first < 0) first = k;
      last = k;
    }
  }
  if (first < 0) throw Error(ErrorKind::EmptyBand, "band contains no periodogram bins");
  return {first, last - first + 1};
}

Vector softmax(const Vector& z) {
  const Vector e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace

Vector raw_power(const Vector& x, Eigen::Index pad_len) {
  if (pad_len < x.size()) throw Error(ErrorKind::InvalidArgument, "pad_len shorter than signal");
  std::vector<double> padded(std::size_t(pad_len), 0.0);
  std::copy(x.data(), x.data() + x.size(), padded.begin());
  std::vector<std::complex<double>> spec;
  Eigen::FFT<double> fft;
  fft.fwd(spec, padded);
  Vector out(pad_len / 2 + 1);
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = std::norm(spec[std::size_t(k)]);
  return out;
}

PowerSpectrum periodogram(const Signal& s, Eigen::Index pad_len, BandSpec band) {
  const BinRange bins = band_bins(s.fs(), pad_len, band);
  const Vector full = raw_power(standardize(s.samples()), pad_len);
  Vector powers = full.segment(bins.first, bins.count);
  const double total = powers.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorKind::DegenerateSpectrum, "signal has no power in band (constant input?)");
  powers /= total;
  const double width = s.fs() / double(pad_len);
  Vector freqs = Vector::LinSpaced(bins.count, 0.0, double(bins.count - 1));
  freqs = (freqs.array() + double(bins.first)) * width;
  return {std::move(freqs), std::move(powers), width, band};
}

PowerSpectrum periodogram(const Signal& s, BandSpec band) {
  return periodogram(s, default_pad_len(s.size()), band);
}

double dominant_frequency(const PowerSpectrum& ps) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < ps.powers.size(); ++k)
    if (ps.powers[k] > ps.powers[best]) best = k;
  return ps.freqs[best];
}

double soft_peak(const Vector& freqs, const Vector& powers, double sharpness) {
  if (!(sharpness > 0.0)) throw Error(ErrorKind::InvalidArgument, "sharpness must be positive");
  return freqs.dot(softmax(sharpness * powers));
}

Vector soft_peak_grad(const Vector& freqs, const Vector& powers, double sharpness) {
  const Vector w = softmax(sharpness * powers);
  const double mean = freqs.dot(w);
  return sharpness * (w.array() * (freqs.array() - mean)).matrix();
}

double soft_dominant_frequency(const PowerSpectrum& ps, double sharpness) {
  return soft_peak(ps.freqs, ps.powers, sharpness);
}

double psd_distance(const Signal& a, const Signal& b, Eigen::Index pad_len, BandSpec band) {
  if (a.fs() != b.fs()) throw Error(ErrorKind::InvalidArgument, "psd_distance needs equal sampling rates");
  const PowerSpectrum pa = periodogram(a, pad_len, band);
  const PowerSpectrum pb = periodogram(b, pad_len, band);
  return (pa.powers - pb.powers).squaredNorm() / double(pa.powers.size());
}

double band_power(const PowerSpectrum& ps, BandSpec band) {
  double acc = 0.0;
  bool any = false;
  for (Eigen::Index k = 0; k < ps.freqs.size(); ++k) {
    if (band.contains(ps.freqs[k])) {
      acc += ps.powers[k];
      any = true;
    }
  }
  if (!any) throw Error(ErrorKind::EmptyBand, "query band contains no spectrum bins");
  return acc;
}

Signal bandpass(const Signal& s, BandSpec band) {
  const Eigen::Index n = s.size();
  std::vector<double> in(s.samples().data(), s.samples().data() + n);
  std::vector<std::complex<double>> spec;
  Eigen::FFT<double> fft;
  fft.fwd(spec, in);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index mirrored = std::min(k, n - k);
    if (!band.contains(double(mirrored) * s.fs() / double(n))) spec[std::size_t(k)] = 0.0;
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return Signal(Eigen::Map<const Vector>(out.data(), n), s.fs());
}

SpectralBasis::SpectralBasis(Eigen::Index length, double fs, Eigen::Index pad_len, BandSpec band)
    : fs_(fs), bin_width_(fs / double(pad_len)) {
  if (length < 2 || pad_len < length)
    throw Error(ErrorKind::InvalidArgument, "basis needs 2 <= length <= pad_len");
  const BinRange bins = band_bins(fs, pad_len, band);
  freqs_.resize(bins.count);
  cos_.resize(bins.count, length);
  sin_.resize(bins.count, length);
  for (Eigen::Index i = 0; i < bins.count; ++i) {
    const Eigen::Index k = bins.first + i;
    freqs_[i] = double(k) * bin_width_;
    for (Eigen::Index n = 0; n < length; ++n) {
      // Reduce k*n modulo pad_len so the angle stays in [0, 2*pi).
      const double angle = 2.0 * std::numbers::pi * double((k * n) % pad_len) / double(pad_len);
      cos_(i, n) = std::cos(angle);
      sin_(i, n) = -std::sin(angle);
    }
  }
}

Vector SpectralBasis::psd(const Vector& x) const {
  if (x.size() != length()) throw Error(ErrorKind::SizeMismatch, "signal length differs from basis length");
  const Vector c = x.array() - x.mean();
  const Vector q = (cos_ * c).array().square() + (sin_ * c).array().square();
  const double total = q.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorKind::DegenerateSpectrum, "signal has no power in band");
  return q / total;
}

Vector SpectralBasis::psd_vjp(const Vector& x, const Vector& grad_p) const {
  if (x.size() != length()) throw Error(ErrorKind::SizeMismatch, "signal length differs from basis length");
  const Vector c = x.array() - x.mean();
  const Vector re = cos_ * c;
  const Vector im = sin_ * c;
  const Vector q = re.array().square() + im.array().square();
  const double total = q.sum();
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error(ErrorKind::DegenerateSpectrum, "signal has no power in band");
  const Vector p = q / total;
  const Vector grad_q = (grad_p.array() - grad_p.dot(p)) / total;
  Vector grad_c = cos_.transpose() * (2.0 * re.cwiseProduct(grad_q)) +
                  sin_.transpose() * (2.0 * im.cwiseProduct(grad_q));
  grad_c.array() -= grad_c.mean();
  return grad_c;
}

}  // namespace pulseforge
