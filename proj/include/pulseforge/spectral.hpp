#pragma once

#include "pulseforge/core_types.hpp"

namespace pulseforge {

/// Band-restricted periodogram. `powers` sums to 1 over the band.
struct PowerSpectrum {
  Vector freqs;
  Vector powers;
  double bin_width;
  BandSpec band;
};

/// |DFT|^2 of `x` zero-padded to `pad_len`, bins 0..pad_len/2, no
/// preconditioning or normalization.
Vector raw_power(const Vector& x, Eigen::Index pad_len);

/// Standardize, zero-pad, DFT, squared magnitude, restrict to `band`, normalize.
/// Throws DegenerateSpectrum when the band holds no power (e.g. constant input).
PowerSpectrum periodogram(const Signal& s, Eigen::Index pad_len, BandSpec band);
PowerSpectrum periodogram(const Signal& s, BandSpec band = default_pulse_band());

/// Frequency of the maximum-power bin; ties resolve to the lower frequency.
double dominant_frequency(const PowerSpectrum& ps);

/// sum_k f_k softmax(sharpness * p)_k. Tends to dominant_frequency as sharpness grows.
double soft_dominant_frequency(const PowerSpectrum& ps, double sharpness);

/// Mean over band bins of the squared difference of the two normalized spectra.
double psd_distance(const Signal& a, const Signal& b, Eigen::Index pad_len, BandSpec band);

/// Sum of powers with frequency in [band.lo, band.hi). Throws EmptyBand when no bin falls inside.
double band_power(const PowerSpectrum& ps, BandSpec band);

/// Zero-phase brick-wall filter: FFT, zero every bin outside `band`, inverse FFT.
Signal bandpass(const Signal& s, BandSpec band);

/// Explicit band-restricted DFT used by the differentiable loss path.
///
/// psd() reproduces periodogram().powers for signals of the basis length:
/// centring replaces standardization because the normalized spectrum is
/// invariant to the signal's scale. psd_vjp() is the exact reverse-mode
/// product through centring, the DFT, the squared magnitude and the
/// normalization.
class SpectralBasis {
 public:
  SpectralBasis(Eigen::Index length, double fs, Eigen::Index pad_len, BandSpec band);

  Eigen::Index length() const noexcept { return cos_.cols(); }
  Eigen::Index bins() const noexcept { return cos_.rows(); }
  double fs() const noexcept { return fs_; }
  double bin_width() const noexcept { return bin_width_; }
  const Vector& freqs() const noexcept { return freqs_; }

  Vector psd(const Vector& x) const;
  Vector psd_vjp(const Vector& x, const Vector& grad_p) const;

 private:
  double fs_;
  double bin_width_;
  Vector freqs_;
  Matrix cos_;
  Matrix sin_;
};

/// Softmax-weighted mean frequency and its gradient with respect to the powers.
double soft_peak(const Vector& freqs, const Vector& powers, double sharpness);
Vector soft_peak_grad(const Vector& freqs, const Vector& powers, double sharpness);

}  // namespace pulseforge
