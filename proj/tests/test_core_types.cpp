#include <doctest.h>

#include "oracles.hpp"

#include "pulseforge/core_types.hpp"

#include <limits>
#include <random>

using namespace pulseforge;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("signal invariants") {
  CHECK_NOTHROW(Signal(Vector::Zero(2), 1.0));
  CHECK(kind_of([] { Signal(Vector::Zero(1), 1.0); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { Signal(Vector::Zero(4), 0.0); }) == ErrorKind::InvalidArgument);
  Vector bad = Vector::Zero(4);
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK(kind_of([&] { Signal(bad, 30.0); }) == ErrorKind::NonFinite);
  bad[2] = std::numeric_limits<double>::infinity();
  CHECK(kind_of([&] { Signal(bad, 30.0); }) == ErrorKind::NonFinite);
}

TEST_CASE("video cube invariants") {
  FrameMatrix d = FrameMatrix::Constant(2, 12, 0.5f);
  CHECK_NOTHROW(VideoCube(2, 2, 2, 3, 30.0, d));
  CHECK(kind_of([&] { VideoCube(1, 2, 2, 3, 30.0, FrameMatrix::Zero(1, 12)); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { VideoCube(2, 2, 2, 3, 0.0, d); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { VideoCube(2, 2, 3, 3, 30.0, d); }) == ErrorKind::SizeMismatch);
  d(1, 5) = 1.5f;
  CHECK(kind_of([&] { VideoCube(2, 2, 2, 3, 30.0, d); }) == ErrorKind::OutOfRange);
  d(1, 5) = -0.01f;
  CHECK(kind_of([&] { VideoCube(2, 2, 2, 3, 30.0, d); }) == ErrorKind::OutOfRange);
}

TEST_CASE("video cube indexing and clip") {
  FrameMatrix d(3, 2 * 3 * 2);
  for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = float(i) / float(d.size());
  VideoCube c(3, 2, 3, 2, 25.0, d);
  CHECK(c.numel() == 36);
  CHECK(c.at(1, 1, 2, 1) == d(1, (1 * 3 + 2) * 2 + 1));
  VideoCube k = c.clip(1, 2);
  CHECK(k.frames() == 2);
  CHECK(k.at(0, 0, 0, 0) == c.at(1, 0, 0, 0));
  CHECK_THROWS_AS(c.clip(2, 2), Error);
  CHECK(c.global_mean()[0] == doctest::Approx(d.row(0).cast<double>().mean()).epsilon(1e-12));
}

TEST_CASE("frequency ratio and band") {
  CHECK_THROWS_AS(FrequencyRatio(0.0), Error);
  CHECK_THROWS_AS(FrequencyRatio(-1.0), Error);
  CHECK(FrequencyRatio(0.5).in_sampling_range());
  CHECK(FrequencyRatio(1.5).in_sampling_range());
  CHECK_FALSE(FrequencyRatio(0.3).in_sampling_range());
  CHECK_FALSE(FrequencyRatio(1.0).in_sampling_range());
  CHECK_FALSE(FrequencyRatio(1.7).in_sampling_range());
  CHECK_THROWS_AS(BandSpec(1.0, 1.0), Error);
  CHECK_THROWS_AS(BandSpec(-0.1, 1.0), Error);
  const BandSpec b(0.5, 3.0);
  CHECK(b.contains(0.5));
  CHECK_FALSE(b.contains(3.0));
}

TEST_CASE("detrend_and_standardize: constant maps to zeros") {
  const Signal out = detrend_and_standardize(Signal(Vector::Constant(4, 5.0), 1.0));
  CHECK(out.samples().isZero(0.0));
}

TEST_CASE("detrend_and_standardize: alternating sequence") {
  Vector x(8);
  for (int i = 0; i < 8; ++i) x[i] = i % 2;
  const Vector y = detrend_and_standardize(Signal(x, 1.0)).samples();
  // mean 0.5, sample std sqrt(8 * 0.25 / 7)
  const double expect = 0.5 / std::sqrt(2.0 / 7.0);
  for (int i = 0; i < 8; ++i) CHECK(y[i] == doctest::Approx(i % 2 ? expect : -expect).epsilon(1e-12));
}

TEST_CASE("detrend_and_standardize: random signal has zero mean and unit std") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(3.0, 7.0);
  Vector x(257);
  for (double& v : x) v = n(rng);
  const Vector y = detrend_and_standardize(Signal(x, 30.0)).samples();
  std::vector<double> ys(y.begin(), y.end());
  CHECK(std::abs(oracle::mean(ys)) < 1e-12);
  CHECK(std::abs(oracle::sample_std(ys) - 1.0) < 1e-12);
}

TEST_CASE("detrend_and_standardize is idempotent") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 9);
  Vector x(64);
  for (double& v : x) v = u(rng);
  const Signal once = detrend_and_standardize(Signal(x, 10.0));
  const Signal twice = detrend_and_standardize(once);
  CHECK((once.samples() - twice.samples()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("default pad length") {
  CHECK(default_pad_len(150) == 1024);
  CHECK(default_pad_len(32) == 128);
  CHECK(default_pad_len(600) == 4096);
  CHECK(default_pad_len(1) == 4);
}

TEST_CASE("error kinds have stable names") {
  CHECK(to_string(ErrorKind::DegenerateSpectrum) == "degenerate_spectrum");
  CHECK(to_string(ErrorKind::SizeMismatch) == "size_mismatch");
}
