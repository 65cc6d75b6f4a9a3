#include <doctest.h>

#include "oracles.hpp"

#include "pulseforge/freq_mod.hpp"
#include "pulseforge/losses.hpp"
#include "pulseforge/spectral.hpp"

#include <numbers>
#include <random>

using namespace pulseforge;

namespace {

double peak(const Signal& s, Eigen::Index pad = 1024) {
  return dominant_frequency(periodogram(s, pad, BandSpec(0.1, std::min(s.fs() / 2, 5.0))));
}

}  // namespace

TEST_CASE("analytic modulation vector: r = 2 gives 2 cos") {
  const PulseModel m{1.0, 1.0, 0.0, 0.0};
  const auto v = analytic_modulation_vector(m, FrequencyRatio(2.0), 150, 30.0);
  REQUIRE(v.values.size() == 150);
  int checked = 0;
  for (Eigen::Index n = 0; n < 150; ++n) {
    if (v.clamped[std::size_t(n)]) continue;
    CHECK(std::abs(v.values[n] - 2.0 * std::cos(2.0 * std::numbers::pi * double(n) / 30.0)) < 1e-6);
    ++checked;
  }
  CHECK(checked > 100);
  CHECK(v.ratio.value() == 2.0);
}

TEST_CASE("analytic modulation vector: r = 1 is all ones") {
  const auto v = analytic_modulation_vector(PulseModel{0.5, 1.3, 0.1, 0.0}, FrequencyRatio(1.0), 120, 30.0);
  for (Eigen::Index n = 0; n < 120; ++n)
    if (!v.clamped[std::size_t(n)]) CHECK(v.values[n] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("analytic modulation vector: singular indices are clamped with the limit's sign") {
  const auto v = analytic_modulation_vector(PulseModel{1.0, 1.0, 0.0, 0.0}, FrequencyRatio(2.0), 30, 30.0, 10.0);
  // t = 0: limit 2 cos(0) = 2; t = 0.5 s: limit 2 cos(pi) = -2
  CHECK(v.clamped[0]);
  CHECK(v.values[0] == 10.0);
  CHECK(v.clamped[15]);
  CHECK(v.values[15] == -10.0);
  CHECK(v.values.allFinite());
  CHECK(v.values.cwiseAbs().maxCoeff() <= 10.0);
}

TEST_CASE("analytic modulation vector times the pulse reproduces modulate_parametric") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const PulseModel m{0.2 + u(rng), 0.7 + 2.0 * u(rng), u(rng), 0.0};
    const FrequencyRatio r(u(rng) < 0.5 ? 0.3 + 0.5 * u(rng) : 1.2 + 0.5 * u(rng));
    const auto v = analytic_modulation_vector(m, r, 200, 30.0);
    const Vector y = generate_signal(m, 200, 30.0).samples();
    const Vector target = modulate_parametric(m, r, 200, 30.0).samples();
    for (Eigen::Index n = 0; n < 200; ++n)
      if (!v.clamped[std::size_t(n)]) CHECK(std::abs(v.values[n] * y[n] - target[n]) < 1e-6);
  }
}

TEST_CASE("analytic modulation vector: r = 1.5 on 1.2 Hz lands at 1.8 Hz") {
  const PulseModel m{1.0, 1.2, 0.0, 0.0};
  const auto v = analytic_modulation_vector(m, FrequencyRatio(1.5), 150, 30.0);
  const Vector z = v.values.cwiseProduct(generate_signal(m, 150, 30.0).samples());
  CHECK(std::abs(peak(Signal(z, 30.0)) - 1.8) <= 30.0 / 1024);
}

TEST_CASE("modulation is not an affine map of the pulse") {
  for (double r : {0.4, 0.7, 1.3, 1.6}) {
    const PulseModel m{1.0, 1.1, 0.05, 0.0};
    const auto v = analytic_modulation_vector(m, FrequencyRatio(r), 300, 30.0);
    const Vector y = generate_signal(m, 300, 30.0).samples();
    std::vector<double> ys, vs;
    for (Eigen::Index n = 0; n < 300; ++n)
      if (!v.clamped[std::size_t(n)]) {
        ys.push_back(y[n]);
        vs.push_back(v.values[n]);
      }
    Matrix A(Eigen::Index(ys.size()), 2);
    Vector b(Eigen::Index(ys.size()));
    for (std::size_t i = 0; i < ys.size(); ++i) {
      A(Eigen::Index(i), 0) = ys[i];
      A(Eigen::Index(i), 1) = 1.0;
      b[Eigen::Index(i)] = vs[i];
    }
    const Vector coef = A.colPivHouseholderQr().solve(b);
    const double rms = std::sqrt((A * coef - b).squaredNorm() / double(b.size()));
    CHECK(rms > 0.1);
  }
}

TEST_CASE("modulate_parametric") {
  const PulseModel m{0.7, 1.0, 0.2, 0.3};
  CHECK(modulate_parametric(m, FrequencyRatio(1.0), 150, 30.0).samples() == generate_signal(m, 150, 30.0).samples());
  const PulseModel one{1.0, 1.0, 0.0, 0.0};
  CHECK(std::abs(peak(modulate_parametric(one, FrequencyRatio(0.5), 150, 30.0)) - 0.5) <= 30.0 / 1024);
  CHECK(std::abs(peak(modulate_parametric(one, FrequencyRatio(1.7), 150, 30.0)) - 1.7) <= 30.0 / 1024);
}

TEST_CASE("modulate_resample") {
  const Signal s = generate_signal(PulseModel{1.0, 1.0, 0.0, 0.0}, 300, 30.0);
  const Signal same = modulate_resample(s, FrequencyRatio(1.0), 300);
  CHECK((same.samples() - s.samples()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(same.fs() == s.fs());

  CHECK(std::abs(peak(modulate_resample(s, FrequencyRatio(2.0), 150)) - 2.0) <= 30.0 / 1024);
  // past the end the source is mirrored about its last sample
  const Signal long_out = modulate_resample(s, FrequencyRatio(2.0), 300);
  CHECK(long_out[160] == doctest::Approx(s[2 * 299 - 320]).epsilon(1e-12));

  const Signal two = generate_signal(PulseModel{1.0, 2.0, 0.0, 0.0}, 300, 30.0);
  CHECK(std::abs(peak(modulate_resample(two, FrequencyRatio(0.5), 300)) - 1.0) <= 30.0 / 1024);

  const Signal tiny(Vector::LinSpaced(4, 0.0, 1.0), 30.0);
  CHECK_THROWS_AS(modulate_resample(tiny, FrequencyRatio(5.0), 4), Error);
}

TEST_CASE("modulate_resample interpolates linearly") {
  Vector x(5);
  x << 0.0, 1.0, 4.0, 9.0, 16.0;
  const Signal s(x, 10.0);
  const Signal half = modulate_resample(s, FrequencyRatio(0.5), 5);
  CHECK(half[1] == doctest::Approx(0.5));
  CHECK(half[3] == doctest::Approx(2.5));
}

TEST_CASE("sample_ratios: range, default count, determinism, balance") {
  const auto a = sample_ratios(10000, 42);
  REQUIRE(a.size() == 10000);
  int low = 0;
  for (const auto& r : a) {
    CHECK(r.in_sampling_range());
    low += r.value() < 1.0;
  }
  CHECK(std::abs(low / 10000.0 - 0.5) < 0.03);
  CHECK(LossConfig{}.k == 4);
  const auto b = sample_ratios(4, 42), c = sample_ratios(4, 42), d = sample_ratios(4, 43);
  bool differ = false;
  for (int i = 0; i < 4; ++i) {
    CHECK(b[std::size_t(i)].value() == c[std::size_t(i)].value());
    differ = differ || b[std::size_t(i)].value() != d[std::size_t(i)].value();
  }
  CHECK(differ);
  CHECK_THROWS_AS(sample_ratios(0, 1), Error);
}

TEST_CASE("make_negatives") {
  SceneSpec spec = default_scene();
  spec.height = spec.width = 24;
  const auto g = generate_cube(spec, 300, 30.0);
  const PulseTruth truth{spec.pulse, pulse_gain_map(spec)};
  const auto negs = make_negatives(g.cube, truth, {FrequencyRatio(1.0), FrequencyRatio(1.5), FrequencyRatio(0.6)});
  REQUIRE(negs.size() == 3);
  CHECK(negs[0].data() == g.cube.data());

  const auto ps = periodogram(Signal(negs[1].global_mean(), 30.0), 1024, default_pulse_band());
  CHECK(std::abs(dominant_frequency(ps) - 1.5 * spec.pulse.frequency) <= ps.bin_width);
  const auto ps2 = periodogram(Signal(negs[2].global_mean(), 30.0), 1024, default_pulse_band());
  CHECK(std::abs(dominant_frequency(ps2) - 0.6 * spec.pulse.frequency) <= ps2.bin_width);

  for (const auto& n : negs) {
    CHECK(n.same_shape(g.cube));
    CHECK(l_vr(g.cube, {n}) <= spec.pulse.amplitude);
  }
  CHECK_THROWS_AS(make_negatives(g.cube, truth, {}), Error);
}
