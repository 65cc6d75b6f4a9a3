#include <doctest.h>

#include "oracles.hpp"

#include "pulseforge/augment.hpp"
#include "pulseforge/spectral.hpp"
#include "pulseforge/synth.hpp"

#include <random>

using namespace pulseforge;

namespace {

VideoCube pulse_cube(int h, int w, std::uint64_t seed) {
  SceneSpec s = default_scene();
  s.height = h;
  s.width = w;
  s.seed = seed;
  return generate_cube(s, 90, 30.0).cube;
}

double max_mean_diff(const VideoCube& a, const VideoCube& b) {
  return (a.global_mean() - b.global_mean()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("rotate: identity, group law, pixel map") {
  std::mt19937_64 rng(1);
  const VideoCube c = oracle::random_cube(3, 5, 5, 3, 30.0, rng);
  CHECK(rotate(c, 0).data() == c.data());
  CHECK(rotate(rotate(c, 1), 1).data() == rotate(c, 2).data());
  CHECK(rotate(rotate(c, 3), 1).data() == c.data());
  CHECK(rotate(rotate(rotate(rotate(c, 1), 1), 1), 1).data() == c.data());
  const VideoCube r = rotate(c, 1);
  for (int h = 0; h < 5; ++h)
    for (int w = 0; w < 5; ++w)
      for (int ch = 0; ch < 3; ++ch) CHECK(r.at(2, h, w, ch) == c.at(2, w, 4 - h, ch));
  CHECK(max_mean_diff(r, c) < 1e-9);
}

TEST_CASE("rotate: odd turns need square frames") {
  std::mt19937_64 rng(2);
  const VideoCube c = oracle::random_cube(2, 4, 6, 3, 30.0, rng);
  CHECK_THROWS_AS(rotate(c, 1), Error);
  CHECK_THROWS_AS(rotate(c, 3), Error);
  CHECK_NOTHROW(rotate(c, 2));
  CHECK_THROWS_AS(rotate(c, 4), Error);
  CHECK_THROWS_AS(rotate(c, -1), Error);
}

TEST_CASE("flip: involution, mean preservation, composition") {
  std::mt19937_64 rng(3);
  const VideoCube c = oracle::random_cube(4, 6, 4, 3, 30.0, rng);
  for (FlipAxis a : {FlipAxis::Horizontal, FlipAxis::Vertical}) {
    CHECK(flip(flip(c, a), a).data() == c.data());
    CHECK(max_mean_diff(flip(c, a), c) < 1e-9);
  }
  CHECK(flip(flip(c, FlipAxis::Horizontal), FlipAxis::Vertical).data() == rotate(c, 2).data());
  CHECK(flip(c, FlipAxis::Horizontal).at(1, 2, 0, 1) == c.at(1, 2, 3, 1));
  CHECK(flip(c, FlipAxis::Vertical).at(1, 0, 2, 1) == c.at(1, 5, 2, 1));
}

TEST_CASE("apply covers every op") {
  std::mt19937_64 rng(4);
  const VideoCube c = oracle::random_cube(2, 4, 4, 3, 30.0, rng);
  CHECK(apply(c, SpatialOp::Rotate0).data() == c.data());
  CHECK(apply(c, SpatialOp::Rotate270).data() == rotate(c, 3).data());
  CHECK(apply(c, SpatialOp::FlipVertical).data() == flip(c, FlipAxis::Vertical).data());
  CHECK(to_string(SpatialOp::FlipHorizontal) == "flip_horizontal");
}

TEST_CASE("sample_positive_pair: distinct ops, deterministic, spectrum preserved") {
  const VideoCube c = pulse_cube(16, 16, 5);
  const auto ref = periodogram(Signal(c.global_mean(), 30.0), default_pulse_band());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PositivePair p = sample_positive_pair(c, seed);
    CHECK(p.first_op != p.second_op);
    const PositivePair q = sample_positive_pair(c, seed);
    CHECK(q.first_op == p.first_op);
    CHECK(q.second_op == p.second_op);
    CHECK(q.first.data() == p.first.data());
    for (const VideoCube* v : {&p.first, &p.second}) {
      const auto ps = periodogram(Signal(v->global_mean(), 30.0), default_pulse_band());
      CHECK((ps.powers - ref.powers).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(dominant_frequency(ps) == dominant_frequency(ref));
    }
  }
}

TEST_CASE("sample_positive_pair: non-square frames only use legal ops") {
  const VideoCube c = pulse_cube(12, 16, 6);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const PositivePair p = sample_positive_pair(c, seed);
    for (SpatialOp op : {p.first_op, p.second_op}) {
      CHECK(op != SpatialOp::Rotate90);
      CHECK(op != SpatialOp::Rotate270);
    }
    CHECK(p.first.same_shape(c));
  }
}

TEST_CASE("sample_positive_pair uses all six ops on square frames") {
  const VideoCube c = pulse_cube(8, 8, 7);
  std::array<int, 6> seen{};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const PositivePair p = sample_positive_pair(c, seed);
    ++seen[std::size_t(p.first_op)];
    ++seen[std::size_t(p.second_op)];
  }
  for (int n : seen) CHECK(n > 0);
}
