#include <doctest.h>

#include "oracles.hpp"

#include "pulseforge/augment.hpp"
#include "pulseforge/spectral.hpp"
#include "pulseforge/trainer.hpp"

#include <random>
#include <set>

using namespace pulseforge;

namespace {

SceneSpec small_scene(int side = 16) {
  SceneSpec s = default_scene();
  s.height = s.width = side;
  return s;
}

TrainConfig small_config(int epochs, std::uint64_t seed = 1) {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.seed = seed;
  return cfg;
}

/// The default training corpus: 20 recordings of 600 frames at 30 fps.
const std::vector<CorpusItem>& default_corpus() {
  static const std::vector<CorpusItem> c = build_corpus(20, 50, 130, default_scene(), 600, 30.0, 1, 4);
  return c;
}

}  // namespace

TEST_CASE("estimator forward: weighted region sums, standardized, gated") {
  std::mt19937_64 rng(1);
  const VideoCube c = oracle::random_cube(12, 4, 4, 3, 30.0, rng);
  Estimator e = Estimator::random(RegionGrid(4, 4, 2, 2), 3, 12, 5);
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index i = 0; i < e.logits().size(); ++i) e.logits().data()[i] = g(rng);

  const RegionGrid& grid = e.grid();
  std::vector<Signal> experts;
  for (int l = 0; l < 4; ++l) {
    const auto cols = grid.columns(l, 3);
    Vector u(12);
    for (int t = 0; t < 12; ++t) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cols.size(); ++j) acc += double(c.data()(t, cols[j])) * e.weights(l)[Eigen::Index(j)];
      u[t] = acc;
    }
    experts.emplace_back(oracle::standardized(u), 30.0);
  }
  const Signal expect = aggregate({experts, e.logits()});
  Estimator::Trace tr;
  const Signal y = e.forward(c, &tr);
  CHECK((y.samples() - expect.samples()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(tr.gates.cols() == 12);
}

TEST_CASE("estimator reuses its logits periodically on longer cubes") {
  std::mt19937_64 rng(2);
  const VideoCube c = oracle::random_cube(10, 4, 4, 3, 30.0, rng);
  Estimator e = Estimator::random(RegionGrid(4, 4, 1, 2), 3, 4, 6);
  e.logits() << 1, -2, 0.5, 3, -1, 0, 2, -0.5;
  Matrix tiled(2, 10);
  for (int t = 0; t < 10; ++t) tiled.col(t) = e.logits().col(t % 4);
  std::vector<Signal> experts;
  for (int l = 0; l < 2; ++l) {
    Estimator one = e;
    one.logits().setZero();
    one.logits().row(l).setConstant(60.0);
    experts.push_back(one.forward(c));
  }
  const Signal expect = aggregate({experts, tiled});
  CHECK((e.forward(c).samples() - expect.samples()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("estimator parameters round trip and shape checks") {
  Estimator e = Estimator::random(RegionGrid(6, 6, 3, 3), 3, 8, 7);
  CHECK(e.parameter_count() == 6 * 6 * 3 + 9 * 8);
  Vector p = e.parameters();
  p[3] = 42.0;
  p[p.size() - 1] = -1.0;
  e.set_parameters(p);
  CHECK(e.parameters() == p);
  CHECK(e.logits()(8, 7) == -1.0);
  CHECK_THROWS_AS(e.set_parameters(Vector::Zero(3)), Error);
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(e.forward(oracle::random_cube(8, 5, 6, 3, 30.0, rng)), Error);
  CHECK_THROWS_AS(e.forward(oracle::random_cube(8, 6, 6, 1, 30.0, rng)), Error);
  CHECK(Estimator::random(RegionGrid(6, 6, 3, 3), 3, 8, 7).parameters() ==
        Estimator::random(RegionGrid(6, 6, 3, 3), 3, 8, 7).parameters());
}

TEST_CASE("make_batch: clip layout for J = 3, T = 150") {
  const auto corpus = build_corpus(1, 70, 70, small_scene(), 600, 30.0, 3);
  const TrainingItem item = training_item(corpus[0]);
  const TrainConfig cfg = small_config(1);
  std::set<int> anchors;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    const Batch b = make_batch(item, cfg, seed);
    anchors.insert(b.anchor_clip);
    std::set<int> all(b.neighbor_clips.begin(), b.neighbor_clips.end());
    CHECK(b.neighbor_clips.size() == 3);
    CHECK(all.count(b.anchor_clip) == 0);
    all.insert(b.anchor_clip);
    CHECK(all == std::set<int>{0, 1, 2, 3});
    CHECK(b.cubes.anchor.data() == item.cube.clip(b.anchor_clip * 150, 150).data());
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(b.cubes.neighbors[j].data() == item.cube.clip(b.neighbor_clips[j] * 150, 150).data());
    REQUIRE(b.cubes.ratios.size() == 4);
    REQUIRE(b.cubes.negatives.size() == 4);
    for (const auto& r : b.cubes.ratios) CHECK(r.in_sampling_range());
    CHECK(b.cubes.p1.frames() == 150);
  }
  CHECK(anchors.size() > 1);
}

TEST_CASE("make_batch: negatives carry the scaled pulse of the anchor clip") {
  SceneSpec s = small_scene();
  s.noise = NoiseSpec{};
  const auto corpus = build_corpus(1, 72, 72, s, 600, 30.0, 4);
  const TrainingItem item = training_item(corpus[0]);
  const Batch b = make_batch(item, small_config(1), 9);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto ps = periodogram(Signal(b.cubes.negatives[i].global_mean(), 30.0), 4096, default_pulse_band());
    const double target = 1.2 * b.cubes.ratios[i].value();
    if (target < 3.0) CHECK(std::abs(dominant_frequency(ps) - target) <= 2 * ps.bin_width);
  }
}

TEST_CASE("make_batch: deterministic per seed, errors on short recordings") {
  const auto corpus = build_corpus(1, 90, 90, small_scene(), 600, 30.0, 5);
  const TrainingItem item = training_item(corpus[0]);
  const TrainConfig cfg = small_config(1);
  const Batch a = make_batch(item, cfg, 77), b = make_batch(item, cfg, 77);
  CHECK(a.anchor_clip == b.anchor_clip);
  CHECK(a.cubes.p1.data() == b.cubes.p1.data());
  CHECK(a.cubes.p2.data() == b.cubes.p2.data());
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a.cubes.ratios[i].value() == b.cubes.ratios[i].value());
    CHECK(a.cubes.negatives[i].data() == b.cubes.negatives[i].data());
  }
  CHECK(make_batch(item, cfg, 78).cubes.ratios[0].value() != a.cubes.ratios[0].value());

  TrainingItem short_item{item.cube.clip(0, 599), item.modulation_source};
  try {
    make_batch(short_item, cfg, 1);
    FAIL("expected insufficient frames");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientFrames);
  }
}

TEST_CASE("train: zero learning rate leaves parameters and trace unchanged") {
  const auto items = training_items(build_corpus(2, 60, 100, small_scene(), 600, 30.0, 6));
  TrainConfig cfg = small_config(3);
  cfg.learning_rate = 0.0;
  const Estimator init = initial_estimator(items[0].cube, cfg);
  const TrainResult r = train(items, cfg, init);
  CHECK(r.estimator.parameters() == init.parameters());
  REQUIRE(r.trace.size() == 3);
  for (const auto& t : r.trace) CHECK(t.total == r.trace[0].total);
}

TEST_CASE("train: seeded runs repeat exactly") {
  const auto items = training_items(build_corpus(2, 60, 100, small_scene(), 600, 30.0, 7));
  const TrainConfig cfg = small_config(3, 11);
  const TrainResult a = train(items, cfg), b = train(items, cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t e = 0; e < a.trace.size(); ++e) CHECK(std::abs(a.trace[e].total - b.trace[e].total) <= 1e-9);
  CHECK(a.estimator.parameters() == b.estimator.parameters());
  int calls = 0;
  train(items, cfg, [&](int epoch, const LossBreakdown& l) {
    CHECK(l.total == a.trace[std::size_t(epoch)].total);
    ++calls;
  });
  CHECK(calls == 3);
}

TEST_CASE("train: the objective never sees the ground-truth signal") {
  auto corpus = build_corpus(2, 60, 100, small_scene(), 600, 30.0, 8);
  const TrainConfig cfg = small_config(2, 3);
  const TrainResult clean = train(training_items(corpus), cfg);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g(0.0, 1e3);
  for (auto& item : corpus) {
    Vector junk(item.truth.size());
    for (double& v : junk) v = g(rng);
    item.truth = Signal(junk, 7.0);
  }
  const TrainResult garbage = train(training_items(corpus), cfg);
  for (std::size_t e = 0; e < clean.trace.size(); ++e) CHECK(garbage.trace[e].total == clean.trace[e].total);
  CHECK(garbage.estimator.parameters() == clean.estimator.parameters());
}

TEST_CASE("train: noise-free single-region corpus recovers the pulse frequency") {
  SceneSpec s = small_scene(24);
  s.sensitivities = {0, 0, 0, 0, 1, 0, 0, 0, 0};
  s.noise = NoiseSpec{};
  const auto corpus = build_corpus(20, 50, 130, s, 600, 30.0, 9, 4);
  const TrainResult r = train(training_items(corpus), small_config(2, 5));
  int hits = 0;
  for (const auto& item : corpus) {
    const auto ps = periodogram(r.estimator.forward(item.cube), default_pulse_band());
    hits += std::abs(dominant_frequency(ps) - item.spec.pulse.frequency) <= ps.bin_width;
  }
  CHECK(hits >= 19);
}

TEST_CASE("train: argument errors") {
  const auto items = training_items(build_corpus(1, 60, 60, small_scene(), 600, 30.0, 10));
  CHECK_THROWS_AS(train({}, small_config(1)), Error);
  CHECK_THROWS_AS(train(items, small_config(0)), Error);
  TrainConfig cfg = small_config(1);
  cfg.learning_rate = -1.0;
  CHECK_THROWS_AS(train(items, cfg), Error);
  cfg = small_config(1);
  cfg.momentum = 1.0;
  CHECK_THROWS_AS(train(items, cfg), Error);
  cfg = small_config(1);
  CHECK_THROWS_AS(train(items, cfg, Estimator::random(RegionGrid(16, 16, 3, 3), 3, 100, 1)), Error);
  CHECK_THROWS_AS(train(items, cfg, Estimator::random(RegionGrid(20, 20, 3, 3), 3, 150, 1)), Error);
}

TEST_CASE("evaluate: oracle global mean on a noise-free corpus") {
  SceneSpec s = small_scene(24);
  s.noise = NoiseSpec{};
  const auto items = eval_items(build_corpus(10, 50, 130, s, 600, 30.0, 12, 4));
  const EvaluationReport rep =
      evaluate([](const VideoCube& c) { return Signal(standardize(c.global_mean()), c.fps()); }, items);
  CHECK(rep.mae < 1.0);
  REQUIRE(rep.r.has_value());
  CHECK(*rep.r > 0.99);
  CHECK(rep.hr_est.size() == 10);
  CHECK(rep.bland_altman.rows.size() == 10);
  const AgreementMetrics m = metrics(rep.hr_est, rep.hr_gt);
  CHECK(rep.rmse == doctest::Approx(m.rmse));
  CHECK(rep.std == doctest::Approx(m.std));
}

TEST_CASE("evaluate: an untrained estimator still reports") {
  const auto corpus = build_corpus(4, 50, 130, small_scene(), 600, 30.0, 13);
  const Estimator e = initial_estimator(corpus[0].cube, small_config(1));
  const EvaluationReport rep = evaluate(e, eval_items(corpus));
  CHECK(rep.hr_est.size() == 4);
  CHECK(std::isfinite(rep.mae));
  CHECK_THROWS_AS(evaluate(e, {}), Error);
}

TEST_CASE("train: loss on the default corpus decreases and its 10-epoch average never rises") {
  const TrainResult r = train(training_items(default_corpus()), small_config(20, 3));
  REQUIRE(r.trace.size() == 20);
  std::vector<double> total;
  for (const auto& t : r.trace) total.push_back(t.total);
  const double first = oracle::mean({total.begin(), total.begin() + 10});
  const double last = oracle::mean({total.end() - 10, total.end()});
  CHECK(last < first);
  for (std::size_t i = 0; i + 10 < total.size(); ++i) {
    const double now = oracle::mean({total.begin() + long(i), total.begin() + long(i) + 10});
    const double next = oracle::mean({total.begin() + long(i) + 1, total.begin() + long(i) + 11});
    CHECK(next <= now);
  }
}
