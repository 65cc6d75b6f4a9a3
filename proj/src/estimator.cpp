#include "pulseforge/estimator.hpp"

#include <random>

namespace pulseforge {

EstimatorGrad& EstimatorGrad::operator+=(const EstimatorGrad& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) weights[l] += other.weights[l];
  logits += other.logits;
  return *this;
}

Vector EstimatorGrad::flatten() const {
  Eigen::Index n = logits.size();
  for (const Vector& w : weights) n += w.size();
  Vector out(n);
  Eigen::Index at = 0;
  for (const Vector& w : weights) {
    out.segment(at, w.size()) = w;
    at += w.size();
  }
  out.segment(at, logits.size()) = logits.reshaped();
  return out;
}

Estimator::Estimator(RegionGrid grid, int channels, int horizon)
    : grid_(std::move(grid)), channels_(channels) {
  if (channels < 1 || horizon < 2) throw Error(ErrorKind::InvalidArgument, "estimator needs channels >= 1, horizon >= 2");
  for (int l = 0; l < grid_.size(); ++l) {
    const std::vector<Eigen::Index> cols = grid_.columns(l, channels_);
    std::vector<Run> runs;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (!runs.empty() && runs.back().column + runs.back().length == cols[j])
        ++runs.back().length;
      else
        runs.push_back({cols[j], Eigen::Index(j), 1});
    }
    runs_.push_back(std::move(runs));
    weights_.push_back(Vector::Zero(Eigen::Index(cols.size())));
  }
  logits_ = Matrix::Zero(grid_.size(), horizon);
}

Estimator Estimator::random(RegionGrid grid, int channels, int horizon, std::uint64_t seed) {
  Estimator est(std::move(grid), channels, horizon);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Vector& w : est.weights_)
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = gauss(rng);
  return est;
}

Eigen::Index Estimator::parameter_count() const {
  Eigen::Index n = logits_.size();
  for (const Vector& w : weights_) n += w.size();
  return n;
}

Vector Estimator::parameters() const {
  EstimatorGrad view{weights_, logits_};
  return view.flatten();
}

void Estimator::set_parameters(const Vector& flat) {
  if (flat.size() != parameter_count()) throw Error(ErrorKind::SizeMismatch, "parameter vector has wrong length");
  if (!flat.allFinite()) throw Error(ErrorKind::NonFinite, "non-finite parameters");
  Eigen::Index at = 0;
  for (Vector& w : weights_) {
    w = flat.segment(at, w.size());
    at += w.size();
  }
  logits_ = flat.segment(at, logits_.size()).reshaped(logits_.rows(), logits_.cols());
}

EstimatorGrad Estimator::zero_grad() const {
  EstimatorGrad g;
  for (const Vector& w : weights_) g.weights.push_back(Vector::Zero(w.size()));
  g.logits = Matrix::Zero(logits_.rows(), logits_.cols());
  return g;
}

void Estimator::check_compatible(const VideoCube& cube) const {
  if (cube.height() != grid_.height() || cube.width() != grid_.width() || cube.channels() != channels_)
    throw Error(ErrorKind::SizeMismatch, "cube frame shape does not match estimator");
}

Signal Estimator::forward(const VideoCube& cube, Trace* trace) const {
  check_compatible(cube);
  const int T = cube.frames();
  const int L = regions();
  Trace local;
  Trace& tr = trace ? *trace : local;
  tr.raw.resize(T, L);
  tr.experts.resize(T, L);
  tr.scale.resize(L);
  for (int l = 0; l < L; ++l) {
    const Vector& w = weights_[std::size_t(l)];
    for (int t = 0; t < T; ++t) {
      const float* row = cube.data().data() + Eigen::Index(t) * cube.pixels_per_frame();
      double acc = 0.0;
      for (const Run& run : runs_[std::size_t(l)])
        acc += Eigen::Map<const Eigen::VectorXf>(row + run.column, run.length).cast<double>().dot(
            w.segment(run.offset, run.length));
      tr.raw(t, l) = acc;
    }
    tr.experts.col(l) = standardize(tr.raw.col(l));
    const double mean = tr.raw.col(l).mean();
    tr.scale[l] = tr.experts.col(l).isZero(0.0)
                      ? 0.0
                      : std::sqrt((tr.raw.col(l).array() - mean).square().sum() / double(T - 1));
  }
  tr.gates.resize(L, T);
  const Matrix g = gate_weights(logits_);
  for (int t = 0; t < T; ++t) tr.gates.col(t) = g.col(t % horizon());
  Vector y = (tr.experts.array() * tr.gates.transpose().array()).rowwise().sum();
  return Signal(std::move(y), cube.fps());
}

EstimatorGrad Estimator::backward(const VideoCube& cube, const Trace& tr, const Vector& grad_signal) const {
  check_compatible(cube);
  const int T = cube.frames();
  const int L = regions();
  if (grad_signal.size() != T) throw Error(ErrorKind::SizeMismatch, "signal gradient length mismatch");
  EstimatorGrad g = zero_grad();

  // y[t] = sum_l gates(l,t) * experts(t,l)
  Matrix grad_gates(L, T);
  for (int t = 0; t < T; ++t) grad_gates.col(t) = tr.experts.row(t).transpose() * grad_signal[t];
  const Matrix grad_logits_tiled = gate_weights_vjp(tr.gates, grad_gates);
  for (int t = 0; t < T; ++t) g.logits.col(t % horizon()) += grad_logits_tiled.col(t);

  for (int l = 0; l < L; ++l) {
    if (tr.scale[l] == 0.0) continue;
    const Vector ge = grad_signal.cwiseProduct(tr.gates.row(l).transpose());
    const Vector e = tr.experts.col(l);
    // Reverse of e = (u - mean(u)) / std(u) with the n-1 convention.
    Vector gu = (ge.array() - ge.mean() - e.array() * (e.dot(ge) / double(T - 1))) / tr.scale[l];
    Vector& gw = g.weights[std::size_t(l)];
    for (int t = 0; t < T; ++t) {
      const float* row = cube.data().data() + Eigen::Index(t) * cube.pixels_per_frame();
      for (const Run& run : runs_[std::size_t(l)])
        gw.segment(run.offset, run.length) +=
            gu[t] * Eigen::Map<const Eigen::VectorXf>(row + run.column, run.length).cast<double>();
    }
  }
  return g;
}

}  // namespace pulseforge
