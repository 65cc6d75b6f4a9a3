#include "pulseforge/serialize.hpp"

#include "pulseforge/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace pulseforge {

using nlohmann::json;
namespace fs = std::filesystem;

void to_json(json& j, const PulseModel& p) {
  j = {{"amplitude", p.amplitude}, {"frequency", p.frequency}, {"phase", p.phase}, {"baseline", p.baseline}};
}

void from_json(const json& j, PulseModel& p) {
  p.amplitude = j.at("amplitude").get<double>();
  p.frequency = j.at("frequency").get<double>();
  p.phase = j.at("phase").get<double>();
  p.baseline = j.at("baseline").get<double>();
}

void to_json(json& j, const NoiseSpec& n) {
  j = {{"white_sigma", n.white_sigma},         {"drift_amplitude", n.drift_amplitude},
       {"drift_frequency", n.drift_frequency}, {"transient_count", n.transient_count},
       {"transient_amplitude", n.transient_amplitude}};
}

void from_json(const json& j, NoiseSpec& n) {
  n.white_sigma = j.at("white_sigma").get<double>();
  n.drift_amplitude = j.at("drift_amplitude").get<double>();
  n.drift_frequency = j.at("drift_frequency").get<double>();
  n.transient_count = j.at("transient_count").get<int>();
  n.transient_amplitude = j.at("transient_amplitude").get<double>();
}

void to_json(json& j, const SceneSpec& s) {
  j = {{"pulse", s.pulse}, {"sensitivities", s.sensitivities}, {"noise", s.noise},
       {"height", s.height}, {"width", s.width}, {"seed", s.seed}};
}

void from_json(const json& j, SceneSpec& s) {
  s.pulse = j.at("pulse").get<PulseModel>();
  s.sensitivities = j.at("sensitivities").get<std::vector<double>>();
  s.noise = j.at("noise").get<NoiseSpec>();
  s.height = j.at("height").get<int>();
  s.width = j.at("width").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
}

void to_json(json& j, const LossBreakdown& b) {
  j = {{"l_fc", b.l_fc}, {"l_fr", b.l_fr}, {"l_fa", b.l_fa}, {"l_vr", b.l_vr}, {"total", b.total}};
}

json estimator_to_json(const Estimator& est) {
  json weights = json::array();
  for (int l = 0; l < est.regions(); ++l) {
    const Vector& w = est.weights(l);
    weights.push_back(std::vector<double>(w.data(), w.data() + w.size()));
  }
  json logits = json::array();
  for (Eigen::Index l = 0; l < est.logits().rows(); ++l) {
    const Vector row = est.logits().row(l).transpose();
    logits.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  return {{"height", est.grid().height()}, {"width", est.grid().width()},
          {"grid_rows", est.grid().rows()}, {"grid_cols", est.grid().cols()},
          {"channels", est.channels()}, {"horizon", est.horizon()},
          {"weights", std::move(weights)}, {"logits", std::move(logits)}};
}

Estimator estimator_from_json(const json& j) {
  try {
    Estimator est(partition(j.at("height").get<int>(), j.at("width").get<int>(), j.at("grid_rows").get<int>(),
                            j.at("grid_cols").get<int>()),
                  j.at("channels").get<int>(), j.at("horizon").get<int>());
    const json& weights = j.at("weights");
    const json& logits = j.at("logits");
    if (weights.size() != std::size_t(est.regions()) || logits.size() != std::size_t(est.regions()))
      throw Error(ErrorKind::MalformedHeader, "model region count mismatch");
    for (int l = 0; l < est.regions(); ++l) {
      const auto w = weights[std::size_t(l)].get<std::vector<double>>();
      const auto g = logits[std::size_t(l)].get<std::vector<double>>();
      if (Eigen::Index(w.size()) != est.weights(l).size() || Eigen::Index(g.size()) != est.horizon())
        throw Error(ErrorKind::MalformedHeader, "model parameter block has wrong length");
      est.weights(l) = Eigen::Map<const Vector>(w.data(), Eigen::Index(w.size()));
      est.logits().row(l) = Eigen::Map<const Vector>(g.data(), Eigen::Index(g.size())).transpose();
    }
    return est;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedHeader, std::string("model json: ") + e.what());
  }
}

json manifest_to_json(const CorpusManifest& m) {
  json items = json::array();
  for (const auto& e : m.items)
    items.push_back({{"name", e.name},
                     {"frequency_hz", e.scene.pulse.frequency},
                     {"hr_bpm", 60.0 * e.scene.pulse.frequency},
                     {"scene", e.scene}});
  return {{"frames", m.frames}, {"fps", m.fps}, {"items", std::move(items)}};
}

CorpusManifest manifest_from_json(const json& j) {
  try {
    CorpusManifest m;
    m.frames = j.at("frames").get<int>();
    m.fps = j.at("fps").get<double>();
    for (const json& item : j.at("items"))
      m.items.push_back({item.at("name").get<std::string>(), item.at("scene").get<SceneSpec>()});
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedHeader, std::string("manifest: ") + e.what());
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedHeader, path.string() + ": " + e.what());
  }
}

void write_corpus(const std::vector<CorpusItem>& corpus, const fs::path& dir) {
  if (corpus.empty()) throw Error(ErrorKind::InvalidArgument, "empty corpus");
  fs::create_directories(dir);
  CorpusManifest m{corpus.front().cube.frames(), corpus.front().cube.fps(), {}};
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::ostringstream name;
    name << "item_" << std::setw(3) << std::setfill('0') << i;
    io::write_cube(corpus[i].cube, dir / name.str());
    m.items.push_back({name.str(), corpus[i].spec});
  }
  io::write_text_atomic(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

std::vector<CorpusItem> read_corpus(const fs::path& dir) {
  const CorpusManifest m = manifest_from_json(read_json(dir / "manifest.json"));
  std::vector<CorpusItem> out;
  for (const auto& e : m.items) {
    VideoCube cube = io::read_cube(dir / e.name);
    Signal truth = generate_signal(e.scene.pulse, cube.frames(), cube.fps());
    out.push_back({e.scene, std::move(cube), std::move(truth)});
  }
  return out;
}

}  // namespace pulseforge
