#pragma once

#include "pulseforge/estimator.hpp"
#include "pulseforge/losses.hpp"
#include "pulseforge/synth.hpp"
#include "pulseforge/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace pulseforge {

void to_json(nlohmann::json& j, const PulseModel& p);
void from_json(const nlohmann::json& j, PulseModel& p);
void to_json(nlohmann::json& j, const NoiseSpec& n);
void from_json(const nlohmann::json& j, NoiseSpec& n);
void to_json(nlohmann::json& j, const SceneSpec& s);
void from_json(const nlohmann::json& j, SceneSpec& s);
void to_json(nlohmann::json& j, const LossBreakdown& b);

nlohmann::json estimator_to_json(const Estimator& est);
Estimator estimator_from_json(const nlohmann::json& j);

/// On-disk corpus: `<dir>/manifest.json` plus one cube pair per item.
struct CorpusManifest {
  struct Entry {
    std::string name;
    SceneSpec scene;
  };
  int frames = 0;
  double fps = 0.0;
  std::vector<Entry> items;
};

nlohmann::json manifest_to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const nlohmann::json& j);

void write_corpus(const std::vector<CorpusItem>& corpus, const std::filesystem::path& dir);
/// Reloads cubes and scenes; item truth signals are regenerated from the scene pulse.
std::vector<CorpusItem> read_corpus(const std::filesystem::path& dir);

nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace pulseforge
