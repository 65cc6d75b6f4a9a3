#include "pulseforge/cli.hpp"

#include "pulseforge/freq_mod.hpp"
#include "pulseforge/io.hpp"
#include "pulseforge/serialize.hpp"
#include "pulseforge/spectral.hpp"
#include "pulseforge/trainer.hpp"
#include "pulseforge/vitals.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace pulseforge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

BandSpec parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorKind::InvalidArgument, "band must look like lo:hi");
  try {
    return BandSpec(std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1)));
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::InvalidArgument, "band must look like lo:hi");
  }
}

std::uint64_t resolve_seed(const CLI::Option* flag, std::uint64_t value) {
  if (flag->count() > 0) return value;
  if (const char* env = std::getenv("PULSEFORGE_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::InvalidArgument, "PULSEFORGE_SEED is not an unsigned integer");
    }
  }
  throw Error(ErrorKind::InvalidArgument, "--seed is required (or set PULSEFORGE_SEED)");
}

/// Scene for a cube stored in a corpus directory, found through the sibling manifest.
SceneSpec scene_for_cube(const fs::path& cube, const std::string& scene_path) {
  if (!scene_path.empty()) return read_json(scene_path).get<SceneSpec>();
  const fs::path stem = io::cube_stem(cube);
  const CorpusManifest m = manifest_from_json(read_json(stem.parent_path() / "manifest.json"));
  for (const auto& e : m.items)
    if (e.name == stem.filename().string()) return e.scene;
  throw Error(ErrorKind::InvalidArgument, "cube " + stem.string() + " not listed in its manifest");
}

std::vector<double> read_column(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string field = line.substr(line.find_last_of(',') == std::string::npos ? 0 : line.find_last_of(',') + 1);
    try {
      std::size_t used = 0;
      const double v = std::stod(field, &used);
      if (used != field.size()) throw std::invalid_argument(field);
      out.push_back(v);
    } catch (const std::logic_error&) {
      if (!first) throw Error(ErrorKind::MalformedHeader, "non-numeric row in " + path.string() + ": " + line);
    }
    first = false;
  }
  return out;
}

std::string csv_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string trace_csv(const std::vector<LossBreakdown>& trace) {
  std::ostringstream out;
  out << std::setprecision(17) << "epoch,l_fc,l_fr,l_fa,l_vr,total\n";
  for (std::size_t e = 0; e < trace.size(); ++e)
    out << e << ',' << trace[e].l_fc << ',' << trace[e].l_fr << ',' << trace[e].l_fa << ',' << trace[e].l_vr
        << ',' << trace[e].total << '\n';
  return out.str();
}

std::string bland_altman_csv(const BlandAltman& ba) {
  std::ostringstream out;
  out << std::setprecision(17) << "mean,diff,bias,lower,upper\n";
  for (const auto& row : ba.rows)
    out << row.mean << ',' << row.diff << ',' << ba.bias << ',' << ba.lower << ',' << ba.upper << '\n';
  return out.str();
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pulseforge: synthetic rPPG simulation, frequency-inspired losses, training and vitals"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::uint64_t seed = 0;
  int jobs = 1;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic pulse-bearing corpus");
  int n = 0, frames = 600;
  double hr_lo = 50, hr_hi = 130, fps = 30, noise = 0.02;
  std::string out_dir;
  synth->add_option("--n", n, "Number of recordings")->required();
  synth->add_option("--hr-lo", hr_lo, "Lowest heart rate, bpm");
  synth->add_option("--hr-hi", hr_hi, "Highest heart rate, bpm");
  synth->add_option("--t", frames, "Frames per recording");
  synth->add_option("--fps", fps, "Frame rate");
  synth->add_option("--noise", noise, "White pixel noise sigma");
  auto* synth_seed = synth->add_option("--seed", seed, "Random seed");
  synth->add_option("--jobs", jobs, "Worker threads");
  synth->add_option("--out-dir", out_dir, "Output directory")->required();

  // modulate
  auto* modulate = app.add_subcommand("modulate", "Scale the embedded pulse frequency of a cube or signal");
  std::string mod_in, mod_signal, mod_out, mod_scene;
  double ratio = 1.0;
  auto* mod_in_opt = modulate->add_option("--in", mod_in, "Input cube (corpus item)");
  auto* mod_sig_opt = modulate->add_option("--signal", mod_signal, "Input signal CSV/JSON (resampling path)");
  mod_in_opt->excludes(mod_sig_opt);
  modulate->add_option("--scene", mod_scene, "Scene JSON (default: look up the cube in its manifest)");
  modulate->add_option("--ratio", ratio, "Frequency ratio r > 0")->required();
  modulate->add_option("--out", mod_out, "Output path")->required();

  // psd
  auto* psd = app.add_subcommand("psd", "Band-restricted normalized periodogram of a signal");
  std::string psd_in, psd_out, band_text = "0.5:3.0";
  long long pad = 0;
  psd->add_option("--in", psd_in, "Signal CSV/JSON")->required();
  psd->add_option("--pad", pad, "Zero-padded length (default: next power of two >= 4T)");
  psd->add_option("--band", band_text, "Band lo:hi in Hz");
  psd->add_option("--out", psd_out, "Spectrum CSV")->required();

  // losses
  auto* losses = app.add_subcommand("losses", "Evaluate the loss breakdown on one recording");
  std::string loss_input, loss_model, loss_scene;
  TrainConfig loss_cfg;
  losses->add_option("--input", loss_input, "Recording cube (corpus item)")->required();
  losses->add_option("--model", loss_model, "Model JSON (default: seeded random estimator)");
  losses->add_option("--scene", loss_scene, "Scene JSON (default: manifest lookup)");
  losses->add_option("--clip-length", loss_cfg.clip_length, "Clip length T");
  losses->add_option("--k", loss_cfg.loss.k, "Negatives per sample");
  losses->add_option("--j", loss_cfg.loss.J, "Neighbours per sample");
  losses->add_option("--tau", loss_cfg.loss.temperature, "Contrastive temperature");
  losses->add_option("--band", band_text, "Loss band lo:hi in Hz");
  auto* loss_seed = losses->add_option("--seed", seed, "Random seed");

  // train
  auto* train_cmd = app.add_subcommand("train", "Self-supervised training on a corpus");
  std::string corpus_dir, model_out, trace_out;
  TrainConfig train_cfg;
  train_cmd->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  train_cmd->add_option("--epochs", train_cfg.epochs, "Epochs");
  train_cmd->add_option("--lr", train_cfg.learning_rate, "Relative step size");
  train_cmd->add_option("--momentum", train_cfg.momentum, "Momentum in [0, 1)");
  train_cmd->add_option("--clip-length", train_cfg.clip_length, "Clip length T");
  train_cmd->add_option("--grid", train_cfg.grid_side, "Regions per side (L = grid^2)");
  train_cmd->add_option("--k", train_cfg.loss.k, "Negatives per sample");
  train_cmd->add_option("--j", train_cfg.loss.J, "Neighbours per sample");
  train_cmd->add_option("--tau", train_cfg.loss.temperature, "Contrastive temperature");
  train_cmd->add_option("--pad", train_cfg.loss.pad_len, "Periodogram length (0 = auto)");
  train_cmd->add_option("--band", band_text, "Loss band lo:hi in Hz");
  auto* train_seed = train_cmd->add_option("--seed", seed, "Random seed");
  train_cmd->add_option("--out", model_out, "Model JSON")->required();
  train_cmd->add_option("--trace", trace_out, "Loss trace CSV (default: <out>.trace.csv)");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Heart-rate agreement of a model on a corpus");
  std::string eval_model, eval_corpus, eval_out;
  eval_cmd->add_option("--model", eval_model, "Model JSON")->required();
  eval_cmd->add_option("--corpus", eval_corpus, "Corpus directory")->required();
  eval_cmd->add_option("--out", eval_out, "Report directory")->required();
  eval_cmd->add_option("--jobs", jobs, "Worker threads");

  // vitals
  auto* vitals_cmd = app.add_subcommand("vitals", "HR, HRV and RF of a signal");
  std::string vit_in, vit_out;
  vitals_cmd->add_option("--in", vit_in, "Signal CSV/JSON")->required();
  vitals_cmd->add_option("--out", vit_out, "Report JSON")->required();

  // bland-altman
  auto* ba_cmd = app.add_subcommand("bland-altman", "Bland-Altman table for paired estimates");
  std::string ba_est, ba_gt, ba_out;
  ba_cmd->add_option("--est", ba_est, "Estimates CSV (last column)")->required();
  ba_cmd->add_option("--gt", ba_gt, "Reference CSV (last column)")->required();
  ba_cmd->add_option("--out", ba_out, "Output CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n" << sub->help();
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (synth->parsed()) {
      SceneSpec scene = default_scene();
      scene.noise.white_sigma = noise;
      const auto corpus = build_corpus(n, hr_lo, hr_hi, scene, frames, fps, resolve_seed(synth_seed, seed), jobs);
      write_corpus(corpus, out_dir);
      out << json{{"items", corpus.size()}, {"manifest", (fs::path(out_dir) / "manifest.json").string()}}.dump() << "\n";
    } else if (modulate->parsed()) {
      const FrequencyRatio r(ratio);
      if (mod_sig_opt->count() > 0) {
        const Signal s = io::read_signal(mod_signal);
        io::write_signal(modulate_resample(s, r, s.size()), mod_out);
      } else if (mod_in_opt->count() > 0) {
        const VideoCube cube = io::read_cube(mod_in);
        const SceneSpec scene = scene_for_cube(mod_in, mod_scene);
        const auto negatives = make_negatives(cube, {scene.pulse, pulse_gain_map(scene)}, {r});
        io::write_cube(negatives.front(), mod_out);
      } else {
        throw Error(ErrorKind::InvalidArgument, "modulate needs --in or --signal");
      }
    } else if (psd->parsed()) {
      const Signal s = io::read_signal(psd_in);
      const PowerSpectrum ps = periodogram(s, pad > 0 ? Eigen::Index(pad) : default_pad_len(s.size()), parse_band(band_text));
      std::ostringstream csv;
      csv << std::setprecision(17) << "freq_hz,power\n";
      for (Eigen::Index k = 0; k < ps.freqs.size(); ++k) csv << ps.freqs[k] << ',' << ps.powers[k] << '\n';
      io::write_text_atomic(psd_out, csv.str());
      out << json{{"dominant_frequency_hz", dominant_frequency(ps)}, {"bin_width_hz", ps.bin_width}}.dump() << "\n";
    } else if (losses->parsed()) {
      loss_cfg.loss.band = parse_band(band_text);
      loss_cfg.seed = resolve_seed(loss_seed, seed);
      const VideoCube cube = io::read_cube(loss_input);
      const SceneSpec scene = scene_for_cube(loss_input, loss_scene);
      const TrainingItem item{cube, {scene.pulse, pulse_gain_map(scene)}};
      const Estimator est = loss_model.empty() ? initial_estimator(cube, loss_cfg)
                                               : estimator_from_json(read_json(loss_model));
      const Batch b = make_batch(item, loss_cfg, loss_cfg.seed);
      SignalBatch signals{est.forward(b.cubes.p1), est.forward(b.cubes.p2), {}, b.cubes.ratios, {}};
      for (const auto& c : b.cubes.negatives) signals.negatives.push_back(est.forward(c));
      for (const auto& c : b.cubes.neighbors) signals.neighbors.push_back(est.forward(c));
      const LossBreakdown lb = total_loss(signals, l_vr(b.cubes.anchor, b.cubes.negatives), loss_cfg.loss);
      json j = lb;
      j["anchor_clip"] = b.anchor_clip;
      std::vector<double> rs;
      for (const auto& r : b.cubes.ratios) rs.push_back(r.value());
      j["ratios"] = rs;
      out << j.dump(2) << "\n";
    } else if (train_cmd->parsed()) {
      train_cfg.loss.band = parse_band(band_text);
      train_cfg.seed = resolve_seed(train_seed, seed);
      const auto items = training_items(read_corpus(corpus_dir));
      const TrainResult result = train(items, train_cfg);
      io::write_text_atomic(model_out, estimator_to_json(result.estimator).dump() + "\n");
      fs::path trace_path = trace_out;
      if (trace_path.empty()) trace_path = fs::path(model_out).replace_extension(".trace.csv");
      io::write_text_atomic(trace_path, trace_csv(result.trace));
      out << json{{"epochs", result.trace.size()}, {"final", result.trace.back()}, {"trace", trace_path.string()}}.dump()
          << "\n";
    } else if (eval_cmd->parsed()) {
      const Estimator est = estimator_from_json(read_json(eval_model));
      const EvaluationReport rep = evaluate(est, eval_items(read_corpus(eval_corpus)), jobs);
      fs::create_directories(eval_out);
      const json report = {{"mae", rep.mae},
                           {"rmse", rep.rmse},
                           {"r", optional_json(rep.r)},
                           {"std", rep.std},
                           {"bias", rep.bland_altman.bias},
                           {"loa_lower", rep.bland_altman.lower},
                           {"loa_upper", rep.bland_altman.upper},
                           {"hr_est", rep.hr_est},
                           {"hr_gt", rep.hr_gt}};
      io::write_text_atomic(fs::path(eval_out) / "report.json", report.dump(2) + "\n");
      io::write_text_atomic(fs::path(eval_out) / "bland_altman.csv", bland_altman_csv(rep.bland_altman));
      std::ostringstream hr;
      hr << "hr_est_bpm,hr_gt_bpm\n";
      for (std::size_t i = 0; i < rep.hr_est.size(); ++i) hr << csv_number(rep.hr_est[i]) << ',' << csv_number(rep.hr_gt[i]) << '\n';
      io::write_text_atomic(fs::path(eval_out) / "hr.csv", hr.str());
      out << json{{"mae", rep.mae}, {"rmse", rep.rmse}, {"r", optional_json(rep.r)}, {"std", rep.std}}.dump() << "\n";
    } else if (vitals_cmd->parsed()) {
      const VitalsReport rep = vitals_report(io::read_signal(vit_in));
      json j = {{"hr_bpm", rep.hr}, {"hr_reliable", rep.hr_reliable}, {"notes", rep.notes}};
      j["lf"] = rep.hrv ? json(rep.hrv->lf) : json(nullptr);
      j["hf"] = rep.hrv ? json(rep.hrv->hf) : json(nullptr);
      j["lf_hf"] = rep.hrv ? json(rep.hrv->lf_hf) : json(nullptr);
      j["rf_hz"] = optional_json(rep.rf);
      io::write_text_atomic(vit_out, j.dump(2) + "\n");
      out << j.dump() << "\n";
    } else if (ba_cmd->parsed()) {
      const BlandAltman ba = bland_altman(read_column(ba_est), read_column(ba_gt));
      io::write_text_atomic(ba_out, bland_altman_csv(ba));
      out << json{{"bias", ba.bias}, {"loa_lower", ba.lower}, {"loa_upper", ba.upper}}.dump() << "\n";
    }
  } catch (const Error& e) {
    err << json{{"error", to_string(e.kind())}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace pulseforge::cli
