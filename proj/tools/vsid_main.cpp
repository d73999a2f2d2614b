// vsid: command-line front end for the speaker identification toolkit.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "vsid/acrlag.hpp"
#include "vsid/error.hpp"
#include "vsid/pipeline.hpp"
#include "vsid/spectral.hpp"
#include "vsid/synth.hpp"

namespace {

using nlohmann::json;

// Flags that shape the feature/model pipeline. Unset flags leave the
// defaults (or the --config file) untouched.
struct PipelineFlags {
  std::string config_path;
  std::optional<std::string> spectral_kind;
  std::optional<int> mixtures;
  std::optional<int> em_iterations;
  std::optional<int> lp_order;
  std::optional<int> lag;
  std::optional<double> eta;
  std::optional<std::uint64_t> seed;
  bool per_frame_average = false;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config overriding defaults")
        ->check(CLI::ExistingFile);
    app->add_option("--spectral", spectral_kind,
                    "spectral stream: MFCC, LFCC, LPCC, LSF, LAR or PLPCC");
    app->add_option("--mixtures", mixtures, "Gaussians per model (power of two)");
    app->add_option("--em-iterations", em_iterations, "EM passes");
    app->add_option("--lp-order", lp_order, "LP order of the residual stream");
    app->add_option("--lag", lag, "ACRLAG maximum lag");
    app->add_option("--eta", eta, "fusion weight on the spectral stream");
    app->add_option("--seed", seed, "training seed");
    app->add_flag("--per-frame-average", per_frame_average,
                  "normalize stream scores by frame count");
  }

  vsid::PipelineConfig Resolve(vsid::PipelineConfig cfg = {}) const {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw vsid::Error(vsid::ErrorCode::kFormatError, config_path + ": " + e.what());
      }
      cfg = vsid::ConfigFromJson(j, cfg);
    }
    if (spectral_kind) cfg.spectral.kind = vsid::ParseFeatureKind(*spectral_kind);
    if (mixtures) cfg.train.n_components = *mixtures;
    if (em_iterations) cfg.train.em_iterations = *em_iterations;
    if (lp_order) cfg.acrlag.lp_order = *lp_order;
    if (lag) cfg.acrlag.lag = *lag;
    if (eta) cfg.fusion.eta = *eta;
    if (seed) cfg.train.seed = *seed;
    if (per_frame_average) cfg.per_frame_average = true;
    cfg.Validate();
    return cfg;
  }
};

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw vsid::Error(vsid::ErrorCode::kIoError, "cannot write " + path);
  out << text;
}

int RunSynth(const vsid::SynthConfig& cfg, const std::string& out_dir) {
  const auto manifest = vsid::SynthCorpus(out_dir, cfg);
  for (const auto& s : vsid::MakeSpeakers(cfg))
    std::cout << s.id << "  pitch period " << s.pitch_period << " samples\n";
  std::cout << "wrote " << manifest.speakers.size() << " speakers to " << out_dir
            << "/manifest.json\n";
  return 0;
}

int RunExtract(const std::string& wav, const std::string& out_prefix, bool csv,
               const PipelineFlags& flags) {
  const auto cfg = flags.Resolve();
  const auto streams = vsid::ExtractStreams(vsid::ReadWav(wav), cfg);
  for (const auto* m : {&streams.spectral, &streams.residual}) {
    std::string name(vsid::FeatureKindName(m->kind()));
    std::transform(name.begin(), name.end(), name.begin(), ::tolower);
    const std::string path = out_prefix + "." + name + (csv ? ".csv" : ".feat");
    if (csv) {
      std::ofstream out(path);
      if (!out) throw vsid::Error(vsid::ErrorCode::kIoError, "cannot write " + path);
      vsid::WriteFeaturesCsv(out, *m);
    } else {
      vsid::SaveFeatures(path, *m);
    }
    std::cout << path << ": " << m->rows() << " x " << m->dim() << '\n';
  }
  return 0;
}

int RunTrain(const std::string& manifest_path, const std::string& out,
             const std::string& json_out, const PipelineFlags& flags) {
  const auto cfg = flags.Resolve();
  const auto manifest = vsid::LoadManifest(manifest_path);
  const auto db = vsid::TrainDatabase(manifest, cfg);
  vsid::SaveDatabase(out, db);
  if (!json_out.empty()) WriteText(json_out, vsid::DatabaseToJson(db).dump(2) + "\n");
  std::cout << "trained " << db.speakers.size() << " speakers ("
            << vsid::FeatureKindName(cfg.spectral.kind) << " + ACRLAG, M="
            << cfg.train.n_components << ") -> " << out << '\n';
  return 0;
}

vsid::FusionConfig FusionFor(const vsid::SpeakerDatabase& db, std::optional<double> eta) {
  vsid::FusionConfig f = db.config.fusion;
  if (eta) f.eta = *eta;
  f.Validate();
  return f;
}

int RunIdentify(const std::string& db_path, const std::string& wav,
                std::optional<double> eta, bool as_json) {
  const auto db = vsid::LoadDatabase(db_path);
  const auto fusion = FusionFor(db, eta);
  auto scores = vsid::ScoreUtterance(db, vsid::ReadWav(wav));
  const auto decision = vsid::Decide(scores, fusion);
  std::stable_sort(scores.begin(), scores.end(), [&](const auto& a, const auto& b) {
    return vsid::FuseScores(a.spectral, a.residual, fusion) >
           vsid::FuseScores(b.spectral, b.residual, fusion);
  });
  if (as_json) {
    json ranked = json::array();
    for (const auto& s : scores)
      ranked.push_back({{"id", s.id},
                        {"spectral", s.spectral},
                        {"residual", s.residual},
                        {"fused", vsid::FuseScores(s.spectral, s.residual, fusion)}});
    std::cout << json{{"eta", fusion.eta},
                      {"identified",
                       {{"spectral", decision.spectral},
                        {"residual", decision.residual},
                        {"fused", decision.fused}}},
                      {"ranking", ranked}}
                     .dump(2)
              << '\n';
    return 0;
  }
  std::printf("%-4s %-12s %14s %14s %14s\n", "rank", "speaker", "fused", "spectral", "residual");
  for (std::size_t i = 0; i < scores.size(); ++i)
    std::printf("%-4zu %-12s %14.3f %14.3f %14.3f\n", i + 1, scores[i].id.c_str(),
                vsid::FuseScores(scores[i].spectral, scores[i].residual, fusion),
                scores[i].spectral, scores[i].residual);
  std::cout << "identified: " << decision.fused << " (spectral " << decision.spectral
            << ", residual " << decision.residual << ")\n";
  return 0;
}

int RunEvaluate(const std::string& db_path, const std::string& manifest_path,
                std::optional<double> eta, const std::string& report_path) {
  const auto db = vsid::LoadDatabase(db_path);
  const auto report =
      vsid::Evaluate(db, vsid::LoadManifest(manifest_path), FusionFor(db, eta));
  std::cout << vsid::FormatReportTable(report);
  for (const auto& t : report.trials)
    if (!t.decision) std::cerr << "failed: " << t.error << '\n';
  if (!report_path.empty()) WriteText(report_path, vsid::ReportToJson(report).dump(2) + "\n");
  return 0;
}

int RunSweep(const std::string& db_path, const std::string& manifest_path, int steps,
             const std::string& report_path) {
  if (steps < 2) throw vsid::Error(vsid::ErrorCode::kInvalidArgument, "need at least 2 steps");
  const auto db = vsid::LoadDatabase(db_path);
  const auto base = vsid::Evaluate(db, vsid::LoadManifest(manifest_path), db.config.fusion);
  json rows = json::array();
  std::printf("%8s %10s %10s %10s\n", "eta", "spectral", "residual", "fused");
  for (int i = 0; i < steps; ++i) {
    const double eta = static_cast<double>(i) / (steps - 1);
    const auto report = vsid::Refuse(base, {eta});
    const double s = report.Tally(vsid::Stream::kSpectral).pia();
    const double r = report.Tally(vsid::Stream::kResidual).pia();
    const double f = report.Tally(vsid::Stream::kFused).pia();
    std::printf("%8.3f %10.2f %10.2f %10.2f\n", eta, s, r, f);
    rows.push_back({{"eta", eta}, {"spectral", s}, {"residual", r}, {"fused", f}});
  }
  if (!report_path.empty()) WriteText(report_path, json{{"sweep", rows}}.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speaker identification with LP-residual autocorrelation (ACRLAG) features"};
  app.require_subcommand(1);

  vsid::SynthConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth-corpus", "generate a seeded synthetic corpus");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--speakers", synth.n_speakers, "number of speakers");
  synth_cmd->add_option("--train-utterances", synth.train_utterances, "training files per speaker");
  synth_cmd->add_option("--test-utterances", synth.test_utterances, "test files per speaker");
  synth_cmd->add_option("--train-seconds", synth.train_seconds, "voiced seconds per training file");
  synth_cmd->add_option("--test-seconds", synth.test_seconds, "voiced seconds per test file");
  synth_cmd->add_option("--snr-db", synth.snr_db, "additive noise SNR");
  synth_cmd->add_option("--seed", synth.seed, "corpus seed");

  PipelineFlags extract_flags;
  std::string extract_wav, extract_out;
  bool extract_csv = false;
  auto* extract_cmd = app.add_subcommand("extract", "write spectral and ACRLAG features of a WAV");
  extract_cmd->add_option("wav", extract_wav, "16-bit PCM mono WAV")->required();
  extract_cmd->add_option("-o,--out", extract_out, "output prefix")->required();
  extract_cmd->add_flag("--csv", extract_csv, "write CSV instead of binary");
  extract_flags.Register(extract_cmd);

  PipelineFlags train_flags;
  std::string train_manifest, train_out, train_json;
  auto* train_cmd = app.add_subcommand("train", "train per-speaker spectral and residual GMMs");
  train_cmd->add_option("--manifest", train_manifest, "corpus manifest JSON")->required();
  train_cmd->add_option("-o,--out", train_out, "database file")->required();
  train_cmd->add_option("--json", train_json, "also write a JSON dump of the models");
  train_flags.Register(train_cmd);

  std::string id_db, id_wav;
  std::optional<double> id_eta;
  bool id_json = false;
  auto* id_cmd = app.add_subcommand("identify", "rank enrolled speakers for one utterance");
  id_cmd->add_option("--db", id_db, "database file")->required();
  id_cmd->add_option("wav", id_wav, "16-bit PCM mono WAV")->required();
  id_cmd->add_option("--eta", id_eta, "fusion weight (default: database setting)");
  id_cmd->add_flag("--json", id_json, "emit JSON");

  std::string ev_db, ev_manifest, ev_report;
  std::optional<double> ev_eta;
  auto* ev_cmd = app.add_subcommand("evaluate", "closed-set identification accuracy");
  ev_cmd->add_option("--db", ev_db, "database file")->required();
  ev_cmd->add_option("--manifest", ev_manifest, "corpus manifest JSON")->required();
  ev_cmd->add_option("--eta", ev_eta, "fusion weight (default: database setting)");
  ev_cmd->add_option("--report", ev_report, "write the JSON report here");

  std::string sw_db, sw_manifest, sw_report;
  int sw_steps = 11;
  auto* sw_cmd = app.add_subcommand("fuse-sweep", "accuracy over a grid of fusion weights");
  sw_cmd->add_option("--db", sw_db, "database file")->required();
  sw_cmd->add_option("--manifest", sw_manifest, "corpus manifest JSON")->required();
  sw_cmd->add_option("--steps", sw_steps, "grid points over [0, 1]");
  sw_cmd->add_option("--report", sw_report, "write the JSON sweep here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return RunSynth(synth, synth_out);
    if (*extract_cmd) return RunExtract(extract_wav, extract_out, extract_csv, extract_flags);
    if (*train_cmd) return RunTrain(train_manifest, train_out, train_json, train_flags);
    if (*id_cmd) return RunIdentify(id_db, id_wav, id_eta, id_json);
    if (*ev_cmd) return RunEvaluate(ev_db, ev_manifest, ev_eta, ev_report);
    if (*sw_cmd) return RunSweep(sw_db, sw_manifest, sw_steps, sw_report);
  } catch (const vsid::Error& e) {
    std::cerr << "vsid: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "vsid: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
