#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsid/acrlag.hpp"
#include "vsid/features.hpp"
#include "vsid/gmm.hpp"
#include "vsid/signal_prep.hpp"
#include "vsid/spectral.hpp"

namespace vsid {

struct FusionConfig {
  double eta = 0.5;  // weight on the spectral stream
  void Validate() const;
};

struct PipelineConfig {
  FrameConfig frame;
  AcrlagConfig acrlag;
  SpectralConfig spectral;
  TrainConfig train;
  FusionConfig fusion;
  // Divide stream scores by their frame counts before fusion.
  bool per_frame_average = false;

  void Validate() const;
};

nlohmann::json ConfigToJson(const PipelineConfig& cfg);
// Keys absent from j keep the values already in base.
PipelineConfig ConfigFromJson(const nlohmann::json& j, PipelineConfig base = {});

struct StreamFeatures {
  FeatureMatrix spectral;
  FeatureMatrix residual;
};

// Both streams are computed from the same prepared frames.
StreamFeatures ExtractStreams(const AudioSignal& audio, const PipelineConfig& cfg);

struct SpeakerEntry {
  std::string id;
  std::vector<std::string> train;
  std::vector<std::string> test;
};

struct CorpusManifest {
  std::vector<SpeakerEntry> speakers;

  // Unique ids, disjoint train/test per speaker; optionally that files exist.
  void Validate(bool check_files) const;
};

// JSON: {"speakers": [{"id": "...", "train": [...], "test": [...]}]}.
// Relative paths resolve against base_dir.
CorpusManifest ManifestFromJson(const nlohmann::json& j, const std::string& base_dir = "");
nlohmann::json ManifestToJson(const CorpusManifest& m);
CorpusManifest LoadManifest(const std::string& path);
void SaveManifest(const std::string& path, const CorpusManifest& m);

struct SpeakerModels {
  GmmModel spectral;
  GmmModel residual;
  friend bool operator==(const SpeakerModels&, const SpeakerModels&) = default;
};

struct SpeakerDatabase {
  PipelineConfig config;
  std::map<std::string, SpeakerModels> speakers;  // ordered by id
};

SpeakerDatabase TrainDatabase(const CorpusManifest& manifest, const PipelineConfig& cfg);

// Binary layout (little-endian):
//   char[8] magic "VSID-SDB", u32 version (1), u32 length + config JSON,
//   u32 speaker count, then per speaker: u32 length + id, spectral GMM block,
//   residual GMM block (each in the standalone GMM layout).
inline constexpr std::uint32_t kDatabaseFormatVersion = 1;
void SaveDatabase(const std::string& path, const SpeakerDatabase& db);
SpeakerDatabase LoadDatabase(const std::string& path);
std::vector<unsigned char> SerializeDatabase(const SpeakerDatabase& db);
SpeakerDatabase DeserializeDatabase(const std::vector<unsigned char>& bytes);
nlohmann::json DatabaseToJson(const SpeakerDatabase& db);

struct SpeakerScore {
  std::string id;
  double spectral = 0.0;
  double residual = 0.0;
};

// One entry per enrolled speaker, in id order.
std::vector<SpeakerScore> ScoreUtterance(const SpeakerDatabase& db, const AudioSignal& audio);

inline double FuseScores(double spectral, double residual, const FusionConfig& cfg) {
  return cfg.eta * spectral + (1.0 - cfg.eta) * residual;
}

struct Identification {
  std::string spectral;
  std::string residual;
  std::string fused;
};

// Per-stream and fused argmax; ties go to the lexicographically smallest id.
Identification Decide(const std::vector<SpeakerScore>& scores, const FusionConfig& cfg);

Identification Identify(const SpeakerDatabase& db, const AudioSignal& audio,
                        const FusionConfig& cfg);

enum class Stream { kSpectral, kResidual, kFused };

struct Trial {
  std::string path;
  std::string true_speaker;
  std::vector<SpeakerScore> scores;
  std::optional<Identification> decision;  // empty when the utterance failed
  std::string error;
};

struct StreamTally {
  int correct = 0;
  int incorrect = 0;
  int failed = 0;
  // 100 * correct / (correct + incorrect); 0 when nothing was scored.
  double pia() const;
};

struct EvalReport {
  FusionConfig fusion;
  std::vector<Trial> trials;

  // Restricts to trials whose true speaker is in `speakers` when given.
  StreamTally Tally(Stream stream, const std::set<std::string>* speakers = nullptr) const;
};

EvalReport Evaluate(const SpeakerDatabase& db, const CorpusManifest& manifest,
                    const FusionConfig& cfg);
// Re-decides every trial under a new fusion weight without rescoring.
EvalReport Refuse(const EvalReport& report, const FusionConfig& cfg);

nlohmann::json ReportToJson(const EvalReport& report);
std::string FormatReportTable(const EvalReport& report);

}  // namespace vsid
