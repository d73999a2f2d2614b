#include "vsid/pipeline.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>

#include "vsid/binary_io.hpp"
#include "vsid/error.hpp"

namespace vsid {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kDatabaseMagic[9] = "VSID-SDB";

const char* ScaleName(FilterScale s) { return s == FilterScale::kMel ? "mel" : "hertz"; }

FilterScale ParseScale(const std::string& s) {
  if (s == "mel") return FilterScale::kMel;
  if (s == "hertz" || s == "hz") return FilterScale::kHertz;
  throw Error(ErrorCode::kInvalidArgument, "unknown filterbank scale '" + s + "'");
}

template <typename T>
void Override(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

std::string Winner(const std::vector<SpeakerScore>& scores, auto&& value) {
  // Scores arrive in id order; strict comparison keeps the smallest id on ties.
  const SpeakerScore* best = nullptr;
  for (const auto& s : scores) {
    if (!best || value(s) > value(*best)) best = &s;
    else if (value(s) == value(*best) && s.id < best->id) best = &s;
  }
  return best ? best->id : std::string();
}

}  // namespace

void FusionConfig::Validate() const {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "fusion weight must be in [0, 1]");
}

void PipelineConfig::Validate() const {
  frame.Validate();
  acrlag.Validate();
  if (acrlag.lag >= frame.frame_len_samples)
    throw Error(ErrorCode::kInvalidArgument, "lag must be shorter than a frame");
  if (acrlag.lp_order >= frame.frame_len_samples || spectral.lp_order >= frame.frame_len_samples)
    throw Error(ErrorCode::kInvalidArgument, "LP order must be shorter than a frame");
  if (spectral.kind == FeatureKind::kAcrlag)
    throw Error(ErrorCode::kInvalidArgument, "spectral stream cannot be ACRLAG");
  train.Validate();
  fusion.Validate();
}

json ConfigToJson(const PipelineConfig& c) {
  json j;
  j["frame"] = {{"frame_len_samples", c.frame.frame_len_samples},
                {"hop_samples", c.frame.hop_samples},
                {"preemphasis", c.frame.preemphasis},
                {"energy_threshold_ratio", c.frame.energy_threshold_ratio}};
  j["acrlag"] = {{"lp_order", c.acrlag.lp_order}, {"lag", c.acrlag.lag}};
  const auto& fb = c.spectral.filterbank;
  j["spectral"] = {{"kind", std::string(FeatureKindName(c.spectral.kind))},
                   {"lp_order", c.spectral.lp_order},
                   {"filterbank",
                    {{"n_filters", fb.n_filters},
                     {"scale", ScaleName(fb.scale)},
                     {"f_low_hz", fb.f_low_hz},
                     {"f_high_hz", fb.f_high_hz},
                     {"n_cep", fb.n_cep},
                     {"fft_size", fb.fft_size}}},
                   {"plp",
                    {{"model_order", c.spectral.plp.model_order},
                     {"n_cep", c.spectral.plp.n_cep},
                     {"fft_size", c.spectral.plp.fft_size},
                     {"n_bands", c.spectral.plp.n_bands}}}};
  j["train"] = {{"n_components", c.train.n_components},
                {"em_iterations", c.train.em_iterations},
                {"variance_floor_ratio", c.train.variance_floor_ratio},
                {"seed", c.train.seed}};
  j["fusion"] = {{"eta", c.fusion.eta}};
  j["per_frame_average"] = c.per_frame_average;
  return j;
}

PipelineConfig ConfigFromJson(const json& j, PipelineConfig c) {
  try {
    if (j.contains("frame")) {
      const auto& f = j.at("frame");
      Override(f, "frame_len_samples", c.frame.frame_len_samples);
      Override(f, "hop_samples", c.frame.hop_samples);
      Override(f, "preemphasis", c.frame.preemphasis);
      Override(f, "energy_threshold_ratio", c.frame.energy_threshold_ratio);
    }
    if (j.contains("acrlag")) {
      Override(j.at("acrlag"), "lp_order", c.acrlag.lp_order);
      Override(j.at("acrlag"), "lag", c.acrlag.lag);
    }
    if (j.contains("spectral")) {
      const auto& s = j.at("spectral");
      if (s.contains("kind")) c.spectral.kind = ParseFeatureKind(s.at("kind").get<std::string>());
      Override(s, "lp_order", c.spectral.lp_order);
      if (s.contains("filterbank")) {
        const auto& fb = s.at("filterbank");
        auto& out = c.spectral.filterbank;
        Override(fb, "n_filters", out.n_filters);
        if (fb.contains("scale")) out.scale = ParseScale(fb.at("scale").get<std::string>());
        Override(fb, "f_low_hz", out.f_low_hz);
        Override(fb, "f_high_hz", out.f_high_hz);
        Override(fb, "n_cep", out.n_cep);
        Override(fb, "fft_size", out.fft_size);
      }
      if (s.contains("plp")) {
        const auto& p = s.at("plp");
        Override(p, "model_order", c.spectral.plp.model_order);
        Override(p, "n_cep", c.spectral.plp.n_cep);
        Override(p, "fft_size", c.spectral.plp.fft_size);
        Override(p, "n_bands", c.spectral.plp.n_bands);
      }
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      Override(t, "n_components", c.train.n_components);
      Override(t, "em_iterations", c.train.em_iterations);
      Override(t, "variance_floor_ratio", c.train.variance_floor_ratio);
      Override(t, "seed", c.train.seed);
    }
    if (j.contains("fusion")) Override(j.at("fusion"), "eta", c.fusion.eta);
    Override(j, "per_frame_average", c.per_frame_average);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("bad config: ") + e.what());
  }
  c.Validate();
  return c;
}

StreamFeatures ExtractStreams(const AudioSignal& audio, const PipelineConfig& cfg) {
  const FrameSequence frames = PrepareFrames(audio, cfg.frame);
  return {ExtractSpectral(frames, cfg.spectral), ExtractAcrlag(frames, cfg.acrlag)};
}

void CorpusManifest::Validate(bool check_files) const {
  std::set<std::string> ids;
  for (const auto& s : speakers) {
    if (s.id.empty()) throw Error(ErrorCode::kFormatError, "speaker with empty id");
    if (!ids.insert(s.id).second)
      throw Error(ErrorCode::kFormatError, "duplicate speaker id '" + s.id + "'");
    const std::set<std::string> train(s.train.begin(), s.train.end());
    for (const auto& t : s.test)
      if (train.count(t))
        throw Error(ErrorCode::kFormatError,
                    "speaker '" + s.id + "' lists " + t + " for both train and test");
    if (check_files) {
      for (const auto* list : {&s.train, &s.test})
        for (const auto& p : *list)
          if (!fs::exists(p))
            throw Error(ErrorCode::kIoError, "manifest entry " + p + " does not exist");
    }
  }
}

CorpusManifest ManifestFromJson(const json& j, const std::string& base_dir) {
  CorpusManifest m;
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return (path.is_absolute() || base_dir.empty()) ? p : (fs::path(base_dir) / path).string();
  };
  try {
    for (const auto& s : j.at("speakers")) {
      SpeakerEntry e;
      e.id = s.at("id").get<std::string>();
      for (const auto& p : s.value("train", json::array())) e.train.push_back(resolve(p));
      for (const auto& p : s.value("test", json::array())) e.test.push_back(resolve(p));
      m.speakers.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("bad manifest: ") + e.what());
  }
  m.Validate(false);
  return m;
}

json ManifestToJson(const CorpusManifest& m) {
  json speakers = json::array();
  for (const auto& s : m.speakers)
    speakers.push_back({{"id", s.id}, {"train", s.train}, {"test", s.test}});
  return {{"speakers", speakers}};
}

CorpusManifest LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open manifest " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, path + ": " + e.what());
  }
  CorpusManifest m = ManifestFromJson(j, fs::path(path).parent_path().string());
  m.Validate(true);
  return m;
}

void SaveManifest(const std::string& path, const CorpusManifest& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << ManifestToJson(m).dump(2) << '\n';
}

SpeakerDatabase TrainDatabase(const CorpusManifest& manifest, const PipelineConfig& cfg) {
  cfg.Validate();
  manifest.Validate(false);
  SpeakerDatabase db;
  db.config = cfg;
  for (const auto& s : manifest.speakers) {
    if (s.train.empty())
      throw Error(ErrorCode::kInsufficientData, "speaker '" + s.id + "' has no training audio");
    FeatureMatrix spectral(cfg.spectral.kind, cfg.spectral.dim());
    FeatureMatrix residual(FeatureKind::kAcrlag, cfg.acrlag.dim());
    for (const auto& path : s.train) {
      try {
        const StreamFeatures f = ExtractStreams(ReadWav(path), cfg);
        spectral.Append(f.spectral);
        residual.Append(f.residual);
      } catch (const Error& e) {
        throw Error(e.code(), "speaker '" + s.id + "', " + path + ": " + e.what());
      }
    }
    auto fit = [&](const FeatureMatrix& feats, const char* stream) {
      try {
        return TrainGmm(feats, cfg.train);
      } catch (const Error& e) {
        throw Error(e.code(), "speaker '" + s.id + "', " + stream + " stream: " + e.what());
      }
    };
    db.speakers[s.id] = {fit(spectral, "spectral"), fit(residual, "residual")};
  }
  return db;
}

std::vector<unsigned char> SerializeDatabase(const SpeakerDatabase& db) {
  std::ostringstream out(std::ios::binary);
  out.write(kDatabaseMagic, 8);
  io::Put<std::uint32_t>(out, kDatabaseFormatVersion);
  io::PutString(out, ConfigToJson(db.config).dump());
  io::Put<std::uint32_t>(out, static_cast<std::uint32_t>(db.speakers.size()));
  for (const auto& [id, models] : db.speakers) {
    io::PutString(out, id);
    WriteGmm(out, models.spectral);
    WriteGmm(out, models.residual);
  }
  const std::string s = out.str();
  return {s.begin(), s.end()};
}

SpeakerDatabase DeserializeDatabase(const std::vector<unsigned char>& bytes) {
  std::istringstream in(std::string(bytes.begin(), bytes.end()), std::ios::binary);
  io::ExpectMagic(in, kDatabaseMagic, "speaker database");
  const auto version = io::Get<std::uint32_t>(in, "version");
  if (version != kDatabaseFormatVersion)
    throw Error(ErrorCode::kFormatError,
                "unsupported database version " + std::to_string(version) + " (expected " +
                    std::to_string(kDatabaseFormatVersion) + ")");
  SpeakerDatabase db;
  try {
    db.config = ConfigFromJson(json::parse(io::GetString(in, "config")));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormatError, std::string("database config: ") + e.what());
  }
  const auto n = io::Get<std::uint32_t>(in, "speaker count");
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string id = io::GetString(in, "speaker id", 4096);
    SpeakerModels models{ReadGmm(in), ReadGmm(in)};
    if (models.residual.kind != FeatureKind::kAcrlag ||
        models.spectral.kind != db.config.spectral.kind)
      throw Error(ErrorCode::kFormatError, "speaker '" + id + "' has mismatched stream kinds");
    db.speakers.emplace(std::move(id), std::move(models));
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw Error(ErrorCode::kFormatError, "trailing bytes after database");
  return db;
}

void SaveDatabase(const std::string& path, const SpeakerDatabase& db) {
  const auto bytes = SerializeDatabase(db);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path);
}

SpeakerDatabase LoadDatabase(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  try {
    return DeserializeDatabase(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

json DatabaseToJson(const SpeakerDatabase& db) {
  json speakers = json::object();
  for (const auto& [id, m] : db.speakers)
    speakers[id] = {{"spectral", GmmToJson(m.spectral)}, {"residual", GmmToJson(m.residual)}};
  return {{"config", ConfigToJson(db.config)}, {"speakers", speakers}};
}

std::vector<SpeakerScore> ScoreUtterance(const SpeakerDatabase& db, const AudioSignal& audio) {
  if (db.speakers.empty()) throw Error(ErrorCode::kInvalidArgument, "empty speaker database");
  const StreamFeatures f = ExtractStreams(audio, db.config);
  const double spectral_norm =
      db.config.per_frame_average ? 1.0 / static_cast<double>(f.spectral.rows()) : 1.0;
  const double residual_norm =
      db.config.per_frame_average ? 1.0 / static_cast<double>(f.residual.rows()) : 1.0;
  std::vector<SpeakerScore> out;
  out.reserve(db.speakers.size());
  for (const auto& [id, m] : db.speakers)
    out.push_back({id, spectral_norm * UtteranceScore(m.spectral, f.spectral),
                   residual_norm * UtteranceScore(m.residual, f.residual)});
  return out;
}

Identification Decide(const std::vector<SpeakerScore>& scores, const FusionConfig& cfg) {
  cfg.Validate();
  if (scores.empty()) throw Error(ErrorCode::kInvalidArgument, "no speaker scores");
  return {Winner(scores, [](const SpeakerScore& s) { return s.spectral; }),
          Winner(scores, [](const SpeakerScore& s) { return s.residual; }),
          Winner(scores, [&](const SpeakerScore& s) {
            return FuseScores(s.spectral, s.residual, cfg);
          })};
}

Identification Identify(const SpeakerDatabase& db, const AudioSignal& audio,
                        const FusionConfig& cfg) {
  return Decide(ScoreUtterance(db, audio), cfg);
}

double StreamTally::pia() const {
  const int scored = correct + incorrect;
  return scored == 0 ? 0.0 : 100.0 * correct / scored;
}

StreamTally EvalReport::Tally(Stream stream, const std::set<std::string>* speakers) const {
  StreamTally t;
  for (const auto& trial : trials) {
    if (speakers && !speakers->count(trial.true_speaker)) continue;
    if (!trial.decision) {
      ++t.failed;
      continue;
    }
    const std::string& got = stream == Stream::kSpectral   ? trial.decision->spectral
                             : stream == Stream::kResidual ? trial.decision->residual
                                                           : trial.decision->fused;
    (got == trial.true_speaker ? t.correct : t.incorrect)++;
  }
  return t;
}

EvalReport Evaluate(const SpeakerDatabase& db, const CorpusManifest& manifest,
                    const FusionConfig& cfg) {
  cfg.Validate();
  EvalReport report;
  report.fusion = cfg;
  for (const auto& s : manifest.speakers) {
    for (const auto& path : s.test) {
      Trial trial;
      trial.path = path;
      trial.true_speaker = s.id;
      try {
        trial.scores = ScoreUtterance(db, ReadWav(path));
        trial.decision = Decide(trial.scores, cfg);
      } catch (const Error& e) {
        trial.error = e.what();
      }
      report.trials.push_back(std::move(trial));
    }
  }
  return report;
}

EvalReport Refuse(const EvalReport& report, const FusionConfig& cfg) {
  cfg.Validate();
  EvalReport out = report;
  out.fusion = cfg;
  for (auto& t : out.trials)
    if (t.decision) t.decision = Decide(t.scores, cfg);
  return out;
}

json ReportToJson(const EvalReport& report) {
  auto tally = [&](Stream s) {
    const StreamTally t = report.Tally(s);
    return json{{"correct", t.correct}, {"incorrect", t.incorrect},
                {"failed", t.failed}, {"pia", t.pia()}};
  };
  json trials = json::array();
  for (const auto& t : report.trials) {
    json jt{{"path", t.path}, {"true_speaker", t.true_speaker}};
    if (t.decision) {
      json scores = json::array();
      for (const auto& s : t.scores)
        scores.push_back({{"id", s.id},
                          {"spectral", s.spectral},
                          {"residual", s.residual},
                          {"fused", FuseScores(s.spectral, s.residual, report.fusion)}});
      jt["scores"] = scores;
      jt["identified"] = {{"spectral", t.decision->spectral},
                          {"residual", t.decision->residual},
                          {"fused", t.decision->fused}};
    } else {
      jt["error"] = t.error;
    }
    trials.push_back(std::move(jt));
  }
  return {{"eta", report.fusion.eta},
          {"total", report.trials.size()},
          {"pia",
           {{"spectral", tally(Stream::kSpectral)},
            {"residual", tally(Stream::kResidual)},
            {"fused", tally(Stream::kFused)}}},
          {"trials", trials}};
}

std::string FormatReportTable(const EvalReport& report) {
  std::ostringstream os;
  os << "stream     correct  incorrect  failed      PIA\n";
  const std::pair<const char*, Stream> rows[] = {{"spectral", Stream::kSpectral},
                                                 {"residual", Stream::kResidual},
                                                 {"fused", Stream::kFused}};
  for (const auto& [name, stream] : rows) {
    const StreamTally t = report.Tally(stream);
    os << std::left << std::setw(10) << name << std::right << std::setw(8) << t.correct
       << std::setw(11) << t.incorrect << std::setw(8) << t.failed << std::setw(9)
       << std::fixed << std::setprecision(2) << t.pia() << '\n';
  }
  os << "fusion eta = " << std::setprecision(3) << report.fusion.eta << ", "
     << report.trials.size() << " test utterances\n";
  return os.str();
}

}  // namespace vsid
