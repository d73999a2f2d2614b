#include "vsid/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>

#include "vsid/error.hpp"

namespace vsid {
namespace {

// Draws are built from raw mt19937_64 output so corpora are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  int Integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(Uniform() * (hi - lo + 1));
  }
  double Gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return radius * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t Mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = a * 0x9E3779B97F4A7C15ull + b + 0x632BE59BD9B4E5B7ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// One resonance per formant region gives a stable order-10 filter.
std::vector<Resonance> RandomFormants(Rng& rng) {
  static constexpr double kBands[5][2] = {
      {250, 850}, {900, 1800}, {1900, 2600}, {2700, 3300}, {3400, 3800}};
  std::vector<Resonance> out;
  for (const auto& band : kBands)
    out.push_back({rng.Uniform(band[0], band[1]), rng.Uniform(0.88, 0.97)});
  return out;
}

std::vector<double> Voiced(const SyntheticSpeaker& spk, std::size_t n, const SynthConfig& cfg,
                           Rng& rng) {
  // Per segment: a perturbed tract and a drifted pitch period. The direct-form
  // filter state carries over segment boundaries.
  const double nyquist = cfg.sample_rate_hz / 2.0;
  std::vector<double> out(n, 0.0);
  double next_pulse = rng.Uniform(0.0, spk.pitch_period);
  std::size_t start = 0;
  while (start < n) {
    const auto len = static_cast<std::size_t>(
        rng.Uniform(cfg.segment_min_seconds, cfg.segment_max_seconds) * cfg.sample_rate_hz);
    const std::size_t stop = std::min(n, start + std::max<std::size_t>(len, 1));
    std::vector<Resonance> formants = spk.formants;
    for (auto& f : formants)
      f.freq_hz = std::clamp(f.freq_hz * (1.0 + cfg.formant_variation * rng.Gaussian()),
                             50.0, nyquist - 50.0);
    const auto a = TractFromFormants(formants, cfg.sample_rate_hz);
    const double period =
        std::max(2.0, spk.pitch_period * (1.0 + cfg.pitch_variation * rng.Gaussian()));
    for (std::size_t t = start; t < stop; ++t) {
      double acc = 0.0;
      if (static_cast<double>(t) >= next_pulse) {
        acc = 1.0 + cfg.shimmer * rng.Gaussian();
        next_pulse += std::max(2.0, period * (1.0 + cfg.jitter * rng.Gaussian()));
      }
      for (std::size_t k = 1; k <= a.size() && k <= t; ++k) acc += a[k - 1] * out[t - k];
      out[t] = acc;
    }
    start = stop;
  }
  return out;
}

}  // namespace

std::vector<double> TractFromFormants(const std::vector<Resonance>& formants,
                                      int sample_rate_hz) {
  std::vector<double> poly{1.0};
  for (const auto& f : formants) {
    const double theta = 2.0 * std::numbers::pi * f.freq_hz / sample_rate_hz;
    const double section[3] = {1.0, -2.0 * f.radius * std::cos(theta), f.radius * f.radius};
    std::vector<double> next(poly.size() + 2, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (int k = 0; k < 3; ++k) next[i + k] += poly[i] * section[k];
    poly = std::move(next);
  }
  std::vector<double> coeffs(poly.size() - 1);
  for (std::size_t k = 1; k < poly.size(); ++k) coeffs[k - 1] = -poly[k];
  return coeffs;
}

std::vector<double> SyntheticSpeaker::Tract(int sample_rate_hz) const {
  return TractFromFormants(formants, sample_rate_hz);
}

void SynthConfig::Validate() const {
  if (n_speakers < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two speakers");
  if (train_utterances < 1 || test_utterances < 0)
    throw Error(ErrorCode::kInvalidArgument, "invalid utterance counts");
  if (pitch_pair && (pair_min_period < min_period ||
                     max_period - pair_min_period < min_pair_period_gap))
    throw Error(ErrorCode::kInvalidArgument, "pair pitch range too narrow");
  if (min_period < 2 || max_period < min_period ||
      max_period - min_period + 1 < n_speakers)
    throw Error(ErrorCode::kInvalidArgument, "pitch range cannot give distinct periods");
  if (!(train_seconds > 0.0 && test_seconds > 0.0 && silence_seconds >= 0.0))
    throw Error(ErrorCode::kInvalidArgument, "durations must be positive");
  if (sample_rate_hz <= 0) throw Error(ErrorCode::kInvalidArgument, "bad sample rate");
  if (!(formant_variation >= 0.0) || !(segment_min_seconds > 0.0) ||
      segment_max_seconds < segment_min_seconds)
    throw Error(ErrorCode::kInvalidArgument, "invalid segment settings");
}

std::vector<SyntheticSpeaker> MakeSpeakers(const SynthConfig& cfg) {
  cfg.Validate();
  Rng rng(Mix(cfg.seed, 0x5EED));
  std::vector<int> periods;
  if (cfg.pitch_pair) {
    // Redraw both until the gap holds; Validate guarantees some pair exists.
    int a = 0, b = 0;
    do {
      a = rng.Integer(cfg.pair_min_period, cfg.max_period);
      b = rng.Integer(cfg.pair_min_period, cfg.max_period);
    } while (std::abs(a - b) < cfg.min_pair_period_gap);
    periods = {a, b};
  }
  while (static_cast<int>(periods.size()) < cfg.n_speakers) {
    const int p = rng.Integer(cfg.min_period, cfg.max_period);
    if (std::find(periods.begin(), periods.end(), p) == periods.end()) periods.push_back(p);
  }
  std::vector<SyntheticSpeaker> speakers;
  for (int i = 0; i < cfg.n_speakers; ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "spk%02d", i);
    SyntheticSpeaker s{id, RandomFormants(rng), periods[i]};
    if (cfg.pitch_pair && i == 1) s.formants = speakers[0].formants;
    speakers.push_back(std::move(s));
  }
  return speakers;
}

AudioSignal SynthesizeUtterance(const SyntheticSpeaker& speaker, double voiced_seconds,
                                const SynthConfig& cfg, std::uint64_t stream_seed) {
  Rng rng(stream_seed);
  const auto rate = static_cast<double>(cfg.sample_rate_hz);
  const auto half = static_cast<std::size_t>(voiced_seconds * rate / 2.0);
  const auto pad = static_cast<std::size_t>(cfg.silence_seconds * rate);
  const auto gap = pad / 2;

  const auto first = Voiced(speaker, half, cfg, rng);
  const auto second = Voiced(speaker, half, cfg, rng);
  double power = 0.0;
  for (double v : first) power += v * v;
  for (double v : second) power += v * v;
  power /= static_cast<double>(2 * half);
  const double noise_std = std::sqrt(power / std::pow(10.0, cfg.snr_db / 10.0));

  std::vector<double> s;
  s.reserve(2 * pad + gap + 2 * half);
  s.insert(s.end(), pad, 0.0);
  s.insert(s.end(), first.begin(), first.end());
  s.insert(s.end(), gap, 0.0);
  s.insert(s.end(), second.begin(), second.end());
  s.insert(s.end(), pad, 0.0);
  double peak = 0.0;
  for (double& v : s) {
    v += noise_std * rng.Gaussian();
    peak = std::max(peak, std::abs(v));
  }
  const double gain = peak > 0.0 ? 0.5 / peak : 1.0;
  for (double& v : s) v *= gain;
  return {std::move(s), cfg.sample_rate_hz};
}

CorpusManifest SynthCorpus(const std::string& out_dir, const SynthConfig& cfg) {
  namespace fs = std::filesystem;
  const auto speakers = MakeSpeakers(cfg);
  fs::create_directories(out_dir);
  CorpusManifest manifest;
  for (std::size_t i = 0; i < speakers.size(); ++i) {
    const auto& spk = speakers[i];
    fs::create_directories(fs::path(out_dir) / spk.id);
    SpeakerEntry entry{spk.id, {}, {}};
    auto emit = [&](const char* split, int n, double seconds, std::uint64_t tag,
                    std::vector<std::string>& list) {
      for (int u = 0; u < n; ++u) {
        char name[32];
        std::snprintf(name, sizeof(name), "%s_%02d.wav", split, u);
        const std::string rel = (fs::path(spk.id) / name).string();
        const auto seed = Mix(Mix(cfg.seed, i), tag * 1000 + static_cast<std::uint64_t>(u));
        WriteWav((fs::path(out_dir) / rel).string(),
                 SynthesizeUtterance(spk, seconds, cfg, seed));
        list.push_back(rel);
      }
    };
    emit("train", cfg.train_utterances, cfg.train_seconds, 1, entry.train);
    emit("test", cfg.test_utterances, cfg.test_seconds, 2, entry.test);
    manifest.speakers.push_back(std::move(entry));
  }
  SaveManifest((fs::path(out_dir) / "manifest.json").string(), manifest);
  // The file on disk stores paths relative to out_dir; the returned copy is joined.
  for (auto& s : manifest.speakers) {
    for (auto& p : s.train) p = (fs::path(out_dir) / p).string();
    for (auto& p : s.test) p = (fs::path(out_dir) / p).string();
  }
  return manifest;
}

}  // namespace vsid
