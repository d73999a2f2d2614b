#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vsid/pipeline.hpp"
#include "vsid/signal_prep.hpp"

namespace vsid {

struct Resonance {
  double freq_hz = 0.0;
  double radius = 0.0;  // pole radius, < 1
};

// Source-filter speaker: a fixed order-10 all-pole vocal tract driven by a
// jittered impulse train at a speaker-specific pitch period.
struct SyntheticSpeaker {
  std::string id;
  std::vector<Resonance> formants;  // five pole pairs
  int pitch_period = 80;            // samples

  // Predictor coefficients a(1..10) of the base tract.
  std::vector<double> Tract(int sample_rate_hz) const;
};

std::vector<double> TractFromFormants(const std::vector<Resonance>& formants,
                                      int sample_rate_hz);

struct SynthConfig {
  int n_speakers = 10;
  int train_utterances = 10;
  int test_utterances = 10;
  double train_seconds = 4.0;  // voiced length of each training utterance
  double test_seconds = 4.0;
  int sample_rate_hz = 8000;
  double snr_db = 30.0;
  double jitter = 0.05;       // relative std-dev of each pitch period
  double shimmer = 0.05;      // relative std-dev of each pulse amplitude
  double silence_seconds = 0.25;
  // Phone-like segments: every segment re-draws each formant frequency with
  // this relative std-dev around the speaker's base tract.
  double formant_variation = 0.10;
  // Intonation: relative std-dev of the per-segment pitch period.
  double pitch_variation = 0.05;
  double segment_min_seconds = 0.06;
  double segment_max_seconds = 0.16;
  int min_period = 40;
  int max_period = 120;
  // Speakers 0 and 1 share one vocal tract and differ only in pitch.
  bool pitch_pair = true;
  // The pair's periods are drawn from [pair_min_period, max_period] so their
  // harmonics stay below the resolution of a 20 ms frame.
  int pair_min_period = 80;
  int min_pair_period_gap = 30;
  std::uint64_t seed = 0;

  void Validate() const;
};

std::vector<SyntheticSpeaker> MakeSpeakers(const SynthConfig& cfg);

// One utterance: silence, voiced half, short pause, voiced half, silence.
AudioSignal SynthesizeUtterance(const SyntheticSpeaker& speaker, double voiced_seconds,
                                const SynthConfig& cfg, std::uint64_t stream_seed);

// Writes <out_dir>/<id>/{train,test}_NN.wav and <out_dir>/manifest.json.
CorpusManifest SynthCorpus(const std::string& out_dir, const SynthConfig& cfg);

}  // namespace vsid
