#include "vsid/signal_prep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vsid/error.hpp"

namespace vsid {

void FrameConfig::Validate() const {
  if (frame_len_samples <= 0 || hop_samples <= 0 ||
      hop_samples > frame_len_samples)
    throw Error(ErrorCode::kInvalidArgument,
                "frame config needs 0 < hop <= frame length");
  if (!(preemphasis >= 0.0 && preemphasis < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "pre-emphasis must be in [0, 1)");
  if (!(energy_threshold_ratio > 0.0 && energy_threshold_ratio < 1.0))
    throw Error(ErrorCode::kInvalidArgument,
                "energy threshold ratio must be in (0, 1)");
}

AudioSignal Preemphasize(const AudioSignal& signal, double alpha) {
  if (signal.samples.empty())
    throw Error(ErrorCode::kEmptyInput, "cannot pre-emphasize an empty signal");
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "pre-emphasis must be in [0, 1)");
  AudioSignal out{std::vector<double>(signal.samples.size()),
                  signal.sample_rate_hz};
  const auto& x = signal.samples;
  out.samples[0] = x[0];
  for (std::size_t n = 1; n < x.size(); ++n)
    out.samples[n] = x[n] - alpha * x[n - 1];
  return out;
}

AudioSignal RemoveSilence(const AudioSignal& signal, const FrameConfig& cfg) {
  cfg.Validate();
  if (signal.samples.empty())
    throw Error(ErrorCode::kEmptyInput, "cannot endpoint an empty signal");
  const std::size_t block = cfg.frame_len_samples;
  const std::size_t n_blocks = signal.samples.size() / block;
  if (n_blocks == 0)
    throw Error(ErrorCode::kTooShort, "signal shorter than one block");

  std::vector<double> energy(n_blocks, 0.0);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    for (std::size_t i = 0; i < block; ++i) {
      const double s = signal.samples[b * block + i];
      energy[b] += s * s;
    }
  }
  const double max_energy = *std::max_element(energy.begin(), energy.end());
  if (!(max_energy > 0.0))
    throw Error(ErrorCode::kAllSilence, "signal has zero energy");
  const double threshold = cfg.energy_threshold_ratio * max_energy;

  AudioSignal out{{}, signal.sample_rate_hz};
  for (std::size_t b = 0; b < n_blocks; ++b) {
    if (energy[b] >= threshold) {
      auto first = signal.samples.begin() + static_cast<std::ptrdiff_t>(b * block);
      out.samples.insert(out.samples.end(), first,
                         first + static_cast<std::ptrdiff_t>(block));
    }
  }
  return out;
}

std::vector<double> HammingWindow(int length) {
  std::vector<double> w(static_cast<std::size_t>(std::max(length, 0)));
  if (length == 1) {
    w[0] = 1.0;
    return w;
  }
  const double denom = static_cast<double>(length - 1);
  for (int n = 0; n < length; ++n)
    w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / denom);
  return w;
}

FrameSequence FrameAndWindow(const AudioSignal& signal, const FrameConfig& cfg) {
  cfg.Validate();
  const std::size_t len = cfg.frame_len_samples;
  const std::size_t hop = cfg.hop_samples;
  if (signal.samples.size() < len)
    throw Error(ErrorCode::kTooShort,
                "signal of " + std::to_string(signal.samples.size()) +
                    " samples is shorter than one frame");
  const auto window = HammingWindow(cfg.frame_len_samples);
  const std::size_t n_frames = (signal.samples.size() - len) / hop + 1;

  FrameSequence seq;
  seq.config = cfg;
  seq.source_rate_hz = signal.sample_rate_hz;
  seq.frames.reserve(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::vector<double> frame(len);
    for (std::size_t i = 0; i < len; ++i)
      frame[i] = signal.samples[f * hop + i] * window[i];
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

FrameSequence PrepareFrames(const AudioSignal& signal, const FrameConfig& cfg) {
  const AudioSignal voiced = RemoveSilence(signal, cfg);
  return FrameAndWindow(Preemphasize(voiced, cfg.preemphasis), cfg);
}

}  // namespace vsid
