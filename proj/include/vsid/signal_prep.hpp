#pragma once

#include <span>
#include <string>
#include <vector>

namespace vsid {

struct AudioSignal {
  std::vector<double> samples;
  int sample_rate_hz = 8000;
};

struct FrameConfig {
  int frame_len_samples = 160;  // 20 ms at 8 kHz
  int hop_samples = 80;         // 50% overlap
  double preemphasis = 0.97;
  // Blocks whose energy falls below this fraction of the loudest block are
  // treated as silence.
  double energy_threshold_ratio = 0.06;

  void Validate() const;
};

struct FrameSequence {
  std::vector<std::vector<double>> frames;
  FrameConfig config;
  int source_rate_hz = 0;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

AudioSignal Preemphasize(const AudioSignal& signal, double alpha);

// Energy-threshold endpointing over non-overlapping frame-sized blocks.
// Throws kAllSilence when nothing survives.
AudioSignal RemoveSilence(const AudioSignal& signal, const FrameConfig& cfg);

std::vector<double> HammingWindow(int length);

FrameSequence FrameAndWindow(const AudioSignal& signal, const FrameConfig& cfg);

// silence removal -> pre-emphasis -> framing -> Hamming window.
FrameSequence PrepareFrames(const AudioSignal& signal, const FrameConfig& cfg);

// 16-bit PCM mono RIFF/WAVE. Samples are scaled to [-1, 1).
AudioSignal ReadWav(const std::string& path);
AudioSignal ParseWav(std::span<const unsigned char> bytes,
                     const std::string& origin = "<memory>");
// Samples are clipped to [-1, 1] and quantized to 16 bits.
void WriteWav(const std::string& path, const AudioSignal& signal);
std::vector<unsigned char> EncodeWav(const AudioSignal& signal);

}  // namespace vsid
