#pragma once

#include <span>
#include <vector>

#include "vsid/features.hpp"
#include "vsid/signal_prep.hpp"

namespace vsid {

// Vocal-source feature: autocorrelation of the normalized LP residual over
// shifts 0..lag. lag + 1 is the feature dimension.
struct AcrlagConfig {
  int lp_order = 13;
  int lag = 12;

  void Validate() const;
  std::size_t dim() const { return static_cast<std::size_t>(lag) + 1; }
};

// (e - mean) / max|e - mean|. Throws kDegenerateResidual for constant input.
std::vector<double> NormalizeResidual(std::span<const double> e);

std::vector<double> AcrlagFeature(std::span<const double> residual,
                                  const AcrlagConfig& cfg);

// One row per frame that survives LP analysis; degenerate frames are skipped.
// Throws kNoFeatures if every frame is skipped.
FeatureMatrix ExtractAcrlag(const FrameSequence& frames, const AcrlagConfig& cfg);

}  // namespace vsid
