#include "vsid/acrlag.hpp"

#include <cmath>
#include <numeric>

#include "vsid/error.hpp"
#include "vsid/lp.hpp"

namespace vsid {

void AcrlagConfig::Validate() const {
  if (lp_order < 1) throw Error(ErrorCode::kInvalidArgument, "LP order must be >= 1");
  if (lag < 0) throw Error(ErrorCode::kInvalidArgument, "lag must be >= 0");
}

std::vector<double> NormalizeResidual(std::span<const double> e) {
  if (e.empty()) throw Error(ErrorCode::kEmptyInput, "empty residual");
  const double mean =
      std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
  std::vector<double> out(e.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    out[i] = e[i] - mean;
    peak = std::max(peak, std::abs(out[i]));
  }
  // A constant residual leaves only rounding noise after mean removal.
  double scale = 0.0;
  for (double v : e) scale = std::max(scale, std::abs(v));
  if (!(peak > 1e-12 * scale))
    throw Error(ErrorCode::kDegenerateResidual, "residual is constant");
  for (double& v : out) v /= peak;
  return out;
}

std::vector<double> AcrlagFeature(std::span<const double> residual,
                                  const AcrlagConfig& cfg) {
  cfg.Validate();
  if (residual.size() <= static_cast<std::size_t>(cfg.lag))
    throw Error(ErrorCode::kLagTooLarge, "residual shorter than lag + 1");
  return Autocorr(NormalizeResidual(residual), cfg.lag);
}

FeatureMatrix ExtractAcrlag(const FrameSequence& frames, const AcrlagConfig& cfg) {
  cfg.Validate();
  if (frames.empty()) throw Error(ErrorCode::kEmptyInput, "no frames");
  FeatureMatrix out(FeatureKind::kAcrlag, cfg.dim());
  for (const auto& frame : frames.frames) {
    try {
      const LpAnalysis lp = AnalyzeFrame(frame, cfg.lp_order);
      out.AppendRow(AcrlagFeature(lp.residual, cfg));
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kDegenerateFrame &&
          err.code() != ErrorCode::kDegenerateResidual)
        throw;
    }
  }
  if (out.empty())
    throw Error(ErrorCode::kNoFeatures, "every frame was degenerate");
  return out;
}

}  // namespace vsid
