#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsid/features.hpp"

namespace vsid {

// Diagonal-covariance Gaussian mixture for one speaker and one feature stream.
struct GmmModel {
  FeatureKind kind = FeatureKind::kMfcc;
  std::size_t dim = 0;
  std::vector<double> weights;    // M
  std::vector<double> means;      // M x dim, row-major
  std::vector<double> variances;  // M x dim, row-major

  std::size_t n_components() const { return weights.size(); }
  std::span<const double> mean(std::size_t i) const { return {means.data() + i * dim, dim}; }
  std::span<const double> variance(std::size_t i) const {
    return {variances.data() + i * dim, dim};
  }

  // Simplex weights, positive variances, consistent shapes.
  void Validate() const;

  friend bool operator==(const GmmModel&, const GmmModel&) = default;
};

struct TrainConfig {
  int n_components = 16;
  int em_iterations = 10;
  double variance_floor_ratio = 1e-3;
  std::uint64_t seed = 0;

  void Validate() const;
};

inline constexpr double kLbgSplitEpsilon = 0.01;
inline constexpr int kMaxKmeansPasses = 100;
inline constexpr double kKmeansTolerance = 1e-6;

// Per-dimension variance floor: ratio x global data variance.
std::vector<double> VarianceFloor(const FeatureMatrix& features, double ratio);

// Binary-splitting vector quantization. M must be a power of two.
GmmModel LbgInit(const FeatureMatrix& features, int n_components, std::uint64_t seed,
                 double variance_floor_ratio = 1e-3);

// Precomputed per-component terms for repeated scoring.
class GmmScorer {
 public:
  explicit GmmScorer(const GmmModel& model);

  double LogDensity(std::span<const double> x) const;
  // Fills log(p_i b_i(x)) per component and returns their log-sum-exp.
  double ComponentLogs(std::span<const double> x, std::vector<double>& out) const;

 private:
  const GmmModel& model_;
  std::vector<double> log_consts_;
  std::vector<double> inv_vars_;
};

double LogDensity(const GmmModel& model, std::span<const double> x);

// Exactly cfg.em_iterations EM passes. If trace is given it receives the
// total log-likelihood before the first pass and after each pass.
GmmModel EmFit(const FeatureMatrix& features, const GmmModel& init,
               const TrainConfig& cfg, std::vector<double>* trace = nullptr);

// LbgInit followed by EmFit.
GmmModel TrainGmm(const FeatureMatrix& features, const TrainConfig& cfg);

// Sum over frames of log p(x_t | model).
double UtteranceScore(const GmmModel& model, const FeatureMatrix& features);

// Binary layout (little-endian):
//   char[8] magic "VSID-GMM", u32 version (1), u32 kind-name length + bytes,
//   u32 M, u32 dim, f64 weights[M], f64 means[M*dim], f64 variances[M*dim]
inline constexpr std::uint32_t kGmmFormatVersion = 1;
void WriteGmm(std::ostream& out, const GmmModel& model);
GmmModel ReadGmm(std::istream& in);
void SaveGmm(const std::string& path, const GmmModel& model);
GmmModel LoadGmm(const std::string& path);

nlohmann::json GmmToJson(const GmmModel& model);

}  // namespace vsid
