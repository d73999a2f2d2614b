#include "vsid/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "vsid/binary_io.hpp"
#include "vsid/error.hpp"

namespace vsid {
namespace {

constexpr char kGmmMagic[9] = "VSID-GMM";
constexpr double kAbsoluteVarianceFloor = 1e-10;
constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

struct Moments {
  std::vector<double> mean;
  std::vector<double> variance;
};

Moments GlobalMoments(const FeatureMatrix& f) {
  const std::size_t d = f.dim();
  Moments m{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  const auto t = static_cast<double>(f.rows());
  for (std::size_t r = 0; r < f.rows(); ++r)
    for (std::size_t j = 0; j < d; ++j) m.mean[j] += f(r, j);
  for (double& v : m.mean) v /= t;
  for (std::size_t r = 0; r < f.rows(); ++r)
    for (std::size_t j = 0; j < d; ++j) {
      const double c = f(r, j) - m.mean[j];
      m.variance[j] += c * c;
    }
  for (double& v : m.variance) v /= t;
  return m;
}

// Nearest codeword by squared distance; ties go to the lower index.
std::size_t Nearest(std::span<const double> x, const std::vector<double>& codebook,
                    std::size_t dim) {
  const std::size_t k = codebook.size() / dim;
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double dist = SquaredDistance(x, {codebook.data() + c * dim, dim});
    if (dist < best_d) {
      best_d = dist;
      best = c;
    }
  }
  return best;
}

// Lloyd iterations in place. Empty cells are refilled by splitting the most
// populated cell. Returns the final assignment.
std::vector<std::size_t> RefineCodebook(const FeatureMatrix& f,
                                        std::vector<double>& codebook,
                                        std::span<const double> stddev,
                                        std::mt19937_64& rng) {
  const std::size_t d = f.dim();
  const std::size_t k = codebook.size() / d;
  std::vector<std::size_t> assign(f.rows());
  std::vector<double> sums(k * d);
  std::vector<std::size_t> counts(k);
  for (int pass = 0; pass < kMaxKmeansPasses; ++pass) {
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t r = 0; r < f.rows(); ++r) {
      const std::size_t c = Nearest(f.row(r), codebook, d);
      assign[r] = c;
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) sums[c * d + j] += f(r, j);
    }
    double max_shift = 0.0;
    bool repaired = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      double shift = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double v = sums[c * d + j] / static_cast<double>(counts[c]);
        shift += (v - codebook[c * d + j]) * (v - codebook[c * d + j]);
        codebook[c * d + j] = v;
      }
      max_shift = std::max(max_shift, std::sqrt(shift));
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      const auto donor = static_cast<std::size_t>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
      if (counts[donor] < 2) break;  // fewer distinct points than cells
      for (std::size_t j = 0; j < d; ++j) {
        const double sign = (rng() >> 63) ? 1.0 : -1.0;
        const double delta = sign * kLbgSplitEpsilon * stddev[j];
        codebook[c * d + j] = codebook[donor * d + j] + delta;
        codebook[donor * d + j] -= delta;
      }
      counts[donor] /= 2;
      counts[c] = counts[donor];
      repaired = true;
    }
    if (!repaired && max_shift < kKmeansTolerance) break;
  }
  for (std::size_t r = 0; r < f.rows(); ++r) assign[r] = Nearest(f.row(r), codebook, d);
  return assign;
}

}  // namespace

void GmmModel::Validate() const {
  const std::size_t m = weights.size();
  if (m == 0 || dim == 0) throw Error(ErrorCode::kFormatError, "empty mixture");
  if (means.size() != m * dim || variances.size() != m * dim)
    throw Error(ErrorCode::kDimError, "mixture parameter shapes disagree");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::kFormatError, "mixture weight outside [0, 1]");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw Error(ErrorCode::kFormatError, "mixture weights do not sum to one");
  for (double v : variances)
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::kFormatError, "non-positive variance");
  for (double mu : means)
    if (!std::isfinite(mu)) throw Error(ErrorCode::kFormatError, "non-finite mean");
}

void TrainConfig::Validate() const {
  if (!IsPowerOfTwo(n_components))
    throw Error(ErrorCode::kInvalidArgument, "mixture count must be a power of two");
  if (em_iterations < 1)
    throw Error(ErrorCode::kInvalidArgument, "need at least one EM iteration");
  if (!(variance_floor_ratio > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "variance floor ratio must be positive");
}

std::vector<double> VarianceFloor(const FeatureMatrix& features, double ratio) {
  auto floor = GlobalMoments(features).variance;
  for (double& v : floor) v = std::max(ratio * v, kAbsoluteVarianceFloor);
  return floor;
}

GmmModel LbgInit(const FeatureMatrix& features, int n_components, std::uint64_t seed,
                 double variance_floor_ratio) {
  if (!IsPowerOfTwo(n_components))
    throw Error(ErrorCode::kInvalidArgument, "mixture count must be a power of two");
  if (features.rows() < static_cast<std::size_t>(n_components))
    throw Error(ErrorCode::kInsufficientData,
                std::to_string(features.rows()) + " frames for " +
                    std::to_string(n_components) + " components");
  const std::size_t d = features.dim();
  const Moments global = GlobalMoments(features);
  std::vector<double> stddev(d);
  for (std::size_t j = 0; j < d; ++j) stddev[j] = std::sqrt(global.variance[j]);
  const auto floor = VarianceFloor(features, variance_floor_ratio);

  std::mt19937_64 rng(seed);
  std::vector<double> codebook = global.mean;
  std::vector<std::size_t> assign(features.rows(), 0);
  for (std::size_t size = 1; size < static_cast<std::size_t>(n_components); size *= 2) {
    std::vector<double> split(2 * size * d);
    for (std::size_t c = 0; c < size; ++c)
      for (std::size_t j = 0; j < d; ++j) {
        const double delta = kLbgSplitEpsilon * stddev[j];
        split[(2 * c) * d + j] = codebook[c * d + j] + delta;
        split[(2 * c + 1) * d + j] = codebook[c * d + j] - delta;
      }
    codebook = std::move(split);
    assign = RefineCodebook(features, codebook, stddev, rng);
  }

  const std::size_t m = static_cast<std::size_t>(n_components);
  GmmModel model;
  model.kind = features.kind();
  model.dim = d;
  model.weights.assign(m, 0.0);
  model.means = codebook;
  model.variances.assign(m * d, 0.0);
  std::vector<std::size_t> counts(m, 0);
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const std::size_t c = assign[r];
    ++counts[c];
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = features(r, j) - codebook[c * d + j];
      model.variances[c * d + j] += diff * diff;
    }
  }
  for (std::size_t c = 0; c < m; ++c) {
    model.weights[c] = static_cast<double>(counts[c]) / static_cast<double>(features.rows());
    for (std::size_t j = 0; j < d; ++j) {
      double& v = model.variances[c * d + j];
      v = counts[c] ? v / static_cast<double>(counts[c]) : global.variance[j];
      v = std::max(v, floor[j]);
    }
  }
  return model;
}

GmmScorer::GmmScorer(const GmmModel& model) : model_(model) {
  const std::size_t m = model.n_components(), d = model.dim;
  log_consts_.resize(m);
  inv_vars_.resize(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    double log_det = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      log_det += std::log(model.variances[i * d + j]);
      inv_vars_[i * d + j] = 1.0 / model.variances[i * d + j];
    }
    log_consts_[i] = model.weights[i] > 0.0
                         ? std::log(model.weights[i]) - 0.5 * (d * kLog2Pi + log_det)
                         : -std::numeric_limits<double>::infinity();
  }
}

double GmmScorer::ComponentLogs(std::span<const double> x, std::vector<double>& out) const {
  const std::size_t m = model_.n_components(), d = model_.dim;
  if (x.size() != d)
    throw Error(ErrorCode::kDimError, "vector of dim " + std::to_string(x.size()) +
                                          " scored against model of dim " + std::to_string(d));
  out.resize(m);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    double maha = 0.0;
    const double* mu = model_.means.data() + i * d;
    const double* iv = inv_vars_.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = x[j] - mu[j];
      maha += diff * diff * iv[j];
    }
    out[i] = log_consts_[i] - 0.5 * maha;
    best = std::max(best, out[i]);
  }
  if (!std::isfinite(best)) return best;
  double acc = 0.0;
  for (double l : out) acc += std::exp(l - best);
  return best + std::log(acc);
}

double GmmScorer::LogDensity(std::span<const double> x) const {
  std::vector<double> scratch;
  return ComponentLogs(x, scratch);
}

double LogDensity(const GmmModel& model, std::span<const double> x) {
  return GmmScorer(model).LogDensity(x);
}

GmmModel EmFit(const FeatureMatrix& features, const GmmModel& init,
               const TrainConfig& cfg, std::vector<double>* trace) {
  if (cfg.em_iterations < 1)
    throw Error(ErrorCode::kInvalidArgument, "need at least one EM iteration");
  if (features.kind() != init.kind)
    throw Error(ErrorCode::kFeatureKindMismatch, "features do not match the model kind");
  if (features.dim() != init.dim) throw Error(ErrorCode::kDimError, "dimension mismatch");
  const std::size_t m = init.n_components(), d = init.dim, t = features.rows();
  if (t < m)
    throw Error(ErrorCode::kInsufficientData,
                std::to_string(t) + " frames for " + std::to_string(m) + " components");
  const auto floor = VarianceFloor(features, cfg.variance_floor_ratio);

  GmmModel model = init;
  std::vector<double> logs, occ(m), first(m * d), second(m * d);
  if (trace) trace->clear();
  for (int iter = 0; iter <= cfg.em_iterations; ++iter) {
    const bool last = iter == cfg.em_iterations;
    if (last && !trace) break;
    const GmmScorer scorer(model);
    std::fill(occ.begin(), occ.end(), 0.0);
    std::fill(first.begin(), first.end(), 0.0);
    std::fill(second.begin(), second.end(), 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < t; ++r) {
      const auto x = features.row(r);
      const double lse = scorer.ComponentLogs(x, logs);
      if (!std::isfinite(lse))
        throw Error(ErrorCode::kNumericalFailure,
                    "non-finite likelihood at EM iteration " + std::to_string(iter + 1));
      total += lse;
      if (last) continue;
      for (std::size_t i = 0; i < m; ++i) {
        const double g = std::exp(logs[i] - lse);
        if (g == 0.0) continue;
        occ[i] += g;
        // Statistics are centred on the current means for conditioning.
        const double* mu = model.means.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) {
          const double c = x[j] - mu[j];
          first[i * d + j] += g * c;
          second[i * d + j] += g * c * c;
        }
      }
    }
    if (trace) trace->push_back(total);
    if (last) break;

    double weight_sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double n = occ[i];
      if (std::isnan(n))
        throw Error(ErrorCode::kNumericalFailure,
                    "NaN responsibilities at EM iteration " + std::to_string(iter + 1));
      model.weights[i] = n / static_cast<double>(t);
      weight_sum += model.weights[i];
      if (n < 1e-10) continue;  // starved component keeps its parameters
      for (std::size_t j = 0; j < d; ++j) {
        const double shift = first[i * d + j] / n;
        const double var = second[i * d + j] / n - shift * shift;
        model.means[i * d + j] += shift;
        model.variances[i * d + j] = std::max(var, floor[j]);
      }
    }
    for (double& w : model.weights) w /= weight_sum;
  }
  return model;
}

GmmModel TrainGmm(const FeatureMatrix& features, const TrainConfig& cfg) {
  cfg.Validate();
  const GmmModel init =
      LbgInit(features, cfg.n_components, cfg.seed, cfg.variance_floor_ratio);
  return EmFit(features, init, cfg);
}

double UtteranceScore(const GmmModel& model, const FeatureMatrix& features) {
  if (features.kind() != model.kind)
    throw Error(ErrorCode::kFeatureKindMismatch,
                std::string(FeatureKindName(features.kind())) + " features scored against " +
                    std::string(FeatureKindName(model.kind)) + " model");
  const GmmScorer scorer(model);
  std::vector<double> scratch;
  double total = 0.0;
  for (std::size_t r = 0; r < features.rows(); ++r)
    total += scorer.ComponentLogs(features.row(r), scratch);
  return total;
}

void WriteGmm(std::ostream& out, const GmmModel& model) {
  out.write(kGmmMagic, 8);
  io::Put<std::uint32_t>(out, kGmmFormatVersion);
  io::PutString(out, std::string(FeatureKindName(model.kind)));
  io::Put<std::uint32_t>(out, static_cast<std::uint32_t>(model.n_components()));
  io::Put<std::uint32_t>(out, static_cast<std::uint32_t>(model.dim));
  for (double v : model.weights) io::Put<double>(out, v);
  for (double v : model.means) io::Put<double>(out, v);
  for (double v : model.variances) io::Put<double>(out, v);
}

GmmModel ReadGmm(std::istream& in) {
  io::ExpectMagic(in, kGmmMagic, "GMM model");
  const auto version = io::Get<std::uint32_t>(in, "version");
  if (version != kGmmFormatVersion)
    throw Error(ErrorCode::kFormatError,
                "unsupported GMM format version " + std::to_string(version) +
                    " (expected " + std::to_string(kGmmFormatVersion) + ")");
  GmmModel model;
  model.kind = ParseFeatureKind(io::GetString(in, "kind", 64));
  const auto m = io::Get<std::uint32_t>(in, "component count");
  const auto d = io::Get<std::uint32_t>(in, "dimension");
  if (m == 0 || m > 4096 || d == 0 || d > 4096)
    throw Error(ErrorCode::kFormatError, "implausible mixture shape");
  model.dim = d;
  model.weights.resize(m);
  model.means.resize(static_cast<std::size_t>(m) * d);
  model.variances.resize(static_cast<std::size_t>(m) * d);
  for (double& v : model.weights) v = io::Get<double>(in, "weights");
  for (double& v : model.means) v = io::Get<double>(in, "means");
  for (double& v : model.variances) v = io::Get<double>(in, "variances");
  model.Validate();
  return model;
}

void SaveGmm(const std::string& path, const GmmModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  WriteGmm(out, model);
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path);
}

GmmModel LoadGmm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return ReadGmm(in);
}

nlohmann::json GmmToJson(const GmmModel& model) {
  nlohmann::json j;
  j["format"] = "vsid-gmm";
  j["version"] = kGmmFormatVersion;
  j["kind"] = std::string(FeatureKindName(model.kind));
  j["n_components"] = model.n_components();
  j["dim"] = model.dim;
  j["weights"] = model.weights;
  auto rows = [&](const std::vector<double>& flat) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < model.n_components(); ++i)
      arr.push_back(std::vector<double>(flat.begin() + i * model.dim,
                                        flat.begin() + (i + 1) * model.dim));
    return arr;
  };
  j["means"] = rows(model.means);
  j["variances"] = rows(model.variances);
  return j;
}

}  // namespace vsid
