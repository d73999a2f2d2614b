#include "vsid/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "vsid/error.hpp"
#include "vsid/lp.hpp"

namespace vsid {
namespace {

// FFTW planning is not thread safe.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

bool IsPowerOfTwo(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void FilterbankConfig::Validate(int sample_rate_hz) const {
  if (sample_rate_hz <= 0)
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  if (n_filters < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one filter");
  if (!IsPowerOfTwo(fft_size))
    throw Error(ErrorCode::kInvalidArgument, "FFT size must be a power of two");
  const double hi = HighHz(sample_rate_hz);
  if (!(f_low_hz >= 0.0 && f_low_hz < hi && hi <= sample_rate_hz / 2.0))
    throw Error(ErrorCode::kInvalidArgument, "need 0 <= f_low < f_high <= nyquist");
  if (n_cep < 1 || n_cep >= n_filters)
    throw Error(ErrorCode::kInvalidArgument, "need 1 <= n_cep < n_filters");
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> Filterbank::Apply(std::span<const double> power) const {
  std::vector<double> out(weights.size(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) acc += weights[i][k] * power[k];
    out[i] = acc;
  }
  return out;
}

Filterbank BuildFilterbank(const FilterbankConfig& cfg, int sample_rate_hz) {
  cfg.Validate(sample_rate_hz);
  const bool mel = cfg.scale == FilterScale::kMel;
  auto warp = [mel](double hz) { return mel ? HzToMel(hz) : hz; };
  auto unwarp = [mel](double v) { return mel ? MelToHz(v) : v; };

  const int n = cfg.n_filters;
  const double lo = warp(cfg.f_low_hz);
  const double hi = warp(cfg.HighHz(sample_rate_hz));
  std::vector<double> edges(static_cast<std::size_t>(n) + 2);
  for (int i = 0; i < n + 2; ++i) edges[i] = lo + (hi - lo) * i / (n + 1);

  const int n_bins = cfg.fft_size / 2 + 1;
  Filterbank fb;
  fb.weights.assign(n, std::vector<double>(n_bins, 0.0));
  for (int i = 1; i <= n; ++i) {
    fb.centers_hz.push_back(unwarp(edges[i]));
    int nonzero = 0;
    for (int k = 0; k < n_bins; ++k) {
      const double v = warp(static_cast<double>(k) * sample_rate_hz / cfg.fft_size);
      double w = 0.0;
      if (v > edges[i - 1] && v <= edges[i])
        w = (v - edges[i - 1]) / (edges[i] - edges[i - 1]);
      else if (v > edges[i] && v < edges[i + 1])
        w = (edges[i + 1] - v) / (edges[i + 1] - edges[i]);
      fb.weights[i - 1][k] = w;
      if (w > 0.0) ++nonzero;
    }
    if (nonzero < 2)
      throw Error(ErrorCode::kFilterbankTooDense,
                  "filter " + std::to_string(i) + " spans " +
                      std::to_string(nonzero) + " FFT bins");
  }
  return fb;
}

struct PowerSpectrum::Impl {
  double* in = nullptr;
  fftw_complex* out = nullptr;
  fftw_plan plan = nullptr;
};

PowerSpectrum::PowerSpectrum(int fft_size) : fft_size_(fft_size), impl_(new Impl) {
  if (!IsPowerOfTwo(fft_size))
    throw Error(ErrorCode::kInvalidArgument, "FFT size must be a power of two");
  std::lock_guard<std::mutex> lock(PlannerMutex());
  impl_->in = fftw_alloc_real(fft_size);
  impl_->out = fftw_alloc_complex(fft_size / 2 + 1);
  impl_->plan = fftw_plan_dft_r2c_1d(fft_size, impl_->in, impl_->out, FFTW_ESTIMATE);
}

PowerSpectrum::~PowerSpectrum() {
  std::lock_guard<std::mutex> lock(PlannerMutex());
  fftw_destroy_plan(impl_->plan);
  fftw_free(impl_->in);
  fftw_free(impl_->out);
}

std::vector<double> PowerSpectrum::operator()(std::span<const double> frame) {
  if (frame.size() > static_cast<std::size_t>(fft_size_))
    throw Error(ErrorCode::kInvalidArgument, "frame longer than FFT size");
  std::fill(impl_->in, impl_->in + fft_size_, 0.0);
  std::copy(frame.begin(), frame.end(), impl_->in);
  fftw_execute(impl_->plan);
  std::vector<double> power(static_cast<std::size_t>(fft_size_) / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k)
    power[k] = impl_->out[k][0] * impl_->out[k][0] + impl_->out[k][1] * impl_->out[k][1];
  return power;
}

std::vector<std::vector<double>> DctMatrix(int n) {
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (int k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int j = 0; j < n; ++j)
      d[k][j] = scale * std::cos(std::numbers::pi * k * (j + 0.5) / n);
  }
  return d;
}

FeatureMatrix FbCepstra(const FrameSequence& frames, const FilterbankConfig& cfg) {
  if (frames.empty()) throw Error(ErrorCode::kEmptyInput, "no frames");
  const Filterbank fb = BuildFilterbank(cfg, frames.source_rate_hz);
  const auto dct = DctMatrix(cfg.n_filters);
  PowerSpectrum spectrum(cfg.fft_size);
  const FeatureKind kind =
      cfg.scale == FilterScale::kMel ? FeatureKind::kMfcc : FeatureKind::kLfcc;
  FeatureMatrix out(kind, static_cast<std::size_t>(cfg.n_cep));
  std::vector<double> row(cfg.n_cep);
  for (const auto& frame : frames.frames) {
    auto energies = fb.Apply(spectrum(frame));
    for (double& e : energies) e = std::log(std::max(e, kLogEnergyFloor));
    for (int k = 1; k <= cfg.n_cep; ++k) {
      double acc = 0.0;
      for (int j = 0; j < cfg.n_filters; ++j) acc += dct[k][j] * energies[j];
      row[k - 1] = acc;
    }
    out.AppendRow(row);
  }
  return out;
}

int PlpConfig::Bands(int sample_rate_hz) const {
  if (n_bands > 0) return n_bands;
  const int by_bark = static_cast<int>(std::ceil(HzToBark(sample_rate_hz / 2.0))) + 1;
  return std::max(by_bark, model_order + 2);
}

double HzToBark(double hz) { return 6.0 * std::asinh(hz / 600.0); }
double BarkToHz(double bark) { return 600.0 * std::sinh(bark / 6.0); }

double EqualLoudness(double hz) {
  const double w2 = std::pow(2.0 * std::numbers::pi * hz, 2);
  return (w2 + 56.8e6) * w2 * w2 / (std::pow(w2 + 6.3e6, 2) * (w2 + 0.38e9));
}

std::vector<double> PlpAuditorySpectrum(std::span<const double> power,
                                        int sample_rate_hz, const PlpConfig& cfg) {
  const int nb = cfg.Bands(sample_rate_hz);
  if (nb < 3) throw Error(ErrorCode::kInvalidArgument, "PLP needs at least 3 bands");
  if (power.size() < 2) throw Error(ErrorCode::kInvalidArgument, "power spectrum too short");
  const int fft_size = static_cast<int>(power.size() - 1) * 2;
  const double step = HzToBark(sample_rate_hz / 2.0) / (nb - 1);

  // Critical-band masking curve, in Bark offset from the band centre.
  auto masking = [](double dz) {
    if (dz < -1.3 || dz > 2.5) return 0.0;
    if (dz < -0.5) return std::pow(10.0, 2.5 * (dz + 0.5));
    if (dz <= 0.5) return 1.0;
    return std::pow(10.0, -1.0 * (dz - 0.5));
  };

  std::vector<double> bands(nb, 0.0);
  for (int b = 0; b < nb; ++b) {
    const double zc = b * step;
    double acc = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) {
      const double z = HzToBark(static_cast<double>(k) * sample_rate_hz / fft_size);
      acc += masking(z - zc) * power[k];
    }
    bands[b] = Loudness(EqualLoudness(BarkToHz(zc)) * acc);
  }
  bands[0] = bands[1];
  bands[nb - 1] = bands[nb - 2];
  return bands;
}

std::vector<double> PlpFromAuditory(std::span<const double> auditory,
                                    const PlpConfig& cfg) {
  const int nb = static_cast<int>(auditory.size());
  if (cfg.model_order + 1 >= 2 * (nb - 1))
    throw Error(ErrorCode::kInvalidArgument, "too few bands for the PLP model order");
  // Inverse DFT of the even extension of the spectrum.
  std::vector<double> r(static_cast<std::size_t>(cfg.model_order) + 1);
  const double norm = 1.0 / (2.0 * (nb - 1));
  for (int m = 0; m <= cfg.model_order; ++m) {
    double acc = auditory[0] + ((m % 2 == 0) ? 1.0 : -1.0) * auditory[nb - 1];
    for (int k = 1; k < nb - 1; ++k)
      acc += 2.0 * auditory[k] * std::cos(std::numbers::pi * k * m / (nb - 1));
    r[m] = acc * norm;
  }
  if (!(r[0] > 0.0))
    throw Error(ErrorCode::kDegenerateFrame, "auditory spectrum has no energy");
  return Lpcc(LevinsonDurbin(r).coeffs, cfg.n_cep);
}

FeatureMatrix Plpcc(const FrameSequence& frames, const PlpConfig& cfg) {
  if (frames.empty()) throw Error(ErrorCode::kEmptyInput, "no frames");
  if (cfg.model_order < 1 || cfg.n_cep < 1)
    throw Error(ErrorCode::kInvalidArgument, "PLP order and n_cep must be positive");
  PowerSpectrum spectrum(cfg.fft_size);
  FeatureMatrix out(FeatureKind::kPlpcc, static_cast<std::size_t>(cfg.n_cep));
  for (const auto& frame : frames.frames) {
    try {
      const auto aud = PlpAuditorySpectrum(spectrum(frame), frames.source_rate_hz, cfg);
      out.AppendRow(PlpFromAuditory(aud, cfg));
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kDegenerateFrame) throw;
    }
  }
  if (out.empty()) throw Error(ErrorCode::kNoFeatures, "every frame was degenerate");
  return out;
}

FeatureMatrix LpFeatures(const FrameSequence& frames, FeatureKind kind, int order) {
  if (kind != FeatureKind::kLpcc && kind != FeatureKind::kLsf &&
      kind != FeatureKind::kLar)
    throw Error(ErrorCode::kInvalidArgument,
                std::string(FeatureKindName(kind)) + " is not an LP-derived feature");
  if (frames.empty()) throw Error(ErrorCode::kEmptyInput, "no frames");
  FeatureMatrix out(kind, static_cast<std::size_t>(order));
  for (const auto& frame : frames.frames) {
    try {
      const LpAnalysis lp = AnalyzeFrame(frame, order);
      switch (kind) {
        case FeatureKind::kLpcc: out.AppendRow(Lpcc(lp.coeffs, order)); break;
        case FeatureKind::kLsf: out.AppendRow(Lsf(lp.coeffs)); break;
        default: out.AppendRow(Lar(lp.reflection)); break;
      }
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kDegenerateFrame) throw;
    }
  }
  if (out.empty()) throw Error(ErrorCode::kNoFeatures, "every frame was degenerate");
  return out;
}

std::size_t SpectralConfig::dim() const {
  switch (kind) {
    case FeatureKind::kMfcc:
    case FeatureKind::kLfcc: return static_cast<std::size_t>(filterbank.n_cep);
    case FeatureKind::kPlpcc: return static_cast<std::size_t>(plp.n_cep);
    case FeatureKind::kLpcc:
    case FeatureKind::kLsf:
    case FeatureKind::kLar: return static_cast<std::size_t>(lp_order);
    case FeatureKind::kAcrlag: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "ACRLAG is not a spectral feature");
}

FeatureMatrix ExtractSpectral(const FrameSequence& frames, const SpectralConfig& cfg) {
  switch (cfg.kind) {
    case FeatureKind::kMfcc:
    case FeatureKind::kLfcc: {
      FilterbankConfig fb = cfg.filterbank;
      fb.scale = cfg.kind == FeatureKind::kMfcc ? FilterScale::kMel : FilterScale::kHertz;
      return FbCepstra(frames, fb);
    }
    case FeatureKind::kPlpcc: return Plpcc(frames, cfg.plp);
    case FeatureKind::kLpcc:
    case FeatureKind::kLsf:
    case FeatureKind::kLar: return LpFeatures(frames, cfg.kind, cfg.lp_order);
    case FeatureKind::kAcrlag: break;
  }
  throw Error(ErrorCode::kInvalidArgument, "ACRLAG is not a spectral feature");
}

}  // namespace vsid
