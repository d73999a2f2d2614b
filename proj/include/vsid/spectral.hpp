#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "vsid/features.hpp"
#include "vsid/signal_prep.hpp"

namespace vsid {

enum class FilterScale { kMel, kHertz };

struct FilterbankConfig {
  int n_filters = 20;
  FilterScale scale = FilterScale::kMel;
  double f_low_hz = 0.0;
  double f_high_hz = 0.0;  // 0 selects the Nyquist frequency
  int n_cep = 19;
  int fft_size = 512;

  void Validate(int sample_rate_hz) const;
  double HighHz(int sample_rate_hz) const {
    return f_high_hz > 0.0 ? f_high_hz : sample_rate_hz / 2.0;
  }
};

double HzToMel(double hz);
double MelToHz(double mel);

struct Filterbank {
  std::vector<std::vector<double>> weights;  // n_filters x (fft_size/2 + 1)
  std::vector<double> centers_hz;

  std::size_t n_filters() const { return weights.size(); }
  std::size_t n_bins() const { return weights.empty() ? 0 : weights[0].size(); }
  std::vector<double> Apply(std::span<const double> power) const;
};

Filterbank BuildFilterbank(const FilterbankConfig& cfg, int sample_rate_hz);

// |X(k)|^2 for k = 0..fft_size/2 of a zero-padded real frame.
class PowerSpectrum {
 public:
  explicit PowerSpectrum(int fft_size);
  ~PowerSpectrum();
  PowerSpectrum(const PowerSpectrum&) = delete;
  PowerSpectrum& operator=(const PowerSpectrum&) = delete;

  int fft_size() const { return fft_size_; }
  std::vector<double> operator()(std::span<const double> frame);

 private:
  struct Impl;
  int fft_size_;
  std::unique_ptr<Impl> impl_;
};

// Orthonormal DCT-II, n x n, row k = basis function k.
std::vector<std::vector<double>> DctMatrix(int n);

inline constexpr double kLogEnergyFloor = 1e-10;

// MFCC when cfg.scale is mel, LFCC when hertz. c0 is dropped.
FeatureMatrix FbCepstra(const FrameSequence& frames, const FilterbankConfig& cfg);

struct PlpConfig {
  int model_order = 19;
  int n_cep = 19;
  int fft_size = 512;
  int n_bands = 0;  // 0: max(ceil(bark(nyquist)) + 1, model_order + 2)

  int Bands(int sample_rate_hz) const;
};

double HzToBark(double hz);
double BarkToHz(double bark);
// Equal-loudness weight for a band centred at hz (classical PLP rational form).
double EqualLoudness(double hz);
// Intensity-to-loudness power law.
inline double Loudness(double intensity) { return std::cbrt(intensity); }

// Critical-band integration -> equal loudness -> cube root; edge bands copy
// their neighbours.
std::vector<double> PlpAuditorySpectrum(std::span<const double> power,
                                        int sample_rate_hz, const PlpConfig& cfg);
// Autocorrelation of the auditory spectrum -> all-pole fit -> cepstra.
std::vector<double> PlpFromAuditory(std::span<const double> auditory,
                                    const PlpConfig& cfg);
FeatureMatrix Plpcc(const FrameSequence& frames, const PlpConfig& cfg);

// LPCC, LSF or LAR from an order-`order` LP fit per frame; degenerate frames
// are skipped.
FeatureMatrix LpFeatures(const FrameSequence& frames, FeatureKind kind, int order);

struct SpectralConfig {
  FeatureKind kind = FeatureKind::kMfcc;
  FilterbankConfig filterbank;
  PlpConfig plp;
  int lp_order = 19;

  std::size_t dim() const;
};

FeatureMatrix ExtractSpectral(const FrameSequence& frames, const SpectralConfig& cfg);

}  // namespace vsid
