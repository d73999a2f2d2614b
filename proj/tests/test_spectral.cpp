#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "vsid/error.hpp"
#include "vsid/spectral.hpp"

using namespace vsid;

namespace {

std::vector<double> Noise(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

FrameSequence Frames(std::vector<std::vector<double>> f) {
  FrameSequence s;
  s.frames = std::move(f);
  s.source_rate_hz = 8000;
  return s;
}

}  // namespace

TEST_CASE("filterbank layout") {
  FilterbankConfig lin;
  lin.scale = FilterScale::kHertz;
  const auto fb = BuildFilterbank(lin, 8000);
  REQUIRE(fb.n_filters() == 20);
  CHECK(fb.n_bins() == 257);
  for (int k = 1; k <= 20; ++k) CHECK(fb.centers_hz[k - 1] == doctest::Approx(4000.0 * k / 21.0));

  CHECK(HzToMel(700.0) == doctest::Approx(781.17).epsilon(1e-4));
  CHECK(MelToHz(HzToMel(1234.5)) == doctest::Approx(1234.5));

  for (auto scale : {FilterScale::kMel, FilterScale::kHertz}) {
    FilterbankConfig cfg;
    cfg.scale = scale;
    const auto bank = BuildFilterbank(cfg, 8000);
    const double bin_hz = 8000.0 / cfg.fft_size;
    for (std::size_t b = 0; b < bank.n_bins(); ++b) {
      const double f = b * bin_hz;
      double sum = 0.0;
      for (const auto& w : bank.weights) {
        CHECK(w[b] >= 0.0);
        CHECK(w[b] <= 1.0 + 1e-12);
        sum += w[b];
      }
      if (f > bank.centers_hz.front() && f < bank.centers_hz.back()) CHECK(sum > 0.0);
    }
    for (std::size_t i = 1; i < bank.n_filters(); ++i)
      CHECK(bank.centers_hz[i] > bank.centers_hz[i - 1]);
  }

  FilterbankConfig dense;
  dense.n_filters = 200;
  dense.n_cep = 19;
  try {
    BuildFilterbank(dense, 8000);
    FAIL("expected FilterbankTooDense");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFilterbankTooDense);
  }
}

TEST_CASE("power spectrum matches the DFT definition") {
  std::mt19937_64 rng(71);
  PowerSpectrum fft(512);
  for (int trial = 0; trial < 5; ++trial) {
    const auto x = Noise(rng, 160);
    const auto fast = fft(x);
    const auto slow = oracle::DirectPowerSpectrum(x, 512);
    REQUIRE(fast.size() == 257);
    for (int k = 0; k <= 256; ++k) CHECK(std::abs(fast[k] - slow[k]) < 1e-9 * (1.0 + slow[k]));
  }
}

TEST_CASE("DCT is orthonormal") {
  const auto d = DctMatrix(20);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) {
      double dot = 0.0;
      for (int n = 0; n < 20; ++n) dot += d[i][n] * d[j][n];
      CHECK(std::abs(dot - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
  // Forward then transpose recovers the input.
  std::mt19937_64 rng(73);
  const auto x = Noise(rng, 20);
  std::vector<double> y(20, 0.0), back(20, 0.0);
  for (int k = 0; k < 20; ++k)
    for (int n = 0; n < 20; ++n) y[k] += d[k][n] * x[n];
  for (int n = 0; n < 20; ++n)
    for (int k = 0; k < 20; ++k) back[n] += d[k][n] * y[k];
  for (int n = 0; n < 20; ++n) CHECK(std::abs(back[n] - x[n]) < 1e-10);
}

TEST_CASE("filterbank cepstra") {
  FilterbankConfig cfg;
  std::mt19937_64 rng(79);
  std::vector<std::vector<double>> frames;
  for (int i = 0; i < 6; ++i) frames.push_back(Noise(rng, 160));
  const auto seq = Frames(frames);
  const auto mfcc = FbCepstra(seq, cfg);
  CHECK(mfcc.kind() == FeatureKind::kMfcc);
  CHECK(mfcc.dim() == 19);
  CHECK(mfcc.rows() == 6);

  SUBCASE("gain changes only c0") {
    auto scaled = frames;
    for (auto& f : scaled)
      for (auto& v : f) v *= 37.0;
    const auto other = FbCepstra(Frames(scaled), cfg);
    for (std::size_t i = 0; i < mfcc.values().size(); ++i)
      CHECK(std::abs(other.values()[i] - mfcc.values()[i]) < 1e-9);
  }
  SUBCASE("sinusoid at a filter centre against a dense reimplementation") {
    const auto bank = BuildFilterbank(cfg, 8000);
    const double f0 = bank.centers_hz[7];
    std::vector<double> tone(160);
    for (int n = 0; n < 160; ++n) tone[n] = std::sin(2.0 * std::numbers::pi * f0 * n / 8000.0);
    const auto got = FbCepstra(Frames({tone}), cfg);

    const auto power = oracle::DirectPowerSpectrum(tone, 512);
    std::vector<double> logs(20);
    std::size_t loudest = 0;
    for (int j = 0; j < 20; ++j) {
      double e = 0.0;
      for (int b = 0; b <= 256; ++b) e += bank.weights[j][b] * power[b];
      logs[j] = std::log(std::max(e, kLogEnergyFloor));
      if (logs[j] > logs[loudest]) loudest = j;
    }
    CHECK(loudest == 7);
    for (int k = 1; k <= 19; ++k) {
      double c = 0.0;
      for (int n = 0; n < 20; ++n)
        c += logs[n] * std::cos(std::numbers::pi * k * (n + 0.5) / 20.0);
      c *= std::sqrt(2.0 / 20.0);
      CHECK(std::abs(got(0, k - 1) - c) < 1e-10);
    }
  }
  SUBCASE("MFCC forced onto the hertz scale is LFCC") {
    FilterbankConfig lin = cfg;
    lin.scale = FilterScale::kHertz;
    const auto lfcc = FbCepstra(seq, lin);
    CHECK(lfcc.kind() == FeatureKind::kLfcc);
    SpectralConfig sc;
    sc.kind = FeatureKind::kLfcc;
    CHECK(ExtractSpectral(seq, sc).values() == lfcc.values());
    sc.kind = FeatureKind::kMfcc;
    sc.filterbank.scale = FilterScale::kHertz;
    CHECK(ExtractSpectral(seq, sc).values() == mfcc.values());
  }
  SUBCASE("every spectral kind keeps the frame count") {
    for (auto kind : {FeatureKind::kMfcc, FeatureKind::kLfcc, FeatureKind::kPlpcc,
                      FeatureKind::kLpcc, FeatureKind::kLsf, FeatureKind::kLar}) {
      SpectralConfig sc;
      sc.kind = kind;
      const auto m = ExtractSpectral(seq, sc);
      CHECK(m.kind() == kind);
      CHECK(m.rows() == 6);
      CHECK(m.dim() == 19);
      CHECK(sc.dim() == 19);
    }
  }
}

TEST_CASE("perceptual LP") {
  PlpConfig cfg;
  CHECK(cfg.Bands(8000) >= cfg.model_order + 2);
  CHECK(HzToBark(BarkToHz(7.5)) == doctest::Approx(7.5));
  CHECK(Loudness(8.0 * 0.37) == doctest::Approx(2.0 * Loudness(0.37)));
  CHECK(EqualLoudness(1000.0) > EqualLoudness(100.0));

  SUBCASE("flat auditory spectrum has a flat model") {
    const std::vector<double> flat(cfg.Bands(8000), 1.0);
    const auto c = PlpFromAuditory(flat, cfg);
    REQUIRE(c.size() == 19);
    for (double v : c) CHECK(std::abs(v) < 1e-8);
  }
  SUBCASE("white noise relative to the flat-input response") {
    std::mt19937_64 rng(83);
    PowerSpectrum fft(512);
    std::vector<double> mean(257, 0.0);
    const int frames = 400;
    for (int i = 0; i < frames; ++i) {
      const auto p = fft(Noise(rng, 160));
      for (int k = 0; k <= 256; ++k) mean[k] += p[k] / frames;
    }
    const std::vector<double> unit(257, 160.0);
    const auto noisy = PlpAuditorySpectrum(mean, 8000, cfg);
    const auto ref = PlpAuditorySpectrum(unit, 8000, cfg);
    std::vector<double> ratio(noisy.size());
    for (std::size_t i = 0; i < ratio.size(); ++i) ratio[i] = noisy[i] / ref[i];
    const auto c = PlpFromAuditory(ratio, cfg);
    for (double v : c) CHECK(std::abs(v) < 0.1);
  }
  SUBCASE("defaults give 19 coefficients") {
    std::mt19937_64 rng(89);
    const auto m = Plpcc(Frames({Noise(rng, 160), Noise(rng, 160)}), cfg);
    CHECK(m.kind() == FeatureKind::kPlpcc);
    CHECK(m.dim() == 19);
    CHECK(m.rows() == 2);
  }
}
