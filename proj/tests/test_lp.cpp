#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "vsid/error.hpp"
#include "vsid/lp.hpp"
#include "vsid/signal_prep.hpp"

using namespace vsid;

namespace {

ErrorCode CodeOf(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("autocorrelation") {
  const std::vector<double> x{1.0, 2.0, 3.0};
  const auto r = Autocorr(x, 2);
  CHECK(r == std::vector<double>{14.0, 8.0, 3.0});
  CHECK(Autocorr(std::vector<double>{1.0, 0.0, 0.0, 0.0}, 3) == std::vector<double>{1.0, 0.0, 0.0, 0.0});
  CHECK(Autocorr(std::vector<double>{1.0, 1.0, 1.0}, 2) == std::vector<double>{3.0, 2.0, 1.0});

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> f(160);
    for (auto& v : f) v = n(rng);
    const auto fast = Autocorr(f, 20);
    const auto brute = oracle::BruteAutocorr(f, 20);
    for (int m = 0; m <= 20; ++m) CHECK(std::abs(fast[m] - brute[m]) < 1e-12 * (1.0 + std::abs(brute[0])));
    for (int m = 1; m <= 20; ++m) CHECK(std::abs(fast[m]) <= fast[0] + 1e-12);
  }
  CHECK(CodeOf([&] { Autocorr(x, 3); }) == ErrorCode::kLagTooLarge);
}

TEST_CASE("Levinson-Durbin") {
  SUBCASE("white input") {
    const std::vector<double> r{1.0, 0.0, 0.0};
    const auto res = LevinsonDurbin(r);
    CHECK(res.coeffs == std::vector<double>{0.0, 0.0});
    CHECK(res.error_power == doctest::Approx(1.0));
  }
  SUBCASE("first order") {
    const std::vector<double> r{1.0, 0.5};
    const auto res = LevinsonDurbin(r);
    CHECK(res.coeffs[0] == doctest::Approx(0.5));
    CHECK(res.reflection[0] == doctest::Approx(0.5));
    CHECK(res.error_power == doctest::Approx(0.75));
  }
  SUBCASE("matches a dense solve at order 13") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      const auto truth = oracle::RandomStableCoeffs(13, rng);
      auto frame = oracle::ArFrame(truth, 160, rng);
      const auto w = HammingWindow(160);
      for (int i = 0; i < 160; ++i) frame[i] *= w[i];
      const auto r = Autocorr(frame, 13);
      const auto lev = LevinsonDurbin(r);
      const auto dense = oracle::DenseNormalSolve(r);
      for (int k = 0; k < 13; ++k) CHECK(std::abs(lev.coeffs[k] - dense[k]) < 1e-8);
      for (double k : lev.reflection) CHECK(std::abs(k) < 1.0);
      CHECK(lev.error_power > 0.0);
      CHECK(lev.error_power <= r[0]);
    }
  }
  CHECK(CodeOf([] { LevinsonDurbin(std::vector<double>{0.0, 0.0}); }) == ErrorCode::kDegenerateFrame);
}

TEST_CASE("residual and synthesis") {
  SUBCASE("zero predictor passes the frame through") {
    const std::vector<double> s{0.3, -0.2, 0.9, 0.1};
    CHECK(Residual(s, std::vector<double>(3, 0.0)) == s);
  }
  SUBCASE("first-order predictor on a pulse") {
    const std::vector<double> s{1.0, 0.5, 0.25, 0.125};
    const std::vector<double> a{0.5};
    const auto e = Residual(s, a);
    CHECK(e[0] == doctest::Approx(1.0));
    for (int i = 1; i < 4; ++i) CHECK(e[i] == doctest::Approx(0.0));
  }
  SUBCASE("pulse train through a known all-pole filter") {
    std::mt19937_64 rng(23);
    const auto a = oracle::RandomStableCoeffs(10, rng);
    std::vector<double> pulses(400, 0.0);
    for (int t = 0; t < 400; t += 57) pulses[t] = 1.0;
    const auto s = Synthesize(pulses, a);
    const auto e = Residual(s, a);
    for (int t = 0; t < 400; ++t) CHECK(std::abs(e[t] - pulses[t]) < 1e-10);
  }
  SUBCASE("synthesis inverts inverse filtering") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
      const auto a = oracle::RandomStableCoeffs(12, rng);
      std::vector<double> s(160);
      for (auto& v : s) v = n(rng);
      const auto back = Synthesize(Residual(s, a), a);
      for (int t = 0; t < 160; ++t) CHECK(std::abs(back[t] - s[t]) < 1e-9);
    }
  }
  SUBCASE("residual is whiter than the signal") {
    std::mt19937_64 rng(31);
    int whiter = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
      const auto truth = oracle::RandomStableCoeffs(8, rng, 0.8);
      const auto frame = oracle::ArFrame(truth, 400, rng);
      const auto lp = AnalyzeFrame(frame, 8);
      auto flatness = [](const std::vector<double>& x) {
        const auto r = Autocorr(x, 8);
        double off = 0.0;
        for (int m = 1; m <= 8; ++m) off += r[m] * r[m];
        return off / (r[0] * r[0]);
      };
      if (flatness(lp.residual) < flatness(frame)) ++whiter;
    }
    CHECK(whiter >= 95);
  }
}

TEST_CASE("frame analysis") {
  const std::vector<double> zero(160, 0.0);
  CHECK(CodeOf([&] { AnalyzeFrame(zero, 13); }) == ErrorCode::kDegenerateFrame);
  std::mt19937_64 rng(37);
  const auto a = oracle::RandomStableCoeffs(13, rng);
  const auto frame = oracle::ArFrame(a, 160, rng);
  const auto lp = AnalyzeFrame(frame, 13);
  CHECK(lp.order == 13);
  CHECK(lp.coeffs.size() == 13);
  CHECK(lp.residual.size() == 160);
  CHECK(lp.gain > 0.0);
  CHECK(CodeOf([&] { AnalyzeFrame(std::vector<double>(10, 1.0), 13); }) == ErrorCode::kInvalidArgument);
}

TEST_CASE("LP cepstrum") {
  SUBCASE("single coefficient") {
    const std::vector<double> a{0.5};
    const auto c = Lpcc(a, 4);
    for (int m = 1; m <= 4; ++m) CHECK(c[m - 1] == doctest::Approx(std::pow(0.5, m) / m));
  }
  SUBCASE("zero predictor") {
    const auto c = Lpcc(std::vector<double>(5, 0.0), 12);
    for (double v : c) CHECK(v == 0.0);
  }
  SUBCASE("agrees with the log power series") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
      const auto a = oracle::RandomStableCoeffs(10, rng, 0.7);
      for (int n_cep : {6, 10, 16}) {
        const auto c = Lpcc(a, n_cep);
        const auto ref = oracle::SeriesCepstrum(a, n_cep);
        REQUIRE(c.size() == static_cast<std::size_t>(n_cep));
        for (int m = 0; m < n_cep; ++m) CHECK(std::abs(c[m] - ref[m]) < 1e-10);
      }
    }
  }
}

TEST_CASE("reflection coefficients and LSF") {
  SUBCASE("step-down recovers the Levinson reflections") {
    std::mt19937_64 rng(43);
    const auto frame = oracle::ArFrame(oracle::RandomStableCoeffs(10, rng), 300, rng);
    const auto lev = LevinsonDurbin(Autocorr(frame, 10));
    const auto k = ReflectionFromCoeffs(lev.coeffs);
    for (int i = 0; i < 10; ++i) CHECK(k[i] == doctest::Approx(lev.reflection[i]).epsilon(1e-9));
  }
  SUBCASE("zero predictor gives uniform frequencies") {
    const auto w = Lsf(std::vector<double>{0.0, 0.0});
    REQUIRE(w.size() == 2);
    CHECK(w[0] == doctest::Approx(std::numbers::pi / 3));
    CHECK(w[1] == doctest::Approx(2 * std::numbers::pi / 3));
  }
  SUBCASE("round trip and interlacing") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 50; ++trial) {
      const int p = 2 + trial % 15;
      const auto a = oracle::RandomStableCoeffs(p, rng);
      const auto w = Lsf(a);
      REQUIRE(w.size() == static_cast<std::size_t>(p));
      CHECK(w.front() > 0.0);
      CHECK(w.back() < std::numbers::pi);
      for (int i = 1; i < p; ++i) CHECK(w[i] > w[i - 1]);
      const auto back = LsfToCoeffs(w);
      for (int i = 0; i < p; ++i) CHECK(std::abs(back[i] - a[i]) < 1e-6);
    }
  }
  SUBCASE("unstable predictor rejected") {
    const std::vector<double> a{2.5, -1.0};
    CHECK(CodeOf([&] { ReflectionFromCoeffs(a); }) == ErrorCode::kUnstableFilter);
    CHECK(CodeOf([&] { Lsf(a); }) == ErrorCode::kUnstableFilter);
  }
}

TEST_CASE("log area ratios") {
  const auto g = Lar(std::vector<double>{0.0, 0.5, -0.5});
  CHECK(g[0] == doctest::Approx(0.0));
  CHECK(g[1] == doctest::Approx(std::log(3.0)));
  CHECK(g[2] == doctest::Approx(-std::log(3.0)));
  CHECK_THROWS_AS(Lar(std::vector<double>{1.0}), Error);
}
