#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "vsid/error.hpp"
#include "vsid/signal_prep.hpp"

using namespace vsid;

namespace {

AudioSignal Sig(std::vector<double> s) { return {std::move(s), 8000}; }

}  // namespace

TEST_CASE("preemphasis") {
  SUBCASE("alpha 0 is identity") {
    const auto x = Sig({0.3, -1.0, 2.5, 0.0});
    CHECK(Preemphasize(x, 0.0).samples == x.samples);
  }
  SUBCASE("constant signal") {
    const auto y = Preemphasize(Sig({2.0, 2.0, 2.0, 2.0}), 0.97);
    CHECK(y.samples[0] == doctest::Approx(2.0));
    for (std::size_t i = 1; i < 4; ++i) CHECK(y.samples[i] == doctest::Approx(0.06));
  }
  SUBCASE("direct evaluation") {
    const auto y = Preemphasize(Sig({1.0, 1.0, 2.0}), 0.97);
    CHECK(y.samples[0] == doctest::Approx(1.0));
    CHECK(y.samples[1] == doctest::Approx(0.03));
    CHECK(y.samples[2] == doctest::Approx(1.03));
  }
  SUBCASE("linearity") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(50), y(50), mix(50);
      const double a = n(rng), b = n(rng);
      for (int i = 0; i < 50; ++i) {
        x[i] = n(rng);
        y[i] = n(rng);
        mix[i] = a * x[i] + b * y[i];
      }
      const auto px = Preemphasize(Sig(x), 0.97), py = Preemphasize(Sig(y), 0.97),
                 pm = Preemphasize(Sig(mix), 0.97);
      for (int i = 0; i < 50; ++i)
        CHECK(pm.samples[i] == doctest::Approx(a * px.samples[i] + b * py.samples[i]));
    }
  }
  CHECK_THROWS_AS(Preemphasize(Sig({}), 0.97), Error);
  CHECK_THROWS_AS(Preemphasize(Sig({1.0}), 1.0), Error);
}

TEST_CASE("silence removal keeps blocks above the relative energy threshold") {
  FrameConfig cfg;
  cfg.frame_len_samples = 10;
  cfg.hop_samples = 5;

  SUBCASE("one loud block among zeros") {
    std::vector<double> s(50, 0.0);
    for (int i = 20; i < 30; ++i) s[i] = 1.0;
    const auto out = RemoveSilence(Sig(s), cfg);
    CHECK(out.samples == std::vector<double>(10, 1.0));
  }
  SUBCASE("equal-energy blocks are all kept, partial tail dropped") {
    std::vector<double> s(47);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = (i % 2) ? 0.5 : -0.5;
    const auto out = RemoveSilence(Sig(s), cfg);
    CHECK(out.samples.size() == 40);
  }
  SUBCASE("matches a brute-force block energy scan") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> s(400);
    std::vector<double> gains{1.0, 0.01, 0.5, 0.2, 0.05, 1.0, 0.0, 0.3, 0.26, 0.1,
                              0.8, 0.02, 0.4, 0.24, 0.25, 0.6, 0.9, 0.0, 0.15, 0.7,
                              0.35, 0.22, 0.5, 0.01, 0.9, 0.23, 0.27, 0.3, 0.2, 0.1,
                              0.05, 0.6, 0.7, 0.8, 0.04, 0.3, 0.2, 0.1, 0.5, 0.25};
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = gains[i / 10] * u(rng);
    // Oracle: energy of every block, threshold against the max, in order.
    std::vector<double> expected;
    double emax = 0.0;
    std::vector<double> e(40, 0.0);
    for (int b = 0; b < 40; ++b) {
      for (int i = 0; i < 10; ++i) e[b] += s[b * 10 + i] * s[b * 10 + i];
      emax = std::max(emax, e[b]);
    }
    for (int b = 0; b < 40; ++b)
      if (e[b] >= cfg.energy_threshold_ratio * emax)
        expected.insert(expected.end(), s.begin() + b * 10, s.begin() + b * 10 + 10);
    const auto out = RemoveSilence(Sig(s), cfg);
    CHECK(out.samples == expected);
    CHECK(out.samples.size() % 10 == 0);
    CHECK(out.samples.size() <= s.size());
  }
  SUBCASE("all silence") {
    try {
      RemoveSilence(Sig(std::vector<double>(100, 0.0)), cfg);
      FAIL("expected AllSilence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kAllSilence);
    }
  }
}

TEST_CASE("Hamming window and framing") {
  const auto w = HammingWindow(161);
  CHECK(w.front() == doctest::Approx(0.08));
  CHECK(w.back() == doctest::Approx(0.08));
  CHECK(w[80] == doctest::Approx(1.0));
  const auto w160 = HammingWindow(160);
  for (int n = 0; n < 160; ++n) CHECK(w160[n] == doctest::Approx(w160[159 - n]).epsilon(1e-14));

  FrameConfig cfg;
  const auto seq = FrameAndWindow(Sig(std::vector<double>(400, 1.0)), cfg);
  CHECK(seq.size() == 4);
  for (const auto& f : seq.frames) {
    REQUIRE(f.size() == 160);
    for (int n = 0; n < 160; ++n) CHECK(f[n] == doctest::Approx(w160[n]));
  }
  for (std::size_t len : {160u, 239u, 240u, 1000u, 1001u}) {
    const auto s = FrameAndWindow(Sig(std::vector<double>(len, 0.1)), cfg);
    CHECK(s.size() == (len - 160) / 80 + 1);
  }
  // Frames start at multiples of the hop.
  std::vector<double> ramp(400);
  for (int i = 0; i < 400; ++i) ramp[i] = i;
  const auto r = FrameAndWindow(Sig(ramp), cfg);
  CHECK(r.frames[2][10] == doctest::Approx(170.0 * w160[10]));

  try {
    FrameAndWindow(Sig(std::vector<double>(159, 1.0)), cfg);
    FAIL("expected TooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTooShort);
  }
}

TEST_CASE("frame config validation") {
  FrameConfig cfg;
  CHECK_NOTHROW(cfg.Validate());
  cfg.hop_samples = 200;
  CHECK_THROWS_AS(cfg.Validate(), Error);
}

TEST_CASE("WAV reader") {
  AudioSignal s{{0.0, 0.5, -0.5, 0.25, -1.0}, 8000};
  const auto bytes = EncodeWav(s);
  const auto back = ParseWav(bytes);
  CHECK(back.sample_rate_hz == 8000);
  REQUIRE(back.samples.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(back.samples[i] == doctest::Approx(s.samples[i]).epsilon(1e-4));

  const auto path = (std::filesystem::temp_directory_path() / "vsid_wav_test.wav").string();
  WriteWav(path, s);
  CHECK(ReadWav(path).samples == back.samples);
  std::filesystem::remove(path);

  SUBCASE("stereo rejected") {
    auto b = bytes;
    b[22] = 2;
    try {
      ParseWav(b);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kFormatError);
      CHECK(std::string(e.what()).find("mono") != std::string::npos);
    }
  }
  SUBCASE("float encoding rejected") {
    auto b = bytes;
    b[20] = 3;
    CHECK_THROWS_WITH_AS(ParseWav(b), doctest::Contains("PCM"), Error);
  }
  SUBCASE("not RIFF") {
    auto b = bytes;
    b[0] = 'X';
    CHECK_THROWS_AS(ParseWav(b), Error);
  }
  CHECK_THROWS_AS(ReadWav("/nonexistent/file.wav"), Error);
}
