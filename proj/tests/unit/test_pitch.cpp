#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ieval/errors.hpp"
#include "ieval/pitch.hpp"
#include "test_util.hpp"

using namespace ieval;

namespace {

std::vector<float> tuned_sine(double midi, int rate, double seconds, double amp = 0.5) {
  return testutil::sine(midi_to_hz(midi), amp, std::size_t(seconds * rate), rate);
}

Instrument sine_instrument(const std::vector<int>& pitches, double detune, double amp = 0.5) {
  std::vector<Sample> s;
  for (int p : pitches) s.push_back(testutil::make_sample(p, 100, tuned_sine(p + detune, 44100, 0.5, amp), 44100));
  return Instrument("sines", std::move(s));
}

}  // namespace

TEST_CASE("hz and midi conversions") {
  CHECK(hz_to_midi(440.0) == 69.0);
  CHECK(hz_to_midi(880.0) == 81.0);
  CHECK(hz_to_midi(27.5) == 21.0);
  for (double bad : {0.0, -1.0}) {
    try {
      hz_to_midi(bad);
      FAIL("expected NonPositiveFrequency");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NonPositiveFrequency);
    }
  }
  for (int m = 21; m <= 108; ++m) CHECK(std::abs(hz_to_midi(midi_to_hz(m)) - m) < 1e-9);
}

TEST_CASE("median pitch over voiced frames") {
  CHECK(*median_pitch(std::vector<F0>{440.0, 440.0, 441.0, std::nullopt}) == 440.0);
  CHECK(*median_pitch(std::vector<F0>{100.0, 200.0, 300.0}) == 200.0);
  CHECK(*median_pitch(std::vector<F0>{100.0, 300.0}) == 200.0);
  CHECK_FALSE(median_pitch(std::vector<F0>{std::nullopt, std::nullopt}).has_value());
  CHECK_FALSE(median_pitch(std::vector<F0>{}).has_value());
}

TEST_CASE("difference function: FFT path matches the direct sum") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (std::size_t n : {64u, 1000u, 4096u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = g(rng);
    const auto fast = yin_difference(x, DifferenceMethod::Fft);
    const auto slow = yin_difference(x, DifferenceMethod::Direct);
    REQUIRE(fast.size() == n / 2 + 1);
    REQUIRE(slow.size() == fast.size());
    CHECK(fast[0] == 0.0);
    double scale = 0.0;
    for (double v : slow) scale = std::max(scale, v);
    for (std::size_t t = 0; t < fast.size(); ++t) CHECK(std::abs(fast[t] - slow[t]) <= 1e-10 * scale);
  }
}

TEST_CASE("cumulative mean normalization conventions") {
  const std::vector<double> zeros(10, 0.0);
  for (double v : yin_cmnd(zeros)) CHECK(v == 1.0);
  const std::vector<double> d{0.0, 2.0, 4.0, 0.0};
  const auto c = yin_cmnd(d);
  CHECK(c[0] == 1.0);
  CHECK(c[1] == doctest::Approx(1.0));
  CHECK(c[2] == doctest::Approx(4.0 / 3.0));
  CHECK(c[3] == 0.0);
}

TEST_CASE("sine frequencies") {
  SUBCASE("A4") {
    const auto f = yin_f0(testutil::sine(440.0, 0.5, 44100, 44100), 44100);
    REQUIRE_FALSE(f.empty());
    for (const auto& v : f) {
      REQUIRE(v.has_value());
      CHECK(std::abs(*v - 440.0) <= 0.5);
    }
  }
  SUBCASE("A0, the lowest grid note") {
    const auto f = yin_f0(testutil::sine(27.5, 0.5, 44100, 44100), 44100);
    for (const auto& v : f) {
      REQUIRE(v.has_value());
      CHECK(std::abs(*v - 27.5) <= 0.2);
    }
  }
  SUBCASE("both difference methods agree") {
    YinConfig direct;
    direct.method = DifferenceMethod::Direct;
    const auto x = testutil::sine(311.0, 0.4, 12000, 44100);
    const auto a = yin_f0(x, 44100);
    const auto b = yin_f0(x, 44100, direct);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i] == doctest::Approx(*b[i]).epsilon(1e-9));
  }
}

TEST_CASE("silence is unvoiced") {
  const std::vector<float> zero(20000, 0.0f);
  for (const auto& v : yin_f0(zero, 44100)) CHECK_FALSE(v.has_value());
}

TEST_CASE("strong second harmonic does not cause an octave error") {
  const int rate = 44100;
  for (double f0 : {82.4, 220.0, 659.3}) {
    auto x = testutil::sine(f0, 0.4, rate, rate);
    const auto h2 = testutil::sine(2.0 * f0, 0.36, rate, rate, 0.7);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += h2[i];
    const auto med = median_pitch(yin_f0(x, rate));
    REQUIRE(med.has_value());
    CHECK(std::abs(hz_to_midi(*med) - hz_to_midi(f0)) < 0.1);
  }
}

TEST_CASE("configuration and length errors") {
  YinConfig cfg;
  cfg.frame_size = 1024;
  CHECK_THROWS_AS(cfg.validate(44100), Error);
  YinConfig high;
  high.f_max = 30000.0;
  CHECK_THROWS_AS(high.validate(44100), Error);
  try {
    yin_f0(std::vector<float>(100, 0.1f), 44100);
    FAIL("expected TooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooShort);
  }
}

TEST_CASE("MAD of tuned and detuned instruments") {
  const std::vector<int> pitches{33, 45, 57, 60, 69, 81, 93};
  const auto tuned = mad_report(sine_instrument(pitches, 0.0));
  CHECK(tuned.mad < 0.02);
  CHECK(tuned.voiced == pitches.size());
  CHECK(tuned.unvoiced == 0);

  const auto sharp = mad_report(sine_instrument(pitches, 0.10));
  CHECK(std::abs(sharp.mad - 0.10) <= 0.02);
  for (const auto& e : sharp.per_sample) CHECK(*e.deviation > 0.0);

  const auto median = mad_report(sine_instrument(pitches, 0.10), {}, MadMode::MedianAbs);
  CHECK(median.mode == MadMode::MedianAbs);
  CHECK(std::abs(median.mad - 0.10) <= 0.02);
}

TEST_CASE("single exactly periodic sample has zero MAD") {
  // 440 Hz at 44 kHz is a period of exactly 100 samples; tabulating one
  // period makes every frame bit-periodic.
  const int rate = 44000;
  std::vector<float> period(100);
  for (std::size_t i = 0; i < period.size(); ++i)
    period[i] = static_cast<float>(0.5 * std::sin(2.0 * std::numbers::pi * double(i) / 100.0));
  std::vector<float> x(rate / 2);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = period[i % 100];
  YinConfig cfg;
  cfg.frame_size = 4000;
  cfg.hop_size = 1000;
  cfg.prefilter = false;
  std::vector<Sample> s;
  s.push_back(testutil::make_sample(69, 100, x, rate));
  const Instrument inst("one", std::move(s));
  CHECK(mad_report(inst, cfg).mad == 0.0);
  // The FFT low-pass only adds rounding noise.
  cfg.prefilter = true;
  CHECK(mad_report(inst, cfg).mad < 1e-9);
}

TEST_CASE("MAD ignores gain and order, and counts unvoiced samples") {
  const std::vector<int> pitches{40, 52, 64, 76};
  const auto a = mad_report(sine_instrument(pitches, 0.05, 0.5));
  const auto b = mad_report(sine_instrument(pitches, 0.05, 0.05));
  CHECK(a.mad == doctest::Approx(b.mad).epsilon(1e-9));

  std::vector<Sample> s;
  for (auto it = pitches.rbegin(); it != pitches.rend(); ++it)
    s.push_back(testutil::make_sample(*it, 100, tuned_sine(*it + 0.05, 44100, 0.5), 44100));
  s.push_back(testutil::make_sample(90, 100, std::vector<float>(22050, 0.0f), 44100));
  const auto c = mad_report(Instrument("mixed", std::move(s)));
  CHECK(c.mad == a.mad);
  CHECK(c.voiced == 4);
  CHECK(c.unvoiced == 1);

}

TEST_CASE("all unvoiced is an error") {
  std::vector<Sample> s;
  s.push_back(testutil::make_sample(60, 100, std::vector<float>(10000, 0.0f), 44100));
  s.push_back(testutil::make_sample(61, 100, std::vector<float>(10000, 0.0f), 44100));
  try {
    mad_report(Instrument("quiet", std::move(s)));
    FAIL("expected AllUnvoiced");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllUnvoiced);
  }
}

TEST_CASE("serial and OpenMP reports agree") {
  const auto inst = sine_instrument({30, 50, 70, 90}, 0.03);
  const auto a = mad_report(inst, {}, MadMode::MeanAbs, Backend::OpenMP);
  const auto b = mad_report(inst, {}, MadMode::MeanAbs, Backend::Serial);
  CHECK(a.mad == b.mad);
  CHECK(pitch_report_json(a).dump() == pitch_report_json(b).dump());
}
