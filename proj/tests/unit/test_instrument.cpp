#include <doctest.h>

#include <fstream>
#include <random>

#include "ieval/errors.hpp"
#include "ieval/instrument.hpp"
#include "ieval/wav.hpp"
#include "test_util.hpp"

using namespace ieval;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected ieval::Error");
  return ErrorCode::InvalidConfig;
}

void write(const std::filesystem::path& p, std::size_t n, int rate, float value = 0.1f) {
  write_wav(p, std::vector<float>(n, value), rate, WavEncoding::Pcm16);
}

}  // namespace

TEST_CASE("parse_nsynth_name on the guitar examples") {
  const SampleMeta a = parse_nsynth_name("guitar_acoustic_010-024-100");
  CHECK(a.family == "guitar");
  CHECK(a.source == SourceType::Acoustic);
  CHECK(a.instrument_id == 10);
  CHECK(a.pitch == 24);
  CHECK(a.velocity == 100);

  const SampleMeta b = parse_nsynth_name("guitar_acoustic_010-049-100.wav");
  CHECK(b.pitch == 49);
  CHECK(b.velocity == 100);
  CHECK(b.instrument_id == 10);
}

TEST_CASE("multi-token families keep their underscores") {
  const SampleMeta m = parse_nsynth_name("synth_lead_synthetic_000-060-127");
  CHECK(m.family == "synth_lead");
  CHECK(m.source == SourceType::Synthetic);
  CHECK(m.velocity == 127);
}

TEST_CASE("malformed names") {
  CHECK(code_of([] { parse_nsynth_name("bass-synth-oops"); }) == ErrorCode::MalformedName);
  CHECK(code_of([] { parse_nsynth_name("bass_synthetic_01-060-100"); }) == ErrorCode::MalformedName);
  CHECK(code_of([] { parse_nsynth_name("bass_synthetic_001-0x0-100"); }) == ErrorCode::MalformedName);
  CHECK(code_of([] { parse_nsynth_name("bass_analog_001-060-100"); }) == ErrorCode::MalformedName);
  CHECK(code_of([] { parse_nsynth_name("Bass_acoustic_001-060-100"); }) == ErrorCode::MalformedName);
}

TEST_CASE("grid validation") {
  CHECK_NOTHROW(parse_nsynth_name("organ_electronic_001-021-025", true));
  CHECK_NOTHROW(parse_nsynth_name("organ_electronic_001-108-127", true));
  CHECK(code_of([] { parse_nsynth_name("organ_electronic_001-020-100", true); }) ==
        ErrorCode::OutOfRange);
  CHECK(code_of([] { parse_nsynth_name("organ_electronic_001-109-100", true); }) ==
        ErrorCode::OutOfRange);
  CHECK(code_of([] { parse_nsynth_name("organ_electronic_001-060-101", true); }) ==
        ErrorCode::OutOfRange);
  CHECK_NOTHROW(parse_nsynth_name("organ_electronic_001-009-101", false));
}

TEST_CASE("parse is a left inverse of format over random valid metadata") {
  std::mt19937 rng(1234);
  const char* families[] = {"bass", "brass", "flute", "guitar", "keyboard", "mallet",
                            "organ", "reed", "string", "synth_lead", "vocal"};
  for (int trial = 0; trial < 500; ++trial) {
    SampleMeta m;
    m.family = families[rng() % std::size(families)];
    m.source = static_cast<SourceType>(rng() % 3);
    m.instrument_id = static_cast<int>(rng() % 1000);
    m.pitch = kMinGridPitch + static_cast<int>(rng() % 88);
    m.velocity = kGridVelocities[rng() % 5];
    CHECK(parse_nsynth_name(format_nsynth_name(m), true) == m);
  }
}

TEST_CASE("sample key label and ordering") {
  CHECK(SampleKey{60, 100}.label() == "p60_v100");
  CHECK(SampleKey{59, 127} < SampleKey{60, 25});
  CHECK(SampleKey{60, 25} < SampleKey{60, 50});
}

TEST_CASE("load_instrument pads to the longest sample") {
  testutil::TempDir dir("inst_pad");
  write(dir.path() / "test_acoustic_000-060-100.wav", 64000, 16000);
  write(dir.path() / "test_acoustic_000-061-100.wav", 64000, 16000);
  write(dir.path() / "test_acoustic_000-062-100.wav", 63000, 16000);
  write(dir.path() / "test_acoustic_000-063-100.wav", 64000, 16000);

  const Instrument inst = load_instrument(dir.path());
  CHECK(inst.size() == 4);
  CHECK(inst.length() == 64000);
  CHECK(inst.sample_rate() == 16000);
  const auto& padded = inst[2].samples;
  CHECK(padded[62999] != 0.0f);
  CHECK(padded[63000] == 0.0f);

  LoadOptions trunc;
  trunc.policy = LengthPolicy::truncate_to_min();
  CHECK(load_instrument(dir.path(), trunc).length() == 63000);

  LoadOptions fixed;
  fixed.policy = LengthPolicy::fixed(32000);
  CHECK(load_instrument(dir.path(), fixed).length() == 32000);
}

TEST_CASE("load_instrument rejects duplicates, rate mismatches and tiny sets") {
  {
    testutil::TempDir dir("inst_dup");
    write(dir.path() / "test_acoustic_001-060-100.wav", 1000, 16000);
    write(dir.path() / "test_acoustic_002-060-100.wav", 1000, 16000);
    CHECK(code_of([&] { load_instrument(dir.path()); }) == ErrorCode::DuplicateKey);
  }
  {
    testutil::TempDir dir("inst_rate");
    write(dir.path() / "test_acoustic_000-060-100.wav", 1000, 16000);
    write(dir.path() / "test_acoustic_000-061-100.wav", 1000, 44100);
    CHECK(code_of([&] { load_instrument(dir.path()); }) == ErrorCode::RateMismatch);
  }
  {
    testutil::TempDir dir("inst_one");
    write(dir.path() / "test_acoustic_000-060-100.wav", 1000, 16000);
    CHECK(code_of([&] { load_instrument(dir.path()); }) == ErrorCode::EmptyInstrument);
  }
  {
    testutil::TempDir dir("inst_name");
    write(dir.path() / "test_acoustic_000-060-100.wav", 1000, 16000);
    write(dir.path() / "not-nsynth.wav", 1000, 16000);
    CHECK(code_of([&] { load_instrument(dir.path()); }) == ErrorCode::MalformedName);
  }
}

TEST_CASE("manifest sidecar overrides filenames") {
  testutil::TempDir dir("inst_manifest");
  write(dir.path() / "a.wav", 500, 8000, 0.1f);
  write(dir.path() / "b.wav", 500, 8000, 0.2f);
  {
    std::ofstream m(dir.path() / "manifest.json");
    m << R"([{"file":"a.wav","family":"bass","source":"electronic","instrument_id":3,"pitch":40,"velocity":50},
            {"file":"b.wav","family":"bass","source":"electronic","instrument_id":3,"pitch":38,"velocity":50}])";
  }
  const Instrument inst = load_instrument(dir.path());
  REQUIRE(inst.size() == 2);
  CHECK(inst[0].key() == SampleKey{38, 50});
  CHECK(inst[0].samples[0] == doctest::Approx(0.2).epsilon(1e-4));
  CHECK(inst[1].meta.source == SourceType::Electronic);
}

TEST_CASE("instrument order is canonical regardless of input order") {
  std::vector<Sample> a;
  a.push_back(testutil::make_sample(62, 100, std::vector<float>(10, 0.1f), 100));
  a.push_back(testutil::make_sample(60, 127, std::vector<float>(10, 0.2f), 100));
  a.push_back(testutil::make_sample(60, 25, std::vector<float>(10, 0.3f), 100));
  std::vector<Sample> b{a[2], a[0], a[1]};
  const Instrument ia("a", a);
  const Instrument ib("b", b);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ia[i].key() == ib[i].key());
    CHECK(ia[i].samples == ib[i].samples);
  }
  CHECK(ia[0].key() == SampleKey{60, 25});
}

TEST_CASE("instrument invariants are enforced at construction") {
  std::vector<Sample> uneven;
  uneven.push_back(testutil::make_sample(60, 100, std::vector<float>(10, 0.1f), 100));
  uneven.push_back(testutil::make_sample(61, 100, std::vector<float>(11, 0.1f), 100));
  CHECK(code_of([&] { Instrument("x", uneven); }) == ErrorCode::InvalidConfig);

  std::vector<Sample> loud;
  loud.push_back(testutil::make_sample(60, 100, std::vector<float>(10, 1.5f), 100));
  CHECK(code_of([&] { Instrument("x", loud); }) == ErrorCode::OutOfRange);

  std::vector<Sample> nan;
  nan.push_back(testutil::make_sample(60, 100, std::vector<float>(10, std::nanf("")), 100));
  CHECK(code_of([&] { Instrument("x", nan); }) == ErrorCode::CorruptFile);

  CHECK(code_of([&] { Instrument("x", {}); }) == ErrorCode::EmptyInstrument);
}
