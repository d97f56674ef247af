#pragma once

#include <cmath>
#include <cstdint>
#include <unistd.h>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "ieval/instrument.hpp"

namespace testutil {

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ieval_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<float> sine(double hz, double amp, std::size_t n, int rate, double phase = 0.0) {
  std::vector<float> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = static_cast<float>(amp * std::sin(2.0 * std::numbers::pi * hz * double(i) / rate + phase));
  return x;
}

inline std::vector<float> noise(std::size_t n, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<float> x(n);
  for (auto& v : x) v = static_cast<float>(u(rng));
  return x;
}

inline ieval::Sample make_sample(int pitch, int velocity, std::vector<float> x, int rate) {
  ieval::Sample s;
  s.meta.family = "test";
  s.meta.source = ieval::SourceType::Synthetic;
  s.meta.pitch = pitch;
  s.meta.velocity = velocity;
  s.samples = std::move(x);
  s.sample_rate = rate;
  return s;
}

}  // namespace testutil
