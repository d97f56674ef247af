#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ieval {

// Mono waveform with amplitudes in [-1, 1]. Storage is single precision:
// every supported PCM encoding (16/24-bit int, 32-bit float) is exact in it.
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 0;
};

enum class WavEncoding { Pcm16, Pcm24, Float32 };

// Decodes a RIFF/WAVE byte image. Integer PCM is mapped by symmetric
// division by 2^(bits-1); multichannel frames are averaged when `downmix`.
Waveform decode_wav(std::span<const std::uint8_t> bytes, bool downmix = true);
Waveform load_wav(const std::filesystem::path& path, bool downmix = true);

// Interleaved multichannel encode; `samples.size()` must be a multiple of
// `channels`. Integer encodings clip to the representable range.
std::vector<std::uint8_t> encode_wav(std::span<const float> samples, int sample_rate,
                                     WavEncoding encoding, int channels = 1);
void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate, WavEncoding encoding = WavEncoding::Float32);

}  // namespace ieval
