#include "ieval/wav.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "ieval/errors.hpp"

namespace ieval {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

struct FormatChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

float decode_one(std::span<const std::uint8_t> b, std::size_t at, const FormatChunk& fmt) {
  if (fmt.format == kFormatFloat) {
    return std::bit_cast<float>(read_u32(b, at));
  }
  if (fmt.bits == 16) {
    auto v = static_cast<std::int16_t>(read_u16(b, at));
    return static_cast<float>(v / 32768.0);
  }
  // 24-bit: sign-extend through the top byte of a 32-bit word.
  std::int32_t v = static_cast<std::int32_t>((static_cast<std::uint32_t>(b[at]) << 8) |
                                             (static_cast<std::uint32_t>(b[at + 1]) << 16) |
                                             (static_cast<std::uint32_t>(b[at + 2]) << 24)) >>
                   8;
  return static_cast<float>(v / 8388608.0);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Waveform decode_wav(std::span<const std::uint8_t> bytes, bool downmix) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw Error(ErrorCode::CorruptFile, "not a RIFF/WAVE container");
  }

  std::optional<FormatChunk> fmt;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (tag_is(bytes, pos, "data")) {
      if (body + size > bytes.size()) {
        throw Error(ErrorCode::CorruptFile, "data chunk extends past end of file");
      }
      data = bytes.subspan(body, size);
      have_data = true;
    } else if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16 || body + size > bytes.size()) {
        throw Error(ErrorCode::CorruptFile, "truncated fmt chunk");
      }
      FormatChunk f;
      f.format = read_u16(bytes, body);
      f.channels = read_u16(bytes, body + 2);
      f.sample_rate = read_u32(bytes, body + 4);
      f.block_align = read_u16(bytes, body + 12);
      f.bits = read_u16(bytes, body + 14);
      if (f.format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorCode::CorruptFile, "truncated WAVE_FORMAT_EXTENSIBLE");
        // First two bytes of the subformat GUID carry the actual format tag.
        f.format = read_u16(bytes, body + 24);
      }
      fmt = f;
    }
    // Chunks are word aligned.
    pos = body + size + (size & 1U);
  }

  if (!fmt) throw Error(ErrorCode::CorruptFile, "missing fmt chunk");
  if (!have_data) throw Error(ErrorCode::CorruptFile, "missing data chunk");

  const bool pcm_ok = fmt->format == kFormatPcm && (fmt->bits == 16 || fmt->bits == 24);
  const bool float_ok = fmt->format == kFormatFloat && fmt->bits == 32;
  if (!pcm_ok && !float_ok) {
    throw Error(ErrorCode::UnsupportedFormat,
                "unsupported codec (format tag " + std::to_string(fmt->format) + ", " +
                    std::to_string(fmt->bits) + " bits)");
  }
  if (fmt->channels == 0 || fmt->sample_rate == 0) {
    throw Error(ErrorCode::CorruptFile, "zero channels or sample rate");
  }
  const std::size_t width = fmt->bits / 8;
  const std::size_t frame_bytes = width * fmt->channels;
  if (fmt->block_align != frame_bytes) {
    throw Error(ErrorCode::CorruptFile, "block alignment does not match channels x width");
  }
  if (fmt->channels > 1 && !downmix) {
    throw Error(ErrorCode::ChannelError,
                std::to_string(fmt->channels) + " channels and downmix disabled");
  }
  if (data.size() % frame_bytes != 0) {
    throw Error(ErrorCode::CorruptFile, "data chunk is not a whole number of frames");
  }

  const std::size_t frames = data.size() / frame_bytes;
  Waveform out;
  out.sample_rate = static_cast<int>(fmt->sample_rate);
  out.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::size_t base = i * frame_bytes;
    if (fmt->channels == 1) {
      out.samples[i] = decode_one(data, base, *fmt);
      continue;
    }
    double acc = 0.0;
    for (std::size_t c = 0; c < fmt->channels; ++c) acc += decode_one(data, base + c * width, *fmt);
    out.samples[i] = static_cast<float>(acc / fmt->channels);
  }
  for (float v : out.samples) {
    if (!std::isfinite(v)) throw Error(ErrorCode::CorruptFile, "non-finite sample value");
  }
  return out;
}

Waveform load_wav(const std::filesystem::path& path, bool downmix) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open file", path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes, downmix);
  } catch (const Error& e) {
    throw Error(e.code(), e.what(), path.string());
  }
}

std::vector<std::uint8_t> encode_wav(std::span<const float> samples, int sample_rate,
                                     WavEncoding encoding, int channels) {
  if (channels < 1 || samples.size() % static_cast<std::size_t>(channels) != 0) {
    throw Error(ErrorCode::InvalidConfig, "sample count is not a multiple of channel count");
  }
  const std::uint16_t bits = encoding == WavEncoding::Pcm16 ? 16 : encoding == WavEncoding::Pcm24 ? 24 : 32;
  const std::uint16_t tag = encoding == WavEncoding::Float32 ? kFormatFloat : kFormatPcm;
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * (bits / 8));

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, tag);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);

  for (float v : samples) {
    switch (encoding) {
      case WavEncoding::Float32:
        put_u32(out, std::bit_cast<std::uint32_t>(v));
        break;
      case WavEncoding::Pcm16: {
        const double s = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
        break;
      }
      case WavEncoding::Pcm24: {
        const double s = std::clamp(std::round(v * 8388608.0), -8388608.0, 8388607.0);
        const auto u = static_cast<std::uint32_t>(static_cast<std::int32_t>(s));
        out.push_back(static_cast<std::uint8_t>(u & 0xFF));
        out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
        out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
        break;
      }
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate, WavEncoding encoding) {
  const auto bytes = encode_wav(samples, sample_rate, encoding);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open file for writing", path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed", path.string());
}

}  // namespace ieval
