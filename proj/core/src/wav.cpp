#include "vocspace/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "vocspace/error.hpp"

namespace vocspace {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) |
         (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t off, const char* tag) {
  return std::memcmp(b.data() + off, tag, 4) == 0;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

WavAudio decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw InputError("not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, off + 4);
    const std::size_t body = off + 8;
    const std::size_t avail = bytes.size() - body;
    if (tag_is(bytes, off, "fmt ")) {
      if (size < 16 || size > avail) throw InputError("truncated fmt chunk");
      std::uint16_t format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw InputError("truncated WAVE_FORMAT_EXTENSIBLE fmt chunk");
        format = read_u16(bytes, body + 24);  // first two bytes of subformat GUID
      }
      if (format != kFormatPcm) {
        throw InputError("unsupported WAV encoding (format tag " +
                         std::to_string(format) + "); expected PCM");
      }
      have_fmt = true;
    } else if (tag_is(bytes, off, "data")) {
      // Some writers leave the data size unset; clamp to what is present.
      data = bytes.subspan(body, std::min<std::size_t>(size, avail));
      have_data = true;
    }
    const std::size_t padded = static_cast<std::size_t>(size) + (size & 1u);
    if (padded > avail) break;
    off = body + padded;
  }

  if (!have_fmt) throw InputError("WAV file has no fmt chunk");
  if (!have_data) throw InputError("WAV file has no data chunk");
  if (channels != 1) {
    throw InputError("unsupported WAV channel count " + std::to_string(channels) +
                     "; only mono is accepted");
  }
  if (bits != 16) {
    throw InputError("unsupported WAV sample width " + std::to_string(bits) +
                     " bits; only 16-bit PCM is accepted");
  }
  if (rate < static_cast<std::uint32_t>(kMinSampleRateHz)) {
    throw InputError("unsupported WAV sample rate " + std::to_string(rate) +
                     " Hz; minimum is 8000 Hz");
  }

  WavAudio audio;
  audio.sample_rate_hz = static_cast<int>(rate);
  const std::size_t n = data.size() / 2;
  audio.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto raw = static_cast<std::int16_t>(read_u16(data, 2 * i));
    audio.samples[i] = static_cast<double>(raw) / 32768.0;
  }
  return audio;
}

WavAudio read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(std::span<const double> samples,
                                     int sample_rate_hz) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double x : samples) {
    const double scaled = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               int sample_rate_hz) {
  const auto bytes = encode_wav(samples, sample_rate_hz);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

}  // namespace vocspace
