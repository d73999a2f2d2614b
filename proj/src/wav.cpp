#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "vsid/error.hpp"
#include "vsid/signal_prep.hpp"

namespace vsid {
namespace {

std::uint32_t ReadU32(std::span<const unsigned char> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) |
         (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t ReadU16(std::span<const unsigned char> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void PutU32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void PutU16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void PutTag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

AudioSignal ParseWav(std::span<const unsigned char> bytes,
                     const std::string& origin) {
  auto fail = [&](const std::string& why) {
    return Error(ErrorCode::kFormatError, origin + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw fail("not a RIFF/WAVE file");

  bool have_fmt = false;
  int rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = ReadU32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) {
      // Streams written without a final size often truncate the data chunk.
      if (std::memcmp(bytes.data() + pos, "data", 4) != 0)
        throw fail("truncated chunk");
    }
    const std::size_t avail =
        std::min<std::size_t>(chunk_size, bytes.size() - body);
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw fail("fmt chunk too small");
      const std::uint16_t format = ReadU16(bytes, body);
      const std::uint16_t channels = ReadU16(bytes, body + 2);
      rate = static_cast<int>(ReadU32(bytes, body + 4));
      const std::uint16_t bits = ReadU16(bytes, body + 14);
      std::uint16_t effective = format;
      if (format == 0xFFFE && chunk_size >= 40)  // WAVE_FORMAT_EXTENSIBLE
        effective = ReadU16(bytes, body + 24);
      if (effective != 1)
        throw fail("unsupported encoding (format tag " +
                   std::to_string(effective) + "); only integer PCM is read");
      if (channels != 1)
        throw fail(std::to_string(channels) +
                   " channels; only mono audio is supported");
      if (bits != 16)
        throw fail(std::to_string(bits) + "-bit samples; only 16-bit PCM is supported");
      if (rate <= 0) throw fail("invalid sample rate");
      have_fmt = true;
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk precedes fmt chunk");
      AudioSignal out{std::vector<double>(avail / 2), rate};
      for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const auto v = static_cast<std::int16_t>(ReadU16(bytes, body + 2 * i));
        out.samples[i] = v / 32768.0;
      }
      return out;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  throw fail(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

AudioSignal ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return ParseWav(bytes, path);
}

std::vector<unsigned char> EncodeWav(const AudioSignal& signal) {
  if (signal.sample_rate_hz <= 0)
    throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  PutTag(out, "RIFF");
  PutU32(out, 36 + data_bytes);
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(signal.sample_rate_hz));
  PutU32(out, static_cast<std::uint32_t>(signal.sample_rate_hz) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  PutTag(out, "data");
  PutU32(out, data_bytes);
  for (double s : signal.samples) {
    const double clipped = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<std::int16_t>(
        std::clamp(std::lround(clipped * 32768.0), -32768L, 32767L));
    PutU16(out, static_cast<std::uint16_t>(q));
  }
  return out;
}

void WriteWav(const std::string& path, const AudioSignal& signal) {
  const auto bytes = EncodeWav(signal);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path);
}

}  // namespace vsid
