#include "cuescore/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "cuescore/error.hpp"
#include "cuescore/matrix.hpp"

namespace cuescore {

namespace {

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

}  // namespace

AudioBuffer load_wav(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(name + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (size > bytes.size() - body) {
      throw FormatError(name + ": chunk '" + std::string(reinterpret_cast<const char*>(chunk), 4) +
                        "' runs past end of file");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(name + ": fmt chunk too small");
      const std::uint8_t* f = bytes.data() + body;
      const std::uint16_t codec = le16(f);
      const std::uint16_t channels = le16(f + 2);
      const std::uint32_t rate = le32(f + 4);
      const std::uint16_t bits = le16(f + 14);
      if (codec != 1) {
        throw UnsupportedFormatError(name + ": unsupported codec (format tag " + std::to_string(codec) +
                                     "), only PCM is accepted");
      }
      if (channels != 1) {
        throw UnsupportedFormatError(name + ": unsupported channel count " + std::to_string(channels) +
                                     ", only mono is accepted");
      }
      if (rate != static_cast<std::uint32_t>(kSampleRateHz)) {
        throw UnsupportedFormatError(name + ": unsupported sample rate " + std::to_string(rate) +
                                     " Hz, only 16000 Hz is accepted");
      }
      if (bits != 16) {
        throw UnsupportedFormatError(name + ": unsupported bits per sample " + std::to_string(bits) +
                                     ", only 16-bit is accepted");
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt) throw FormatError(name + ": missing fmt chunk");
  if (data == nullptr) throw FormatError(name + ": missing data chunk");
  if (data_size % 2 != 0) throw FormatError(name + ": data chunk size is not a whole number of samples");
  if (data_size == 0) throw FormatError(name + ": data chunk holds no samples");

  AudioBuffer audio;
  audio.sample_rate_hz = kSampleRateHz;
  audio.samples.resize(data_size / 2);
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    const auto code = static_cast<std::int16_t>(le16(data + 2 * i));
    audio.samples[i] = static_cast<double>(code) / 32768.0;
  }
  return audio;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
  if (audio.sample_rate_hz != kSampleRateHz) {
    throw UnsupportedFormatError("write_wav: sample rate must be 16000 Hz");
  }
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, kSampleRateHz);
  put32(out, kSampleRateHz * 2);
  put16(out, 2);
  put16(out, 16);
  put_tag(out, "data");
  put32(out, data_bytes);
  for (double s : audio.samples) {
    const double code = std::nearbyint(std::clamp(s, -1.0, 1.0) * 32768.0);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(code, -32768.0, 32767.0))));
  }
  write_file_bytes(path, out);
}

}  // namespace cuescore
