#pragma once
// Hand-assembled RIFF/WAVE images for exercising the reader, including
// deliberately malformed ones.

#include <cstdint>
#include <string>
#include <vector>

namespace oracle {

struct WavHeaderFields {
  std::uint16_t format = 1;
  std::uint16_t channels = 1;
  std::uint32_t sample_rate = 16000;
  std::uint16_t bits = 16;
};

inline void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_tag(std::vector<std::uint8_t>& b, const char* tag) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(tag[i]));
}

inline std::vector<std::uint8_t> wav_image(const std::vector<std::int16_t>& samples, WavHeaderFields h = {},
                                           bool with_extra_chunk = false) {
  std::vector<std::uint8_t> body;
  put_tag(body, "WAVE");
  if (with_extra_chunk) {
    put_tag(body, "LIST");
    put_u32(body, 3);
    body.insert(body.end(), {'a', 'b', 'c', 0});  // odd size, padded
  }
  put_tag(body, "fmt ");
  put_u32(body, 16);
  put_u16(body, h.format);
  put_u16(body, h.channels);
  put_u32(body, h.sample_rate);
  put_u32(body, h.sample_rate * h.channels * (h.bits / 8));
  put_u16(body, static_cast<std::uint16_t>(h.channels * (h.bits / 8)));
  put_u16(body, h.bits);
  put_tag(body, "data");
  put_u32(body, static_cast<std::uint32_t>(samples.size() * 2));
  for (auto s : samples) put_u16(body, static_cast<std::uint16_t>(s));
  std::vector<std::uint8_t> out;
  put_tag(out, "RIFF");
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

}  // namespace oracle
