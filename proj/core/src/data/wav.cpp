#include "s2p/data/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace s2p::data {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

Waveform read_wav(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open wav file: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw ValidationError("not a RIFF/WAVE file: " + path.string());

  int sample_rate = 0, channels = 0, bits = 0, format = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= n) {
    const char* tag = reinterpret_cast<const char*>(p + off);
    const std::uint32_t len = get_u32(p + off + 4);
    const std::size_t body = off + 8;
    if (body + len > n) throw ValidationError("truncated chunk in wav file: " + path.string());
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (len < 16) throw ValidationError("short fmt chunk in " + path.string());
      format = get_u16(p + body);
      channels = get_u16(p + body + 2);
      sample_rate = static_cast<int>(get_u32(p + body + 4));
      bits = get_u16(p + body + 14);
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data = p + body;
      data_len = len;
    }
    off = body + len + (len & 1);  // chunks are word-aligned
  }
  if (format != 1 || bits != 16)
    throw ValidationError("unsupported wav encoding (want PCM-16): " + path.string());
  if (channels != 1) throw ValidationError("unsupported channel count (want mono): " + path.string());
  if (!data || sample_rate <= 0) throw ValidationError("missing fmt/data chunk in " + path.string());

  Waveform wav;
  wav.sample_rate = sample_rate;
  wav.samples.resize(data_len / 2);
  for (std::size_t i = 0; i < wav.samples.size(); ++i) {
    const auto s = static_cast<std::int16_t>(get_u16(data + 2 * i));
    wav.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return wav;
}

void write_wav(const fs::path& path, const Waveform& wav) {
  if (wav.sample_rate <= 0) throw ValidationError("write_wav: sample rate must be positive");
  std::string out;
  const std::uint32_t data_len = static_cast<std::uint32_t>(wav.samples.size() * 2);
  out.reserve(44 + data_len);
  out += "RIFF";
  put_u32(out, 36 + data_len);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(wav.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(wav.sample_rate * 2));
  put_u16(out, 2);   // block align
  put_u16(out, 16);  // bits
  out += "data";
  put_u32(out, data_len);
  for (double s : wav.samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    const auto q = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
    put_u16(out, static_cast<std::uint16_t>(q));
  }
  write_text_file(path, out);
}

}  // namespace s2p::data
