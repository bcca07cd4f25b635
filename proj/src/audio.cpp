// Copyright 2026 the framescore authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "framescore/audio.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

namespace framescore {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatIeeeFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open WAV file: ", path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail("not a RIFF/WAVE file: ", path.string());
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* tag = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) fail("truncated WAV chunk in ", path.string());
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (size < 16) fail("malformed fmt chunk in ", path.string());
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      sample_rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      if (format == kFormatExtensible && size >= 26) {
        // Wave format extensible: the actual format is the first word of the
        // sub-format GUID.
        format = read_u16(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = size;
    }
    pos = body + size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) fail("WAV missing fmt or data chunk: ", path.string());
  if (channels == 0) fail("WAV declares zero channels: ", path.string());
  if (sample_rate == 0) fail("WAV declares zero sample rate: ", path.string());

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool float32 = format == kFormatIeeeFloat && bits == 32;
  if (!pcm16 && !float32) {
    fail("unsupported WAV encoding (format ", format, ", ", bits, " bit) in ", path.string(),
         "; only 16-bit PCM and 32-bit float are supported");
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n_frames = data_size / frame_bytes;

  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    const unsigned char* frame = data + i * frame_bytes;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const unsigned char* s = frame + c * bytes_per_sample;
      if (pcm16) {
        const std::int16_t v = static_cast<std::int16_t>(read_u16(s));
        acc += static_cast<double>(v) / 32768.0;
      } else {
        float f = 0.0f;
        std::memcpy(&f, s, 4);
        acc += static_cast<double>(f);
      }
    }
    out.samples[i] = acc / channels;
  }
  return out;
}

std::size_t write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
                      WavDepth depth) {
  if (buffer.samples.empty()) fail("refusing to write empty WAV: ", path.string());
  if (buffer.sample_rate == 0) fail("WAV buffer has no sample rate: ", path.string());

  const std::uint16_t bits = depth == WavDepth::pcm16 ? 16 : 32;
  const std::uint16_t format = depth == WavDepth::pcm16 ? kFormatPcm : kFormatIeeeFloat;
  const std::uint32_t byte_rate = buffer.sample_rate * bits / 8;
  const std::uint32_t data_size = static_cast<std::uint32_t>(buffer.samples.size() * bits / 8);

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, 1);  // mono
  put_u32(out, buffer.sample_rate);
  put_u32(out, byte_rate);
  put_u16(out, bits / 8);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);

  std::size_t clipped = 0;
  for (double x : buffer.samples) {
    double v = x;
    if (v > 1.0) {
      v = 1.0;
      ++clipped;
    } else if (v < -1.0) {
      v = -1.0;
      ++clipped;
    }
    if (depth == WavDepth::pcm16) {
      // Round half away from zero, then clamp the +1.0 -> 32768 corner.
      double scaled = v * 32768.0;
      long q = std::lround(scaled);
      if (q > 32767) q = 32767;
      if (q < -32768) q = -32768;
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      const float f = static_cast<float>(v);
      std::uint32_t u = 0;
      std::memcpy(&u, &f, 4);
      put_u32(out, u);
    }
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail("cannot write WAV file: ", path.string());
  os.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!os) fail("short write to WAV file: ", path.string());
  return clipped;
}

double rms(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (double x : samples) acc += x * x;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

double rms_dbfs(const AudioBuffer& buffer) {
  const double r = rms(buffer.samples);
  if (r <= 0.0) fail("RMS level of all-zero buffer is undefined");
  return 20.0 * std::log10(r);
}

AudioBuffer loudness_normalize(const AudioBuffer& buffer, double target_dbfs) {
  const double r = rms(buffer.samples);
  if (r <= 0.0) fail("cannot loudness-normalize an all-zero buffer");
  const double gain = std::pow(10.0, target_dbfs / 20.0) / r;
  AudioBuffer out;
  out.sample_rate = buffer.sample_rate;
  out.samples.resize(buffer.samples.size());
  for (std::size_t i = 0; i < buffer.samples.size(); ++i) out.samples[i] = buffer.samples[i] * gain;
  return out;
}

}  // namespace framescore
