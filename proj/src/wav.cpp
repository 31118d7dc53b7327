// Copyright 2026 rtfvae authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "rtfvae/signal.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace rtfvae {

namespace {

template <typename T>
void put(std::ostream& os, T value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw Error("unexpected end of file");
  return value;
}

}  // namespace

void write_wav(const std::filesystem::path& path, const TimeSignal& x,
               double scale) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  const auto n = static_cast<std::uint32_t>(x.size());
  const std::uint32_t data_bytes = n * 2;
  os.write("RIFF", 4);
  put<std::uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put<std::uint32_t>(os, 16);
  put<std::uint16_t>(os, 1);  // PCM
  put<std::uint16_t>(os, 1);  // mono
  put<std::uint32_t>(os, static_cast<std::uint32_t>(x.sample_rate));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(x.sample_rate) * 2);
  put<std::uint16_t>(os, 2);
  put<std::uint16_t>(os, 16);
  os.write("data", 4);
  put<std::uint32_t>(os, data_bytes);
  for (Index i = 0; i < x.size(); ++i) {
    const double v = std::clamp(x.samples[i] * scale, -1.0, 1.0);
    put<std::int16_t>(os, static_cast<std::int16_t>(std::lround(v * 32767.0)));
  }
}

TimeSignal read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::array<char, 4> tag{};
  is.read(tag.data(), 4);
  if (std::memcmp(tag.data(), "RIFF", 4) != 0) throw Error("not a RIFF file");
  get<std::uint32_t>(is);
  is.read(tag.data(), 4);
  if (std::memcmp(tag.data(), "WAVE", 4) != 0) throw Error("not a WAVE file");

  int sample_rate = 0;
  bool have_fmt = false;
  while (is.read(tag.data(), 4)) {
    const auto size = get<std::uint32_t>(is);
    if (std::memcmp(tag.data(), "fmt ", 4) == 0) {
      const auto format = get<std::uint16_t>(is);
      const auto channels = get<std::uint16_t>(is);
      sample_rate = static_cast<int>(get<std::uint32_t>(is));
      get<std::uint32_t>(is);
      get<std::uint16_t>(is);
      const auto bits = get<std::uint16_t>(is);
      if (format != 1 || channels != 1 || bits != 16)
        throw Error("only mono 16-bit PCM WAV is supported");
      is.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag.data(), "data", 4) == 0) {
      if (!have_fmt) throw Error("WAV data chunk before fmt chunk");
      TimeSignal out;
      out.sample_rate = sample_rate;
      out.samples.resize(size / 2);
      for (Index i = 0; i < out.size(); ++i)
        out.samples[i] = get<std::int16_t>(is) / 32767.0;
      return out;
    } else {
      is.seekg(size + (size & 1u), std::ios::cur);
    }
  }
  throw Error("WAV file has no data chunk");
}

void write_f64_signal(const std::filesystem::path& path, const TimeSignal& x) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  put<std::uint64_t>(os, static_cast<std::uint64_t>(x.size()));
  os.write(reinterpret_cast<const char*>(x.samples.data()),
           static_cast<std::streamsize>(x.size() * sizeof(double)));
}

TimeSignal read_f64_signal(const std::filesystem::path& path,
                           int sample_rate) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  const auto n = get<std::uint64_t>(is);
  TimeSignal out;
  out.sample_rate = sample_rate;
  out.samples.resize(static_cast<Index>(n));
  is.read(reinterpret_cast<char*>(out.samples.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw Error("truncated signal file " + path.string());
  return out;
}

}  // namespace rtfvae
