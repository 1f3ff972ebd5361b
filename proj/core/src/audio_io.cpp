#include "pavoc/audio_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "pavoc/byte_io.hpp"
#include "pavoc/errors.hpp"

namespace pavoc {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

bool supported_rate(std::uint32_t rate) { return rate == 22050 || rate == 24000; }

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

Waveform decode_wav(std::span<const std::uint8_t> bytes) {
  ByteReader reader(bytes);
  if (reader.magic() != "RIFF") throw ParseError("not a RIFF file");
  reader.u32();
  if (reader.magic() != "WAVE") throw ParseError("RIFF file is not WAVE");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (reader.remaining() >= 8) {
    const std::string id = reader.magic();
    const std::uint32_t size = reader.u32();
    if (id == "fmt ") {
      if (size < 16) throw ParseError("fmt chunk too short");
      format = reader.u16();
      channels = reader.u16();
      rate = reader.u32();
      reader.u32();  // byte rate
      reader.u16();  // block align
      bits = reader.u16();
      std::size_t rest = size - 16;
      if (format == kFormatExtensible && rest >= 10) {
        reader.skip(8);  // cbSize, valid bits, channel mask
        format = reader.u16();
        rest -= 10;
      }
      reader.skip(rest + (size & 1u));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw ParseError("data chunk before fmt chunk");
      if (channels != 1) throw ParseError("only mono audio is supported, got " + std::to_string(channels) + " channels");
      if (!supported_rate(rate)) throw ParseError("unsupported sample rate " + std::to_string(rate));
      Waveform wav;
      wav.sample_rate = rate;
      if (format == kFormatPcm && bits == 16) {
        const std::size_t n = std::min<std::size_t>(size, reader.remaining()) / 2;
        wav.samples.resize(n);
        for (auto& s : wav.samples) s = static_cast<std::int16_t>(reader.u16()) / 32768.0;
      } else if (format == kFormatFloat && bits == 32) {
        const std::size_t n = std::min<std::size_t>(size, reader.remaining()) / 4;
        wav.samples.resize(n);
        for (auto& s : wav.samples) {
          s = reader.f32();
          if (!std::isfinite(s)) throw ParseError("non-finite float sample");
        }
      } else {
        throw ParseError("unsupported WAV encoding (format " + std::to_string(format) + ", " + std::to_string(bits) +
                         " bits); need PCM16 or float32");
      }
      return wav;
    } else {
      reader.skip(std::min<std::size_t>(size + (size & 1u), reader.remaining()));
    }
  }
  throw ParseError("WAV file has no data chunk");
}

Waveform read_wav(const std::filesystem::path& path) {
  try {
    return decode_wav(read_file_bytes(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(std::span<const double> samples, unsigned sample_rate) {
  const auto data_size = static_cast<std::uint32_t>(samples.size() * 4);
  ByteWriter w;
  w.magic("RIFF");
  w.u32(36 + data_size);
  w.magic("WAVE");
  w.magic("fmt ");
  w.u32(16);
  w.u16(kFormatFloat);
  w.u16(1);
  w.u32(sample_rate);
  w.u32(sample_rate * 4);
  w.u16(4);
  w.u16(32);
  w.magic("data");
  w.u32(data_size);
  for (double s : samples) w.f32(static_cast<float>(s));
  return w.take();
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples, unsigned sample_rate) {
  write_file_bytes(path, encode_wav(samples, sample_rate));
}

MelFile decode_melb(std::span<const std::uint8_t> bytes) {
  ByteReader reader(bytes);
  if (reader.magic() != "MELB") throw ParseError("bad MELB magic");
  const std::uint32_t version = reader.u32();
  if (version != kMelbVersion) throw ParseError("unsupported MELB version " + std::to_string(version));
  const std::uint32_t frames = reader.u32();
  const std::uint32_t bands = reader.u32();
  MelFile file;
  file.sample_rate = reader.f32();
  file.hop_length = reader.u32();
  if (bands == 0) throw ParseError("MELB with zero bands");
  if (file.hop_length == 0) throw ParseError("MELB with zero hop length");
  if (!(file.sample_rate > 0.0f) || !std::isfinite(file.sample_rate)) throw ParseError("MELB with invalid sample rate");
  const std::size_t count = static_cast<std::size_t>(frames) * bands;
  if (reader.remaining() != count * 4)
    throw ParseError("MELB payload is " + std::to_string(reader.remaining()) + " bytes, expected " + std::to_string(count * 4));
  file.mel = MelSpectrogram(frames, bands);
  for (auto& v : file.mel.values()) {
    v = reader.f32();
    if (!std::isfinite(v) || v < 0.0) throw ParseError("MELB contains a negative or non-finite value");
  }
  return file;
}

MelFile read_melb(const std::filesystem::path& path) {
  try {
    return decode_melb(read_file_bytes(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_melb(const MelFile& file) {
  ByteWriter w;
  w.magic("MELB");
  w.u32(kMelbVersion);
  w.u32(static_cast<std::uint32_t>(file.mel.frames()));
  w.u32(static_cast<std::uint32_t>(file.mel.bands()));
  w.f32(file.sample_rate);
  w.u32(file.hop_length);
  for (double v : file.mel.values()) w.f32(static_cast<float>(v));
  return w.take();
}

void write_melb(const std::filesystem::path& path, const MelFile& file) { write_file_bytes(path, encode_melb(file)); }

}  // namespace pavoc
