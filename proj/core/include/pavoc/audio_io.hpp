#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "pavoc/mel.hpp"

namespace pavoc {

struct Waveform {
  unsigned sample_rate = 22050;
  std::vector<double> samples;

  double seconds() const { return sample_rate ? static_cast<double>(samples.size()) / sample_rate : 0.0; }
};

/// Mono RIFF/WAVE, PCM16 or IEEE float32, 22050 or 24000 Hz. Throws ParseError.
Waveform read_wav(const std::filesystem::path& path);
Waveform decode_wav(std::span<const std::uint8_t> bytes);

/// Writes mono IEEE float32.
void write_wav(const std::filesystem::path& path, std::span<const double> samples, unsigned sample_rate);
std::vector<std::uint8_t> encode_wav(std::span<const double> samples, unsigned sample_rate);

/// Contents of a MELB file:
///   "MELB" | u32 version=1 | u32 frames | u32 bands | f32 sample_rate | u32 hop_length
///   | frames*bands f32, frame-major, linear amplitude. All little-endian.
struct MelFile {
  MelSpectrogram mel;
  float sample_rate = 22050.0f;
  std::uint32_t hop_length = 300;
};

inline constexpr std::uint32_t kMelbVersion = 1;

MelFile read_melb(const std::filesystem::path& path);
MelFile decode_melb(std::span<const std::uint8_t> bytes);
void write_melb(const std::filesystem::path& path, const MelFile& file);
std::vector<std::uint8_t> encode_melb(const MelFile& file);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace pavoc
