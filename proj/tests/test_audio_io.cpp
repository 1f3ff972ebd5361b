#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pavoc/audio_io.hpp"
#include "pavoc/byte_io.hpp"
#include "pavoc/errors.hpp"
#include "support/test_signals.hpp"

using namespace pavoc;

namespace {

std::vector<std::uint8_t> pcm16_wav(const std::vector<std::int16_t>& samples, unsigned rate, unsigned channels = 1) {
  ByteWriter w;
  w.magic("RIFF");
  w.u32(36 + static_cast<std::uint32_t>(samples.size() * 2));
  w.magic("WAVE");
  w.magic("fmt ");
  w.u32(16);
  w.u16(1);
  w.u16(static_cast<std::uint16_t>(channels));
  w.u32(rate);
  w.u32(rate * 2 * channels);
  w.u16(static_cast<std::uint16_t>(2 * channels));
  w.u16(16);
  w.magic("LIST");  // unrelated chunk must be skipped
  w.u32(3);
  w.raw(std::vector<std::uint8_t>{1, 2, 3, 0});
  w.magic("data");
  w.u32(static_cast<std::uint32_t>(samples.size() * 2));
  for (auto s : samples) w.u16(static_cast<std::uint16_t>(s));
  return w.take();
}

}  // namespace

TEST_CASE("float32 WAV round trip preserves samples to float precision") {
  const auto x = pavoc::testing::random_signal(1, 1000, 0.3);
  const auto wav = decode_wav(encode_wav(x, 24000));
  CHECK(wav.sample_rate == 24000);
  REQUIRE(wav.samples.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(wav.samples[i] == static_cast<double>(static_cast<float>(x[i])));
}

TEST_CASE("PCM16 WAV decoding") {
  const auto wav = decode_wav(pcm16_wav({0, 16384, -32768, 32767}, 22050));
  CHECK(wav.sample_rate == 22050);
  REQUIRE(wav.samples.size() == 4);
  CHECK(wav.samples[0] == 0.0);
  CHECK(wav.samples[1] == 0.5);
  CHECK(wav.samples[2] == -1.0);
  CHECK(wav.samples[3] == doctest::Approx(32767.0 / 32768.0));
}

TEST_CASE("unsupported WAV inputs") {
  CHECK_THROWS_AS(decode_wav(pcm16_wav({0, 1}, 44100)), ParseError);
  CHECK_THROWS_AS(decode_wav(pcm16_wav({0, 1, 2, 3}, 22050, 2)), ParseError);
  CHECK_THROWS_AS(decode_wav(std::vector<std::uint8_t>{'R', 'I', 'F', 'F'}), ParseError);
  auto bytes = encode_wav(std::vector<double>(4, 0.0), 22050);
  bytes[0] = 'X';
  CHECK_THROWS_AS(decode_wav(bytes), ParseError);
}

TEST_CASE("MELB layout is bit exact") {
  MelFile file;
  file.mel = MelSpectrogram(2, 3, {0.0, 1.0, 2.0, 3.0, 0.5, 0.25});
  file.sample_rate = 22050.0f;
  file.hop_length = 300;
  const auto bytes = encode_melb(file);
  // Header: magic, version, frames, bands, sample_rate (f32 22050 = 0x46AC4400), hop.
  const std::vector<std::uint8_t> header = {'M', 'E', 'L', 'B', 1, 0, 0, 0, 2, 0, 0, 0, 3, 0, 0, 0,
                                            0x00, 0x44, 0xAC, 0x46, 0x2C, 0x01, 0, 0};
  REQUIRE(bytes.size() == header.size() + 6 * 4);
  CHECK(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 24) == header);
  // second value 1.0f = 0x3F800000
  CHECK(bytes[28] == 0x00);
  CHECK(bytes[31] == 0x3F);
  CHECK(bytes[30] == 0x80);

  const auto back = decode_melb(bytes);
  CHECK(back.hop_length == 300);
  CHECK(back.sample_rate == 22050.0f);
  CHECK(RealMatrix(back.mel) == RealMatrix(file.mel));
}

TEST_CASE("MELB parse errors") {
  MelFile file;
  file.mel = MelSpectrogram(1, 2, {1.0, 2.0});
  auto bytes = encode_melb(file);
  auto truncated = bytes;
  truncated.pop_back();
  CHECK_THROWS_AS(decode_melb(truncated), ParseError);
  auto bad_magic = bytes;
  bad_magic[3] = 'X';
  CHECK_THROWS_AS(decode_melb(bad_magic), ParseError);
  auto bad_version = bytes;
  bad_version[4] = 2;
  CHECK_THROWS_AS(decode_melb(bad_version), ParseError);
  file.mel(0, 0) = -1.0;
  CHECK_THROWS_AS(decode_melb(encode_melb(file)), ParseError);
  CHECK_THROWS_AS(read_melb("/nonexistent/file.melb"), ParseError);
}
