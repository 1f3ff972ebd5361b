#include "pavoc/wire_protocol.hpp"

#include <string>

#include "pavoc/byte_io.hpp"
#include "pavoc/errors.hpp"

namespace pavoc::wire {
namespace {

using Reader = ByteReader<ProtocolError>;

void expect_magic(Reader& reader, const char* magic) {
  const std::string got = reader.magic();
  if (got != magic) throw ProtocolError("expected magic " + std::string(magic) + ", got '" + got + "'");
}

void expect_consumed(const Reader& reader) {
  if (reader.remaining() != 0) throw ProtocolError(std::to_string(reader.remaining()) + " trailing bytes after frame");
}

// Rejects element counts that cannot fit in the remaining bytes before allocating.
std::size_t checked_count(const Reader& reader, std::size_t count) {
  if (count > reader.remaining() / 4)
    throw ProtocolError("frame announces " + std::to_string(count) + " floats but only " +
                        std::to_string(reader.remaining()) + " bytes follow");
  return count;
}

std::vector<std::uint8_t> encode_tagged_version(const char* magic, std::uint32_t version) {
  ByteWriter w;
  w.magic(magic);
  w.u32(version);
  return w.take();
}

std::uint32_t decode_tagged_version(std::span<const std::uint8_t> bytes, const char* magic) {
  Reader reader(bytes);
  expect_magic(reader, magic);
  const auto version = reader.u32();
  expect_consumed(reader);
  return version;
}

}  // namespace

std::vector<std::uint8_t> encode_handshake(std::uint32_t version) { return encode_tagged_version(kHandshakeMagic, version); }
std::vector<std::uint8_t> encode_handshake_reply(std::uint32_t version) {
  return encode_tagged_version(kHandshakeReplyMagic, version);
}
std::uint32_t decode_handshake(std::span<const std::uint8_t> bytes) { return decode_tagged_version(bytes, kHandshakeMagic); }
std::uint32_t decode_handshake_reply(std::span<const std::uint8_t> bytes) {
  return decode_tagged_version(bytes, kHandshakeReplyMagic);
}

Request make_request(std::span<const double> y_t, const MelSpectrogram& mel, double noise_level, bool log_mel) {
  Request request;
  request.noise_level = static_cast<float>(noise_level);
  request.y_t.assign(y_t.begin(), y_t.end());
  request.frames = static_cast<std::uint32_t>(mel.frames());
  request.bands = static_cast<std::uint32_t>(mel.bands());
  request.log_mel = log_mel;
  const MelSpectrogram payload = log_mel ? log_compress(mel) : mel;
  request.mel.assign(payload.values().begin(), payload.values().end());
  return request;
}

std::vector<std::uint8_t> encode_request(const Request& request) {
  if (request.mel.size() != static_cast<std::size_t>(request.frames) * request.bands)
    throw std::invalid_argument("encode_request: mel payload does not match frames*bands");
  ByteWriter w;
  w.magic(kRequestMagic);
  w.f32(request.noise_level);
  w.u32(static_cast<std::uint32_t>(request.y_t.size()));
  for (float v : request.y_t) w.f32(v);
  w.u32(request.frames);
  w.u32(request.bands);
  w.u32(request.log_mel ? 1u : 0u);
  for (float v : request.mel) w.f32(v);
  return w.take();
}

Request decode_request(std::span<const std::uint8_t> bytes) {
  Reader reader(bytes);
  expect_magic(reader, kRequestMagic);
  Request request;
  request.noise_level = reader.f32();
  request.y_t.resize(checked_count(reader, reader.u32()));
  for (auto& v : request.y_t) v = reader.f32();
  request.frames = reader.u32();
  request.bands = reader.u32();
  const auto flag = reader.u32();
  if (flag > 1) throw ProtocolError("log flag must be 0 or 1, got " + std::to_string(flag));
  request.log_mel = flag == 1;
  request.mel.resize(checked_count(reader, static_cast<std::size_t>(request.frames) * request.bands));
  for (auto& v : request.mel) v = reader.f32();
  expect_consumed(reader);
  return request;
}

std::vector<std::uint8_t> encode_response(std::span<const float> eps_hat) {
  ByteWriter w;
  w.magic(kResponseMagic);
  w.u32(static_cast<std::uint32_t>(eps_hat.size()));
  for (float v : eps_hat) w.f32(v);
  return w.take();
}

std::vector<float> decode_response(std::span<const std::uint8_t> bytes) {
  Reader reader(bytes);
  expect_magic(reader, kResponseMagic);
  std::vector<float> eps(checked_count(reader, reader.u32()));
  for (auto& v : eps) v = reader.f32();
  expect_consumed(reader);
  return eps;
}

}  // namespace pavoc::wire
