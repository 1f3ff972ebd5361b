#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pavoc/mel.hpp"

namespace pavoc::wire {

// External predictor protocol over a child's stdin/stdout. Integers are u32
// little-endian, floats f32 little-endian.
//
//   handshake  client: "EPRD" u32 version     server: "EPOK" u32 version
//   request    "ERQ1" f32 noise_level u32 n  n*f32 y_t
//              u32 frames u32 bands u32 log_flag  frames*bands*f32 mel
//   response   "ERS1" u32 n  n*f32 eps_hat

inline constexpr std::uint32_t kProtocolVersion = 1;
inline constexpr char kHandshakeMagic[] = "EPRD";
inline constexpr char kHandshakeReplyMagic[] = "EPOK";
inline constexpr char kRequestMagic[] = "ERQ1";
inline constexpr char kResponseMagic[] = "ERS1";

struct Request {
  float noise_level = 0.0f;
  std::vector<float> y_t;
  std::uint32_t frames = 0;
  std::uint32_t bands = 0;
  bool log_mel = false;
  std::vector<float> mel;  // frames*bands, frame-major
};

std::vector<std::uint8_t> encode_handshake(std::uint32_t version = kProtocolVersion);
std::vector<std::uint8_t> encode_handshake_reply(std::uint32_t version = kProtocolVersion);
/// Returns the version; throws ProtocolError on bad magic or truncation.
std::uint32_t decode_handshake(std::span<const std::uint8_t> bytes);
std::uint32_t decode_handshake_reply(std::span<const std::uint8_t> bytes);

/// Builds a request from float64 state. The mel is log10(max(., 1e-5))
/// compressed when `log_mel` is set.
Request make_request(std::span<const double> y_t, const MelSpectrogram& mel, double noise_level, bool log_mel);

std::vector<std::uint8_t> encode_request(const Request& request);
Request decode_request(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_response(std::span<const float> eps_hat);
std::vector<float> decode_response(std::span<const std::uint8_t> bytes);

}  // namespace pavoc::wire
