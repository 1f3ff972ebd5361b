#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <csignal>
#include <cmath>
#include <thread>

#include "pavoc/audio_io.hpp"
#include "pavoc/errors.hpp"
#include "pavoc/external_predictor.hpp"
#include "pavoc/predictor.hpp"
#include "pavoc/rng.hpp"
#include "pavoc/sampler.hpp"
#include "pavoc/wire_protocol.hpp"
#include "support/test_signals.hpp"

using namespace pavoc;

namespace {

const std::string kLoopback = PAVOC_LOOPBACK_PREDICTOR;
const std::filesystem::path kData = PAVOC_TEST_DATA_DIR;

std::vector<std::uint8_t> fixture(const char* name) { return read_file_bytes(kData / name); }

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

double power(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s / static_cast<double>(v.size());
}

MelSpectrogram small_mel() { return MelSpectrogram(2, 3, {1, 2, 3, 4, 5, 6}); }

}  // namespace

TEST_CASE("oracle_predict") {
  const NoiseSchedule s({0.36});
  const MelSpectrogram mel = small_mel();
  const std::vector<double> y0{1.0}, y_t{2.0};
  CHECK(oracle_predict({y_t, mel, 0.8}, y0, s)[0] == doctest::Approx(2.0).epsilon(1e-15));
  const std::vector<double> clean{0.8};
  CHECK(oracle_predict({clean, mel, 0.8}, y0, s)[0] == 0.0);

  const auto g = NoiseSchedule::geometric();
  CounterRng rng(1);
  const auto x = rng.gaussian_vector(300), eps = rng.gaussian_vector(300);
  for (std::size_t t = 1; t <= g.steps(); ++t) {
    const auto y = forward_diffuse(x, t, eps, g);
    CHECK(rel_diff(oracle_predict({y, mel, g.noise_level(t)}, x, g), eps) < 1e-10);
  }

  CHECK_THROWS_AS(oracle_predict({y_t, mel, 1.0}, y0, s), std::invalid_argument);
  CHECK_THROWS_AS(oracle_predict({y_t, mel, 0.7}, y0, s), std::invalid_argument);
  CHECK_THROWS_AS(oracle_predict({y_t, mel, 0.0}, y0, s), std::invalid_argument);
  CHECK_THROWS_AS(oracle_predict({y_t, mel, 0.8}, std::vector<double>{1.0, 2.0}, s), std::invalid_argument);
}

TEST_CASE("degraded_oracle_predict") {
  const auto g = NoiseSchedule::geometric();
  const MelSpectrogram mel = small_mel();
  CounterRng rng(2);
  const auto x = rng.gaussian_vector(10000), eps = rng.gaussian_vector(10000);
  const auto y = forward_diffuse(x, 3, eps, g);
  const PredictorRequest request{y, mel, g.noise_level(3)};
  const auto exact = oracle_predict(request, x, g);

  CHECK(degraded_oracle_predict(request, x, g, kNoPerturbation, 5) == exact);
  const auto a = degraded_oracle_predict(request, x, g, 10.0, 5);
  CHECK(a == degraded_oracle_predict(request, x, g, 10.0, 5));
  CHECK(a != degraded_oracle_predict(request, x, g, 10.0, 6));
  CHECK(a != degraded_oracle_predict({y, mel, g.noise_level(4)}, x, g, 10.0, 5));

  std::vector<double> perturbation(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) perturbation[i] = a[i] - exact[i];
  CHECK(power(perturbation) / power(exact) == doctest::Approx(0.1).epsilon(0.05));

  const auto clean = forward_diffuse(x, 3, std::vector<double>(x.size(), 0.0), g);
  for (double v : degraded_oracle_predict({clean, mel, g.noise_level(3)}, x, g, 0.0, 5)) CHECK(v == 0.0);
}

TEST_CASE("wire frames match the golden fixtures") {
  CHECK(wire::encode_handshake() == fixture("handshake.bin"));
  CHECK(wire::encode_handshake_reply() == fixture("handshake_reply.bin"));
  CHECK(wire::decode_handshake(fixture("handshake.bin")) == 1u);

  wire::Request request;
  request.noise_level = 0.5f;
  request.y_t = {1.0f, -2.0f, 0.25f};
  request.frames = 2;
  request.bands = 2;
  request.mel = {0.0f, 1.0f, 2.0f, 3.0f};
  CHECK(wire::encode_request(request) == fixture("request.bin"));
  const auto decoded = wire::decode_request(fixture("request.bin"));
  CHECK(decoded.noise_level == 0.5f);
  CHECK(decoded.y_t == request.y_t);
  CHECK(decoded.frames == 2u);
  CHECK(decoded.bands == 2u);
  CHECK_FALSE(decoded.log_mel);
  CHECK(decoded.mel == request.mel);

  const std::vector<float> eps{0.5f, -1.5f, 3.0f};
  CHECK(wire::encode_response(eps) == fixture("response.bin"));
  CHECK(wire::decode_response(fixture("response.bin")) == eps);
}

TEST_CASE("malformed wire frames") {
  auto bytes = fixture("response.bin");
  bytes[0] = 'X';
  CHECK_THROWS_AS(wire::decode_response(bytes), ProtocolError);
  bytes = fixture("response.bin");
  bytes.pop_back();
  CHECK_THROWS_AS(wire::decode_response(bytes), ProtocolError);
  bytes = fixture("response.bin");
  bytes.push_back(0);
  CHECK_THROWS_AS(wire::decode_response(bytes), ProtocolError);
  bytes = fixture("request.bin");
  bytes[8] = 0xff;  // absurd sample count
  CHECK_THROWS_AS(wire::decode_request(bytes), ProtocolError);
  CHECK_THROWS_AS(wire::decode_handshake(fixture("handshake_reply.bin")), ProtocolError);
}

TEST_CASE("make_request applies log compression on request") {
  const MelSpectrogram mel(1, 2, {100.0, 0.0});
  const std::vector<double> y{0.125};
  const auto linear = wire::make_request(y, mel, 0.5, false);
  CHECK(linear.mel == std::vector<float>{100.0f, 0.0f});
  const auto logged = wire::make_request(y, mel, 0.5, true);
  CHECK(logged.log_mel);
  CHECK(logged.mel[0] == doctest::Approx(2.0));
  CHECK(logged.mel[1] == doctest::Approx(-5.0));
}

TEST_CASE("external predictor against the loopback server") {
  const MelSpectrogram mel = small_mel();
  const std::vector<double> y{0.1, 0.2, 0.3, 0.4};

  SUBCASE("zero mode") {
    ExternalPredictor p(kLoopback + " zero");
    CHECK(p.server_version() == 1u);
    CHECK(p.exclusive());
    const auto eps = external_predict({y, mel, 0.5}, p);
    CHECK(eps == std::vector<double>(4, 0.0));
    CHECK(p.predict({y, mel, 0.5}) == std::vector<double>(4, 0.0));
  }
  SUBCASE("oracle mode matches the in-process oracle") {
    const auto dir = pavoc::testing::scratch_dir("predictor_oracle");
    const auto x = pavoc::testing::make_utterance(3, 3000);
    write_wav(dir / "ref.wav", x, 22050);
    const auto reference = read_wav(dir / "ref.wav").samples;
    const auto g = NoiseSchedule::geometric();
    ExternalPredictor p(kLoopback + " oracle " + (dir / "ref.wav").string());
    CounterRng rng(4);
    for (int i = 0; i < 20; ++i) {
      const std::size_t t = 1 + static_cast<std::size_t>(i) % g.steps();
      std::vector<double> y_t = forward_diffuse(reference, t, rng.gaussian_vector(reference.size()), g);
      for (auto& v : y_t) v = static_cast<float>(v);
      const PredictorRequest request{y_t, mel, g.noise_level(t)};
      CHECK(rel_diff(p.predict(request), oracle_predict(request, reference, g)) < 1e-6);
    }
  }
  SUBCASE("server exiting mid-call") {
    ExternalPredictor p(kLoopback + " die");
    CHECK_THROWS_AS(p.predict({y, mel, 0.5}), PredictorUnavailable);
    CHECK_THROWS_AS(p.predict({y, mel, 0.5}), PredictorUnavailable);
  }
  SUBCASE("server killed while computing") {
    ExternalPredictor p("exec " + kLoopback + " hang");
    std::thread killer([pid = p.pid()] {
      std::this_thread::sleep_for(std::chrono::milliseconds(200));
      ::kill(pid, SIGKILL);
    });
    CHECK_THROWS_AS(p.predict({y, mel, 0.5}), PredictorUnavailable);
    killer.join();
  }
  SUBCASE("timeout") {
    ExternalPredictor p(kLoopback + " hang", {std::chrono::milliseconds(200), false});
    CHECK_THROWS_AS(p.predict({y, mel, 0.5}), PredictorUnavailable);
  }
  SUBCASE("unexpected magic") {
    ExternalPredictor p(kLoopback + " bad-magic");
    CHECK_THROWS_AS(p.predict({y, mel, 0.5}), ProtocolError);
    CHECK_THROWS_AS(p.predict({y, mel, 0.5}), PredictorUnavailable);
  }
  SUBCASE("wrong length") {
    ExternalPredictor p(kLoopback + " short");
    CHECK_THROWS_AS(p.predict({y, mel, 0.5}), ContractViolation);
  }
  SUBCASE("no handshake") {
    CHECK_THROWS_AS(ExternalPredictor(kLoopback + " silent"), PredictorUnavailable);
    CHECK_THROWS_AS(ExternalPredictor("/nonexistent/predictor"), PredictorUnavailable);
  }
}

TEST_CASE("generation aborts when the external predictor dies") {
  const auto stft_config = StftConfig::vocoder_default();
  const auto fb = build_mel_filterbank(128, stft_config);
  const auto x = pavoc::testing::make_utterance(5, 3000);
  const auto mel = pavoc::testing::mel_of(x, fb, stft_config);
  ExternalPredictor p(kLoopback + " die");
  SamplerConfig config;
  CHECK_THROWS_AS(generate(mel, fb, p, NoiseSchedule::geometric(), config, x.size()), PredictorUnavailable);
}
