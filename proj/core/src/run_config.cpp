#include "pavoc/run_config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pavoc/errors.hpp"

namespace pavoc {
namespace {

using nlohmann::json;

// Looks up "section.key" as a nested object member or a flat dotted key.
const json* find(const json& root, const std::string& section, const std::string& key) {
  if (auto it = root.find(section); it != root.end() && it->is_object())
    if (auto inner = it->find(key); inner != it->end()) return &*inner;
  if (auto flat = root.find(section + "." + key); flat != root.end()) return &*flat;
  return nullptr;
}

template <typename T>
void read(const json& root, const std::string& section, const std::string& key, T& out) {
  const json* value = find(root, section, key);
  if (!value) return;
  try {
    out = value->get<T>();
  } catch (const json::exception& e) {
    throw ConfigurationError("config key " + section + "." + key + ": " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  sampler.validate(schedule);
  if (!sampler.stft.satisfies_cola())
    throw ConfigurationError("STFT window/hop pair violates constant overlap-add");
  if (mel_bands == 0 || mel_bands >= sampler.stft.bins())
    throw ConfigurationError("mel.bands must lie in [1, " + std::to_string(sampler.stft.bins() - 1) + "]");
  const double nyquist = sampler.stft.sample_rate / 2.0;
  const double top = f_max < 0 ? nyquist : f_max;
  if (f_min < 0 || top <= f_min || top > nyquist)
    throw ConfigurationError("mel frequency range must satisfy 0 <= f_min < f_max <= sample_rate/2");
}

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("config: top level must be an object");

  RunConfig config;
  if (const json* betas = find(root, "schedule", "betas")) {
    std::vector<double> values;
    try {
      values = betas->get<std::vector<double>>();
    } catch (const json::exception& e) {
      throw ConfigurationError(std::string("config key schedule.betas: ") + e.what());
    }
    try {
      config.schedule = NoiseSchedule(std::move(values));
    } catch (const std::invalid_argument& e) {
      throw ConfigurationError(e.what());
    }
  }

  auto& s = config.sampler;
  std::string variant(to_string(s.variant)), sigma(to_string(s.sigma_mode));
  read(root, "sampler", "variant", variant);
  read(root, "sampler", "sigma_mode", sigma);
  s.variant = parse_variant(variant);
  s.sigma_mode = parse_sigma_mode(sigma);
  read(root, "sampler", "stage1_end", s.stage1_end);
  read(root, "sampler", "seed", s.seed);

  std::string gla_variant = s.gla.variant == GlaVariant::fast ? "fast" : "classic";
  read(root, "gla", "iterations", s.gla.iterations);
  read(root, "gla", "momentum", s.gla.momentum);
  read(root, "gla", "variant", gla_variant);
  if (gla_variant == "fast") s.gla.variant = GlaVariant::fast;
  else if (gla_variant == "classic") s.gla.variant = GlaVariant::classic;
  else throw ConfigurationError("config key gla.variant: unknown value '" + gla_variant + "'");

  read(root, "stft", "n_fft", s.stft.n_fft);
  read(root, "stft", "win_length", s.stft.win_length);
  read(root, "stft", "hop_length", s.stft.hop_length);
  read(root, "mel", "bands", config.mel_bands);
  read(root, "mel", "f_min", config.f_min);
  read(root, "mel", "f_max", config.f_max);

  try {
    s.gla.validate();
    s.stft.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigurationError(e.what());
  }
  config.validate();
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

std::string to_json(const RunConfig& config) {
  const auto& s = config.sampler;
  json root;
  root["schedule"]["betas"] = config.schedule.betas();
  root["sampler"]["variant"] = std::string(to_string(s.variant));
  root["sampler"]["sigma_mode"] = std::string(to_string(s.sigma_mode));
  root["sampler"]["stage1_end"] = s.stage1_end;
  root["sampler"]["seed"] = s.seed;
  root["gla"]["iterations"] = s.gla.iterations;
  root["gla"]["momentum"] = s.gla.momentum;
  root["gla"]["variant"] = s.gla.variant == GlaVariant::fast ? "fast" : "classic";
  root["stft"]["n_fft"] = s.stft.n_fft;
  root["stft"]["win_length"] = s.stft.win_length;
  root["stft"]["hop_length"] = s.stft.hop_length;
  root["mel"]["bands"] = config.mel_bands;
  root["mel"]["f_min"] = config.f_min;
  root["mel"]["f_max"] = config.f_max;
  return root.dump(2);
}

}  // namespace pavoc
