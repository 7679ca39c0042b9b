#include "cftrack/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "cftrack/error.hpp"

namespace cftrack {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError("key '" + std::string(key) + "': expected " + expected + ", got '" + std::string(value) + "'");
}

template <typename Int>
Int parse_integer(std::string_view key, std::string_view v) {
  Int out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad_value(key, v, "an integer");
  return out;
}

double parse_real(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad_value(key, v, "a number");
  return out;
}

bool parse_flag(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

std::vector<int> parse_list(std::string_view key, std::string_view v) {
  std::vector<int> out;
  if (v.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = v.find(',', start);
    out.push_back(parse_integer<int>(key, trim(v.substr(start, pos == std::string_view::npos ? pos : pos - start))));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"train.epochs", [](RunConfig& c, auto k, auto v) { c.train.epochs = parse_integer<int>(k, v); }},
      {"train.samples_per_epoch",
       [](RunConfig& c, auto k, auto v) { c.train.samples_per_epoch = parse_integer<int>(k, v); }},
      {"train.batch_size", [](RunConfig& c, auto k, auto v) { c.train.batch_size = parse_integer<int>(k, v); }},
      {"train.learning_rate", [](RunConfig& c, auto k, auto v) { c.train.learning_rate = parse_real(k, v); }},
      {"train.weight_decay", [](RunConfig& c, auto k, auto v) { c.train.weight_decay = parse_real(k, v); }},
      {"train.lr_decay", [](RunConfig& c, auto k, auto v) { c.train.lr_decay = parse_real(k, v); }},
      {"train.milestones", [](RunConfig& c, auto k, auto v) { c.train.milestones = parse_list(k, v); }},
      {"train.negative_fraction", [](RunConfig& c, auto k, auto v) { c.train.negative_fraction = parse_real(k, v); }},
      {"train.augment", [](RunConfig& c, auto k, auto v) { c.train.augment = parse_flag(k, v); }},
      {"train.center_jitter", [](RunConfig& c, auto k, auto v) { c.train.center_jitter = parse_real(k, v); }},
      {"train.scale_jitter", [](RunConfig& c, auto k, auto v) { c.train.scale_jitter = parse_real(k, v); }},
      {"train.seed", [](RunConfig& c, auto k, auto v) { c.train.seed = parse_integer<std::uint64_t>(k, v); }},
      {"loss.lambda1", [](RunConfig& c, auto k, auto v) { c.train.weights.cls = parse_real(k, v); }},
      {"loss.lambda2", [](RunConfig& c, auto k, auto v) { c.train.weights.reg = parse_real(k, v); }},
      {"loss.lambda3", [](RunConfig& c, auto k, auto v) { c.train.weights.adapt = parse_real(k, v); }},
      {"margin.m0", [](RunConfig& c, auto k, auto v) { c.train.margin.m0 = parse_real(k, v); }},
      {"margin.beta", [](RunConfig& c, auto k, auto v) { c.train.margin.beta = parse_real(k, v); }},
      {"margin.gamma", [](RunConfig& c, auto k, auto v) { c.train.margin.gamma = parse_real(k, v); }},
      {"tracker.presence_threshold",
       [](RunConfig& c, auto k, auto v) { c.tracker.presence_threshold = parse_real(k, v); }},
      {"tracker.use_cfm", [](RunConfig& c, auto k, auto v) { c.tracker.use_cfm = parse_flag(k, v); }},
      {"scene.frame_width", [](RunConfig& c, auto k, auto v) { c.scene.frame_width = parse_integer<int>(k, v); }},
      {"scene.frame_height", [](RunConfig& c, auto k, auto v) { c.scene.frame_height = parse_integer<int>(k, v); }},
      {"scene.length", [](RunConfig& c, auto k, auto v) { c.scene.length = parse_integer<int>(k, v); }},
      {"scene.num_distractors",
       [](RunConfig& c, auto k, auto v) { c.scene.num_distractors = parse_integer<int>(k, v); }},
      {"scene.occluder_enabled", [](RunConfig& c, auto k, auto v) { c.scene.occluder_enabled = parse_flag(k, v); }},
      {"scene.occlusion_events",
       [](RunConfig& c, auto k, auto v) { c.scene.occlusion_events = parse_integer<int>(k, v); }},
      {"scene.exit_events", [](RunConfig& c, auto k, auto v) { c.scene.exit_events = parse_integer<int>(k, v); }},
      {"scene.motion_noise", [](RunConfig& c, auto k, auto v) { c.scene.motion_noise = parse_real(k, v); }},
      {"scene.target_min_size", [](RunConfig& c, auto k, auto v) { c.scene.target_min_size = parse_real(k, v); }},
      {"scene.target_max_size", [](RunConfig& c, auto k, auto v) { c.scene.target_max_size = parse_real(k, v); }},
      {"gradcheck.h", [](RunConfig& c, auto k, auto v) { c.gradcheck.h = parse_real(k, v); }},
      {"gradcheck.tolerance", [](RunConfig& c, auto k, auto v) { c.gradcheck.tolerance = parse_real(k, v); }},
      {"gradcheck.samples",
       [](RunConfig& c, auto k, auto v) { c.gradcheck.samples_per_tensor = parse_integer<std::size_t>(k, v); }},
      {"gradcheck.scale_floor", [](RunConfig& c, auto k, auto v) { c.gradcheck.scale_floor = parse_real(k, v); }},
      {"gradcheck.seed", [](RunConfig& c, auto k, auto v) { c.gradcheck.seed = parse_integer<std::uint64_t>(k, v); }},
      {"model.seed", [](RunConfig& c, auto k, auto v) { c.model_seed = parse_integer<std::uint64_t>(k, v); }},
  };
  return table;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  it->second(*this, key, value);
}

void RunConfig::validate() const {
  train.validate();
  tracker.validate();
  scene.validate();
  if (!(gradcheck.h > 0.0) || !(gradcheck.tolerance > 0.0) || gradcheck.samples_per_tensor == 0 ||
      !(gradcheck.scale_floor >= 0.0)) {
    throw ConfigError("gradcheck: h, tolerance and samples must be positive, scale_floor non-negative");
  }
}

std::vector<std::string> RunConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : setters()) out.push_back(k);
  return out;
}

RunConfig parse_run_config(std::string_view text, const std::string& origin) {
  RunConfig cfg;
  std::size_t start = 0;
  int number = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++number;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected key=value, got '" + std::string(line) + "'");
    }
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

}  // namespace cftrack
