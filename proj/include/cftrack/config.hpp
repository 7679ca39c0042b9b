#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cftrack/gradcheck.hpp"
#include "cftrack/synth.hpp"
#include "cftrack/tracker.hpp"
#include "cftrack/train.hpp"

namespace cftrack {

struct GradCheckSettings {
  double h = 3e-6;  // rounding noise grows below this, relu kink crossings above
  double tolerance = 1e-3;
  std::size_t samples_per_tensor = 20;
  std::uint64_t seed = 3;
  // Lower bound on the error denominator. Central differences of an O(1) loss
  // at h = 3e-6 resolve gradients only to ~1e-9, so below ~1e-5 the
  // relative error measures rounding rather than the backward pass.
  double scale_floor = 1e-5;
};

// Everything a run can be configured with. Keys are "<section>.<field>",
// e.g. train.epochs, loss.lambda3, margin.gamma, tracker.use_cfm,
// scene.num_distractors, model.seed.
struct RunConfig {
  TrainConfig train;
  TrackerConfig tracker;
  SyntheticSceneConfig scene;
  GradCheckSettings gradcheck;
  std::uint64_t model_seed = 7;

  // Throws ConfigError naming the key for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  void validate() const;
  std::vector<std::string> keys() const;
};

// '#' starts a comment; blank lines ignored. Values are validated on load.
RunConfig parse_run_config(std::string_view text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace cftrack
