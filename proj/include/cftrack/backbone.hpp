#pragma once

#include <cstdint>
#include <vector>

#include "cftrack/layers.hpp"

namespace cftrack {

// Shared-weight feature extractor: a stem convolution followed by
// depthwise-separable stages, cumulative stride 16.
struct BackboneConfig {
  std::vector<int> widths{16, 24, 32, 64};
  std::vector<int> kernels{3, 3, 3, 3};
  std::vector<int> strides{2, 2, 2, 2};
  int input_channels = 3;
  int template_size = 144;
  int search_size = 272;

  // Throws ConfigError when the stage lists disagree, the cumulative stride
  // is not 16, or the input sizes do not give 9x9 / 17x17 feature maps.
  void validate() const;
  int total_stride() const;
  int output_channels() const { return widths.back(); }
  // Spatial size after the stage stack for an input of `size` pixels.
  int feature_size(int size) const;
  int template_feature_size() const { return feature_size(template_size); }
  int search_feature_size() const { return feature_size(search_size); }
};

enum class Role { kTemplate, kSearch };

const char* to_string(Role role);

template <typename T>
struct FeatureMap {
  Role role;
  Tensor<T> data;  // [C,H,W]
};

template <typename T>
class Backbone {
 public:
  static Backbone build(const BackboneConfig& config, ParameterSet<T>& params, Rng& rng);

  // Runs the stage stack without checking the input size against a role.
  Tensor<T> forward(const Tensor<T>& image) const;

  // Input must be [3,144,144] for the template role, [3,272,272] for search.
  FeatureMap<T> extract_features(const Tensor<T>& image, Role role) const;

  const BackboneConfig& config() const { return config_; }
  const ConvLayer<T>& stem() const { return stem_; }
  const std::vector<SeparableConvLayer<T>>& stages() const { return stages_; }

 private:
  BackboneConfig config_;
  ConvLayer<T> stem_;
  std::vector<SeparableConvLayer<T>> stages_;
};

template <typename T>
struct BuiltBackbone {
  ParameterSet<T> params;
  Backbone<T> backbone;
};

// Standalone backbone with its own parameter set; deterministic per seed.
template <typename T>
BuiltBackbone<T> build_backbone(const BackboneConfig& config, std::uint64_t seed);

extern template class Backbone<float>;
extern template class Backbone<double>;
extern template BuiltBackbone<float> build_backbone(const BackboneConfig&, std::uint64_t);
extern template BuiltBackbone<double> build_backbone(const BackboneConfig&, std::uint64_t);

}  // namespace cftrack
