#include "cftrack/backbone.hpp"

#include "cftrack/error.hpp"

namespace cftrack {

const char* to_string(Role role) { return role == Role::kTemplate ? "template" : "search"; }

void BackboneConfig::validate() const {
  if (widths.empty() || widths.size() != kernels.size() || widths.size() != strides.size()) {
    throw ConfigError("backbone: widths, kernels and strides must have the same non-zero length");
  }
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] <= 0 || strides[i] < 1 || kernels[i] < 1 || kernels[i] % 2 == 0) {
      throw ConfigError("backbone: invalid stage " + std::to_string(i));
    }
  }
  if (total_stride() != 16) {
    throw ConfigError("backbone: cumulative stride must be 16, got " + std::to_string(total_stride()));
  }
  if (template_feature_size() != 9 || search_feature_size() != 17) {
    throw ConfigError("backbone: inputs " + std::to_string(template_size) + "/" + std::to_string(search_size) +
                      " give feature maps " + std::to_string(template_feature_size()) + "/" +
                      std::to_string(search_feature_size()) + ", expected 9/17");
  }
}

int BackboneConfig::total_stride() const {
  int s = 1;
  for (int v : strides) s *= v;
  return s;
}

int BackboneConfig::feature_size(int size) const {
  for (std::size_t i = 0; i < strides.size(); ++i) {
    const int k = kernels[i];
    size = (size + 2 * (k / 2) - k) / strides[i] + 1;
  }
  return size;
}

template <typename T>
Backbone<T> Backbone<T>::build(const BackboneConfig& config, ParameterSet<T>& params, Rng& rng) {
  config.validate();
  Backbone b;
  b.config_ = config;
  b.stem_ = ConvLayer<T>::build(params, "backbone.stem", config.input_channels, config.widths[0], config.kernels[0],
                                config.strides[0], rng);
  for (std::size_t i = 1; i < config.widths.size(); ++i) {
    b.stages_.push_back(SeparableConvLayer<T>::build(params, "backbone.stage" + std::to_string(i),
                                                     config.widths[i - 1], config.widths[i], config.kernels[i],
                                                     config.strides[i], rng));
  }
  return b;
}

template <typename T>
Tensor<T> Backbone<T>::forward(const Tensor<T>& image) const {
  Tensor<T> x = ops::relu(stem_(image));
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    x = stages_[i](x);
    // Last stage stays linear so correlation sees signed features.
    if (i + 1 < stages_.size()) x = ops::relu(x);
  }
  return x;
}

template <typename T>
FeatureMap<T> Backbone<T>::extract_features(const Tensor<T>& image, Role role) const {
  const int expected = role == Role::kTemplate ? config_.template_size : config_.search_size;
  if (image.rank() != 3 || image.dim(0) != config_.input_channels || image.dim(1) != expected ||
      image.dim(2) != expected) {
    throw ShapeError(std::string(to_string(role)) + " input must be (" + std::to_string(config_.input_channels) +
                     "," + std::to_string(expected) + "," + std::to_string(expected) + "), got " +
                     shape_to_string(image.shape()));
  }
  return FeatureMap<T>{role, forward(image)};
}

template <typename T>
BuiltBackbone<T> build_backbone(const BackboneConfig& config, std::uint64_t seed) {
  BuiltBackbone<T> out;
  Rng rng(seed);
  out.backbone = Backbone<T>::build(config, out.params, rng);
  return out;
}

template class Backbone<float>;
template class Backbone<double>;
template BuiltBackbone<float> build_backbone(const BackboneConfig&, std::uint64_t);
template BuiltBackbone<double> build_backbone(const BackboneConfig&, std::uint64_t);

}  // namespace cftrack
