#include "cftrack/fusion.hpp"

#include "cftrack/error.hpp"

namespace cftrack {

template <typename T>
AttentionMLP<T> AttentionMLP<T>::build(ParameterSet<T>& params, int channels, int hidden, Rng& rng) {
  AttentionMLP mlp;
  mlp.fc1 = LinearLayer<T>::build(params, "fusion.fc1", channels, hidden, rng);
  mlp.fc2.weight = params.add_uniform("fusion.fc2.weight", {channels, hidden}, hidden, rng);
  mlp.fc2.bias = params.add_constant("fusion.fc2.bias", {channels}, T(0));
  return mlp;
}

template <typename T>
Tensor<T> AttentionMLP<T>::gates(const Tensor<T>& pooled) const {
  return ops::sigmoid(fc2(ops::relu(fc1(pooled))));
}

template <typename T>
Tensor<T> pixelwise_correlation(const FeatureMap<T>& template_features, const FeatureMap<T>& search_features) {
  if (template_features.role != Role::kTemplate || search_features.role != Role::kSearch) {
    throw ShapeError("pixelwise_correlation expects (template, search) feature maps");
  }
  return ops::pixelwise_correlation(template_features.data, search_features.data);
}

template <typename T>
FusedMap<T> channel_attention(const Tensor<T>& fused, const AttentionMLP<T>& mlp) {
  const int channels = mlp.fc2.weight.dim(0);
  if (fused.rank() != 3 || fused.dim(0) != channels) {
    throw ShapeError("channel_attention: expected " + std::to_string(channels) + " channels, got " +
                     shape_to_string(fused.shape()));
  }
  Tensor<T> gates = mlp.gates(ops::global_avg_pool(fused));
  return FusedMap<T>{ops::scale_channels(fused, gates)};
}

template struct AttentionMLP<float>;
template struct AttentionMLP<double>;
template Tensor<float> pixelwise_correlation(const FeatureMap<float>&, const FeatureMap<float>&);
template Tensor<double> pixelwise_correlation(const FeatureMap<double>&, const FeatureMap<double>&);
template FusedMap<float> channel_attention(const Tensor<float>&, const AttentionMLP<float>&);
template FusedMap<double> channel_attention(const Tensor<double>&, const AttentionMLP<double>&);

}  // namespace cftrack
