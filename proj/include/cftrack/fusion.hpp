#pragma once

#include "cftrack/backbone.hpp"

namespace cftrack {

// Pixel-wise correlation map after channel attention: one channel per
// template position (81), spatial size of the search features (17x17).
template <typename T>
struct FusedMap {
  Tensor<T> data;
};

// Squeeze-excitation style gate: v' = sigmoid(W2 relu(W1 v + b1) + b2).
template <typename T>
struct AttentionMLP {
  LinearLayer<T> fc1;  // [hidden, channels]
  LinearLayer<T> fc2;  // [channels, hidden]

  // fc2's bias starts at zero so the initial gates sit near 0.5.
  static AttentionMLP build(ParameterSet<T>& params, int channels, int hidden, Rng& rng);

  Tensor<T> gates(const Tensor<T>& pooled) const;
};

// out[k,i,j] = sum_c F_z[c, k / 9, k % 9] * F_x[c,i,j]
template <typename T>
Tensor<T> pixelwise_correlation(const FeatureMap<T>& template_features, const FeatureMap<T>& search_features);

// Pools each channel, computes the gate vector and rescales each channel by it.
template <typename T>
FusedMap<T> channel_attention(const Tensor<T>& fused, const AttentionMLP<T>& mlp);

template <typename T>
FusedMap<T> fuse(const FeatureMap<T>& template_features, const FeatureMap<T>& search_features,
                 const AttentionMLP<T>& mlp) {
  return channel_attention(pixelwise_correlation(template_features, search_features), mlp);
}

extern template struct AttentionMLP<float>;
extern template struct AttentionMLP<double>;
extern template Tensor<float> pixelwise_correlation(const FeatureMap<float>&, const FeatureMap<float>&);
extern template Tensor<double> pixelwise_correlation(const FeatureMap<double>&, const FeatureMap<double>&);
extern template FusedMap<float> channel_attention(const Tensor<float>&, const AttentionMLP<float>&);
extern template FusedMap<double> channel_attention(const Tensor<double>&, const AttentionMLP<double>&);

}  // namespace cftrack
