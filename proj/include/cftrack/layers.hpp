#pragma once

#include <string>

#include "cftrack/ops.hpp"
#include "cftrack/params.hpp"

namespace cftrack {

// He-uniform gain for relu convolution weights.
inline constexpr double kConvInitGain = 2.449489742783178;  // sqrt(6)
// The depthwise half of a separable layer has no activation of its own.
inline constexpr double kDepthwiseInitGain = 1.7320508075688772;  // sqrt(3)

template <typename T>
struct ConvLayer {
  Tensor<T> weight;  // [Cout,Cin,k,k]
  Tensor<T> bias;    // [Cout]
  int stride = 1;
  int padding = 0;

  static ConvLayer build(ParameterSet<T>& params, const std::string& name, int in, int out, int k, int stride,
                         Rng& rng) {
    ConvLayer layer;
    const int fan_in = in * k * k;
    layer.weight = params.add_uniform(name + ".weight", {out, in, k, k}, fan_in, rng, kConvInitGain);
    layer.bias = params.add_uniform(name + ".bias", {out}, fan_in, rng);
    layer.stride = stride;
    layer.padding = k / 2;
    return layer;
  }

  Tensor<T> operator()(const Tensor<T>& x) const { return ops::conv2d(x, weight, bias, stride, padding); }
};

template <typename T>
struct SeparableConvLayer {
  Tensor<T> depthwise_weight;  // [Cin,1,k,k]
  Tensor<T> depthwise_bias;    // [Cin]
  Tensor<T> pointwise_weight;  // [Cout,Cin,1,1]
  Tensor<T> pointwise_bias;    // [Cout]
  int stride = 1;
  int padding = 0;

  static SeparableConvLayer build(ParameterSet<T>& params, const std::string& name, int in, int out, int k,
                                  int stride, Rng& rng, double pointwise_gain = kConvInitGain) {
    SeparableConvLayer layer;
    layer.depthwise_weight = params.add_uniform(name + ".dw.weight", {in, 1, k, k}, k * k, rng, kDepthwiseInitGain);
    layer.depthwise_bias = params.add_uniform(name + ".dw.bias", {in}, k * k, rng);
    layer.pointwise_weight = params.add_uniform(name + ".pw.weight", {out, in, 1, 1}, in, rng, pointwise_gain);
    layer.pointwise_bias = params.add_uniform(name + ".pw.bias", {out}, in, rng);
    layer.stride = stride;
    layer.padding = k / 2;
    return layer;
  }

  Tensor<T> operator()(const Tensor<T>& x) const {
    return ops::depthwise_separable_conv(x, depthwise_weight, depthwise_bias, pointwise_weight, pointwise_bias,
                                         stride, padding);
  }
};

template <typename T>
struct LinearLayer {
  Tensor<T> weight;  // [out,in]
  Tensor<T> bias;    // [out]

  static LinearLayer build(ParameterSet<T>& params, const std::string& name, int in, int out, Rng& rng) {
    LinearLayer layer;
    layer.weight = params.add_uniform(name + ".weight", {out, in}, in, rng);
    layer.bias = params.add_uniform(name + ".bias", {out}, in, rng);
    return layer;
  }

  Tensor<T> operator()(const Tensor<T>& x) const { return ops::fully_connected(x, weight, bias); }
};

}  // namespace cftrack
