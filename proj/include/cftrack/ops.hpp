#pragma once

#include <cstdint>
#include <vector>

#include "cftrack/tensor.hpp"

// Differentiable operators used by the tracker network. Every operator
// records a backward closure when any input requires grad and grad mode is on.
namespace cftrack::ops {

enum class Activation { kRelu, kSigmoid };

// input [Cin,H,W], kernel [Cout,Cin,k,k], bias [Cout] -> [Cout,H',W'] with
// H' = (H + 2*padding - k) / stride + 1. Zero padding.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias, int stride,
                 int padding);

// One k x k filter per channel: kernel [C,1,k,k], bias [C].
template <typename T>
Tensor<T> depthwise_conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                           int stride, int padding);

// pointwise(depthwise(input)); pointwise kernel is [Cout,Cin,1,1].
template <typename T>
Tensor<T> depthwise_separable_conv(const Tensor<T>& input, const Tensor<T>& depthwise_kernel,
                                   const Tensor<T>& depthwise_bias, const Tensor<T>& pointwise_kernel,
                                   const Tensor<T>& pointwise_bias, int stride, int padding);

// weight [M,N] * input(N values) + bias [M] -> [M]
template <typename T>
Tensor<T> fully_connected(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
Tensor<T> activation(const Tensor<T>& input, Activation kind);

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  return activation(input, Activation::kRelu);
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& input) {
  return activation(input, Activation::kSigmoid);
}

// [C,H,W] -> [C]
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input);

// out[c,:,:] = gates[c] * input[c,:,:]
template <typename T>
Tensor<T> scale_channels(const Tensor<T>& input, const Tensor<T>& gates);

// Spatial window [C, rows, cols] starting at (row, col); must lie inside input.
template <typename T>
Tensor<T> crop_window(const Tensor<T>& input, int row, int col, int rows, int cols);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T factor);

// 1 - a, elementwise
template <typename T>
Tensor<T> one_minus(const Tensor<T>& a);

template <typename T>
Tensor<T> sum(const Tensor<T>& a);

template <typename T>
Tensor<T> mean(const Tensor<T>& a);

// sum_i weights[i] * terms[i] over scalar terms
template <typename T>
Tensor<T> weighted_sum(const std::vector<Tensor<T>>& terms, const std::vector<T>& weights);

// out[k,i,j] = sum_c template_features[c, k / wz, k % wz] * search_features[c,i,j]
template <typename T>
Tensor<T> pixelwise_correlation(const Tensor<T>& template_features, const Tensor<T>& search_features);

// Counts multiply-accumulates performed by operators on this thread while alive.
class MacCounter {
 public:
  MacCounter();
  ~MacCounter();
  MacCounter(const MacCounter&) = delete;
  MacCounter& operator=(const MacCounter&) = delete;

  std::uint64_t count() const;

 private:
  std::uint64_t start_;
  bool was_active_;
};

namespace detail {
void add_macs(std::uint64_t n);
}

}  // namespace cftrack::ops
