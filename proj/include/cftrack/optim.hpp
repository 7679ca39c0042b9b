#pragma once

#include <cstdint>
#include <vector>

#include "cftrack/params.hpp"

namespace cftrack {

struct AdamWConfig {
  double learning_rate = 1e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamWConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

template <typename T>
OptimizerState make_optimizer_state(const ParameterSet<T>& params, const AdamWConfig& config);

// Decoupled-weight-decay Adam update using each parameter's accumulated grad:
//   param -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * param)
// A tensor whose gradient holds NaN/Inf is left untouched (moments too); after
// the remaining tensors are updated a NonFiniteGradientError names it.
template <typename T>
void adamw_step(ParameterSet<T>& params, OptimizerState& state);

extern template OptimizerState make_optimizer_state(const ParameterSet<float>&, const AdamWConfig&);
extern template OptimizerState make_optimizer_state(const ParameterSet<double>&, const AdamWConfig&);
extern template void adamw_step(ParameterSet<float>&, OptimizerState&);
extern template void adamw_step(ParameterSet<double>&, OptimizerState&);

}  // namespace cftrack
