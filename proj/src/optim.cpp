#include "cftrack/optim.hpp"

#include <cmath>

#include "cftrack/error.hpp"

namespace cftrack {

template <typename T>
OptimizerState make_optimizer_state(const ParameterSet<T>& params, const AdamWConfig& config) {
  OptimizerState state;
  state.config = config;
  for (const auto& e : params.entries()) {
    state.first_moment.emplace_back(e.tensor.numel(), 0.0);
    state.second_moment.emplace_back(e.tensor.numel(), 0.0);
  }
  return state;
}

template <typename T>
void adamw_step(ParameterSet<T>& params, OptimizerState& state) {
  auto& entries = params.entries();
  if (state.first_moment.size() != entries.size()) {
    throw ShapeError("adamw_step: optimizer state tracks " + std::to_string(state.first_moment.size()) +
                     " tensors, parameter set has " + std::to_string(entries.size()));
  }
  const AdamWConfig& cfg = state.config;
  const std::uint64_t t = state.step + 1;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));

  std::vector<std::string> rejected;
  for (std::size_t p = 0; p < entries.size(); ++p) {
    Tensor<T>& param = entries[p].tensor;
    auto& m = state.first_moment[p];
    auto& v = state.second_moment[p];
    if (m.size() != param.numel() || v.size() != param.numel()) {
      throw ShapeError("adamw_step: moment buffers for '" + entries[p].name + "' do not match parameter shape " +
                       shape_to_string(param.shape()));
    }
    auto grad = param.grad();
    bool finite = true;
    for (T g : grad) finite = finite && std::isfinite(g);
    if (!finite) {
      rejected.push_back(entries[p].name);
      continue;
    }
    auto data = param.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = grad[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      const double x = data[i];
      data[i] = static_cast<T>(x - cfg.learning_rate * (m_hat / (std::sqrt(v_hat) + cfg.epsilon) + cfg.weight_decay * x));
    }
  }
  state.step = t;
  if (!rejected.empty()) {
    std::string names;
    for (const auto& n : rejected) names += (names.empty() ? "" : ", ") + n;
    throw NonFiniteGradientError(rejected.front(), "non-finite gradient; update rejected for: " + names);
  }
}

template OptimizerState make_optimizer_state(const ParameterSet<float>&, const AdamWConfig&);
template OptimizerState make_optimizer_state(const ParameterSet<double>&, const AdamWConfig&);
template void adamw_step(ParameterSet<float>&, OptimizerState&);
template void adamw_step(ParameterSet<double>&, OptimizerState&);

}  // namespace cftrack
