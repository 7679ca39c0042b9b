#include "cftrack/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cftrack/rng.hpp"

namespace cftrack {

double relative_error(double analytic, double numeric, double scale_floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), scale_floor});
  return std::abs(analytic - numeric) / scale;
}

template <typename T>
GradCheckReport finite_diff_check(const std::function<Tensor<T>()>& loss_fn, ParameterSet<T>& params,
                                  const GradCheckOptions<T>& options) {
  params.zero_grad();
  loss_fn().backward();
  if (options.after_backward) options.after_backward(params);

  GradCheckReport report;
  report.tolerance = options.tolerance;
  report.max_skip_fraction = options.max_skip_fraction;
  Rng rng(options.seed);
  auto evaluate = [&] {
    NoGradGuard no_grad;
    return static_cast<double>(loss_fn().item());
  };

  for (auto& entry : params.entries()) {
    Tensor<T>& tensor = entry.tensor;
    const std::vector<T> analytic(tensor.grad().begin(), tensor.grad().end());
    auto central = [&](std::size_t idx, double h) {
      const T original = tensor[idx];
      tensor[idx] = static_cast<T>(original + h);
      const double plus = evaluate();
      tensor[idx] = static_cast<T>(original - h);
      const double minus = evaluate();
      tensor[idx] = original;
      return (plus - minus) / (2.0 * h);
    };

    // Random visiting order; the first samples_per_tensor usable coordinates are checked.
    std::vector<std::size_t> order(tensor.numel());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t wanted = std::min(options.samples_per_tensor, order.size());

    GradCheckEntry result;
    result.name = entry.name;
    for (std::size_t i = 0; i < order.size() && result.coordinates < wanted; ++i) {
      std::swap(order[i], order[i + rng.below(order.size() - i)]);
      const std::size_t idx = order[i];
      const double numeric = central(idx, options.h);
      const double err = relative_error(analytic[idx], numeric, options.scale_floor);
      if (err > options.tolerance) {
        const double half = central(idx, 0.5 * options.h);
        if (relative_error(half, numeric, options.scale_floor) > options.tolerance) {
          ++result.skipped;
          continue;
        }
      }
      ++result.coordinates;
      if (err >= result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_index = idx;
        result.analytic = analytic[idx];
        result.numeric = numeric;
      }
    }
    report.max_relative_error = std::max(report.max_relative_error, result.max_relative_error);
    report.coordinates += result.coordinates;
    report.skipped += result.skipped;
    report.entries.push_back(result);
  }
  return report;
}

template GradCheckReport finite_diff_check(const std::function<Tensor<float>()>&, ParameterSet<float>&,
                                           const GradCheckOptions<float>&);
template GradCheckReport finite_diff_check(const std::function<Tensor<double>()>&, ParameterSet<double>&,
                                           const GradCheckOptions<double>&);

}  // namespace cftrack
