#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cftrack/params.hpp"

namespace cftrack {

struct GradCheckEntry {
  std::string name;
  std::size_t coordinates = 0;
  // Coordinates whose difference quotients at h and h/2 disagree (a relu kink
  // inside the step); replaced by fresh samples where the tensor allows.
  std::size_t skipped = 0;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  std::size_t coordinates = 0;
  std::size_t skipped = 0;
  double max_skip_fraction = 0.1;
  bool passed() const {
    return max_relative_error <= tolerance &&
           static_cast<double>(skipped) <= max_skip_fraction * static_cast<double>(coordinates + skipped);
  }
};

template <typename T>
struct GradCheckOptions {
  double h = 1e-3;
  double tolerance = 1e-3;
  // Coordinates sampled per tensor; tensors with fewer entries are checked exhaustively.
  std::size_t samples_per_tensor = 100;
  std::uint64_t seed = 0;
  // Errors are |a - n| / max(|a|, |n|, scale_floor).
  double scale_floor = 1e-10;
  // Fraction of probed coordinates allowed to be skipped as kinks before the check fails.
  double max_skip_fraction = 0.1;
  // Runs after the analytic backward pass (test hook for corrupting gradients).
  std::function<void(ParameterSet<T>&)> after_backward;
};

// Compares analytic gradients of loss_fn against central differences
// (loss(x+h) - loss(x-h)) / 2h. loss_fn must be deterministic and return a scalar.
template <typename T>
GradCheckReport finite_diff_check(const std::function<Tensor<T>()>& loss_fn, ParameterSet<T>& params,
                                  const GradCheckOptions<T>& options);

double relative_error(double analytic, double numeric, double scale_floor);

extern template GradCheckReport finite_diff_check(const std::function<Tensor<float>()>&, ParameterSet<float>&,
                                                  const GradCheckOptions<float>&);
extern template GradCheckReport finite_diff_check(const std::function<Tensor<double>()>&, ParameterSet<double>&,
                                                  const GradCheckOptions<double>&);

}  // namespace cftrack
