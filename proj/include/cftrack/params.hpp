#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cftrack/rng.hpp"
#include "cftrack/tensor.hpp"

namespace cftrack {

template <typename T>
struct NamedParameter {
  std::string name;
  Tensor<T> tensor;
};

// Ordered, named collection of trainable tensors. Order is registration
// order and is what checkpoints and optimizers iterate over.
template <typename T>
class ParameterSet {
 public:
  // Weight drawn uniform in [-gain*sqrt(1/fan_in), +gain*sqrt(1/fan_in)].
  Tensor<T> add_uniform(const std::string& name, Shape shape, int fan_in, Rng& rng, double gain = 1.0);
  Tensor<T> add_constant(const std::string& name, Shape shape, T value);
  void add(const std::string& name, Tensor<T> tensor);

  std::vector<NamedParameter<T>>& entries() { return entries_; }
  const std::vector<NamedParameter<T>>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  const Tensor<T>& get(const std::string& name) const;
  std::size_t scalar_count() const;
  void zero_grad();

  // Shares nothing with the source; same names, shapes and (converted) values.
  template <typename U>
  ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (const auto& e : entries_) out.add(e.name, tensor_cast<U>(e.tensor));
    return out;
  }

 private:
  std::vector<NamedParameter<T>> entries_;
};

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;

}  // namespace cftrack
