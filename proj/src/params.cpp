#include "cftrack/params.hpp"

#include <cmath>

#include "cftrack/error.hpp"

namespace cftrack {

template <typename T>
Tensor<T> ParameterSet<T>::add_uniform(const std::string& name, Shape shape, int fan_in, Rng& rng, double gain) {
  Tensor<T> t(std::move(shape));
  const double bound = gain * std::sqrt(1.0 / static_cast<double>(fan_in));
  for (auto& v : t.data()) v = static_cast<T>(rng.uniform(-bound, bound));
  add(name, t);
  return t;
}

template <typename T>
Tensor<T> ParameterSet<T>::add_constant(const std::string& name, Shape shape, T value) {
  Tensor<T> t(std::move(shape), value);
  add(name, t);
  return t;
}

template <typename T>
void ParameterSet<T>::add(const std::string& name, Tensor<T> tensor) {
  for (const auto& e : entries_) {
    if (e.name == name) throw ConfigError("duplicate parameter name '" + name + "'");
  }
  tensor.set_requires_grad(true);
  entries_.push_back({name, std::move(tensor)});
}

template <typename T>
const Tensor<T>& ParameterSet<T>::get(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw ConfigError("no parameter named '" + name + "'");
}

template <typename T>
std::size_t ParameterSet<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

template <typename T>
void ParameterSet<T>::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

template class ParameterSet<float>;
template class ParameterSet<double>;

}  // namespace cftrack
