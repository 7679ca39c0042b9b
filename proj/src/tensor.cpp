#include "cftrack/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "cftrack/error.hpp"

namespace cftrack {

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ')';
  return out.str();
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("non-positive dimension in shape " + shape_to_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

namespace {
thread_local bool grad_mode_enabled = true;
}

bool GradMode::enabled() { return grad_mode_enabled; }
void GradMode::set_enabled(bool enabled) { grad_mode_enabled = enabled; }

NoGradGuard::NoGradGuard() : previous_(grad_mode_enabled) { grad_mode_enabled = false; }
NoGradGuard::~NoGradGuard() { grad_mode_enabled = previous_; }

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : node_(std::make_shared<Node>()) {
  const std::size_t n = shape_numel(shape);
  node_->shape = std::move(shape);
  node_->data.assign(n, fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : node_(std::make_shared<Node>()) {
  const std::size_t n = shape_numel(shape);
  if (values.size() != n) {
    throw ShapeError("tensor of shape " + shape_to_string(shape) + " needs " + std::to_string(n) +
                     " values, got " + std::to_string(values.size()));
  }
  node_->shape = std::move(shape);
  node_->data = std::move(values);
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_to_string(shape()));
  return node_->data[0];
}

template <typename T>
Tensor<T>& Tensor<T>::set_requires_grad(bool value) {
  node_->requires_grad = value;
  return *this;
}

template <typename T>
std::span<T> Tensor<T>::grad() {
  node_->ensure_grad();
  return node_->grad;
}

template <typename T>
std::span<const T> Tensor<T>::grad() const {
  node_->ensure_grad();
  return node_->grad;
}

template <typename T>
void Tensor<T>::zero_grad() {
  node_->grad.assign(node_->data.size(), T(0));
}

template <typename T>
void Tensor<T>::backward() {
  if (numel() != 1) {
    throw ShapeError("backward() requires a scalar, got shape " + shape_to_string(shape()));
  }
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (parents first).
  // Owning references: clearing a node's parents below must not free nodes still queued.
  std::vector<std::shared_ptr<Node>> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<std::shared_ptr<Node>, std::size_t>> stack{{node_, 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      std::shared_ptr<Node> parent = node->parents[next++];
      if (parent->requires_grad && visited.insert(parent.get()).second) stack.emplace_back(std::move(parent), 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  node_->ensure_grad();
  node_->grad[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = it->get();
    if (!node->backward_fn) continue;
    node->ensure_grad();
    for (auto& parent : node->parents) {
      if (parent->requires_grad) parent->ensure_grad();
    }
    node->backward_fn(*node);
    node->backward_fn = nullptr;
    node->parents.clear();
  }
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor(node_->shape, node_->data);
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return clone();
}

template <typename T>
bool Tensor<T>::all_finite() const {
  for (T v : node_->data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <typename T>
Tensor<T> Tensor<T>::make_result(Shape shape, std::vector<std::shared_ptr<Node>> parents,
                                 std::function<void(Node&)> backward_fn) {
  Tensor out(std::move(shape));
  bool needs_grad = false;
  if (GradMode::enabled()) {
    for (const auto& p : parents) needs_grad = needs_grad || p->requires_grad;
  }
  if (needs_grad) {
    out.node_->requires_grad = true;
    out.node_->parents = std::move(parents);
    out.node_->backward_fn = std::move(backward_fn);
  }
  return out;
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace cftrack
