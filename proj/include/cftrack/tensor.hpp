#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace cftrack {

using Shape = std::vector<int>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

namespace detail {

// One node of the autograd tape. Leaves (parameters, inputs) have no
// backward function; interior nodes keep their parents alive until the
// backward pass releases them.
template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T(0));
  }
};

}  // namespace detail

// Graph recording is disabled while a NoGradGuard is alive on this thread.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool enabled);
};

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

// Dense row-major tensor handle. Copies share storage (like a reference);
// use clone() for a deep copy.
template <typename T>
class Tensor {
 public:
  using Node = detail::TensorNode<T>;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0));
  Tensor(Shape shape, std::vector<T> values);

  static Tensor scalar(T value) { return Tensor(Shape{1}, std::vector<T>{value}); }

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<T> data() { return node_->data; }
  std::span<const T> data() const { return node_->data; }
  T item() const;
  T& operator[](std::size_t i) { return node_->data[i]; }
  const T& operator[](std::size_t i) const { return node_->data[i]; }

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool value);
  bool has_grad() const { return node_->grad.size() == node_->data.size(); }
  std::span<T> grad();
  std::span<const T> grad() const;
  void zero_grad();

  // Reverse-mode sweep from this scalar. Gradients accumulate into every
  // reachable tensor that requires grad; interior graph links are released.
  void backward();

  Tensor clone() const;
  Tensor detach() const;
  bool all_finite() const;

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& node_ptr() const { return node_; }

  // Used by operators to create a result wired into the tape.
  static Tensor make_result(Shape shape, std::vector<std::shared_ptr<Node>> parents,
                            std::function<void(Node&)> backward_fn);

 private:
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From>& source) {
  std::vector<To> values(source.data().begin(), source.data().end());
  return Tensor<To>(source.shape(), std::move(values));
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace cftrack
