#include "cftrack/heads.hpp"

#include <cmath>

#include "cftrack/error.hpp"

namespace cftrack {

namespace {
constexpr double kLogClamp = 1e-12;
// Output layers start small so scores begin near 0.5 and offsets near 0.
constexpr double kOutputInitGain = 0.1;
}

template <typename T>
PredictionHeads<T> PredictionHeads<T>::build(ParameterSet<T>& params, int in_channels, int width, Rng& rng) {
  PredictionHeads h;
  h.in_channels_ = in_channels;
  auto branch = [&](const std::string& name, int out, std::array<SeparableConvLayer<T>, 3>& layers) {
    layers[0] = SeparableConvLayer<T>::build(params, name + ".0", in_channels, width, 3, 1, rng);
    layers[1] = SeparableConvLayer<T>::build(params, name + ".1", width, width, 3, 1, rng);
    layers[2] = SeparableConvLayer<T>::build(params, name + ".2", width, out, 5, 1, rng, kOutputInitGain);
  };
  branch("heads.cls", 1, h.cls_);
  branch("heads.box", 4, h.box_);
  return h;
}

template <typename T>
HeadOutputs<T> PredictionHeads<T>::run(const FusedMap<T>& fused) const {
  const Tensor<T>& x = fused.data;
  if (x.rank() != 3 || x.dim(0) != in_channels_) {
    throw ShapeError("prediction heads expect " + std::to_string(in_channels_) + " input channels, got " +
                     shape_to_string(x.shape()));
  }
  Tensor<T> c = ops::relu(cls_[1](ops::relu(cls_[0](x))));
  Tensor<T> b = ops::relu(box_[1](ops::relu(box_[0](x))));
  return HeadOutputs<T>{ops::sigmoid(cls_[2](c)), ops::relu(box_[2](b))};
}

void LossWeights::validate() const {
  if (!(cls >= 0.0) || !(reg >= 0.0) || !(adapt >= 0.0)) {
    throw ConfigError("loss weights must be >= 0");
  }
}

TargetAssignment assign_targets(const std::optional<Box>& gt_box, int stride, int map_size, double shrink) {
  TargetAssignment a;
  a.rows = map_size;
  a.cols = map_size;
  a.stride = stride;
  a.positive.assign(static_cast<std::size_t>(map_size) * map_size, 0);
  a.targets.assign(a.positive.size(), {0.f, 0.f, 0.f, 0.f});
  const double extent = static_cast<double>(map_size) * stride;
  if (!gt_box || !gt_box->valid() || intersection_area(*gt_box, Box{0.0, 0.0, extent, extent}) <= 0.0) {
    a.target_absent = true;
    return a;
  }
  const Box& g = *gt_box;
  const double half_w = 0.5 * shrink * g.w;
  const double half_h = 0.5 * shrink * g.h;
  for (int i = 0; i < map_size; ++i) {
    const double cy = cell_center(i, stride);
    if (std::abs(cy - g.cy()) > half_h) continue;
    for (int j = 0; j < map_size; ++j) {
      const double cx = cell_center(j, stride);
      if (std::abs(cx - g.cx()) > half_w) continue;
      const std::size_t idx = static_cast<std::size_t>(i) * map_size + j;
      a.positive[idx] = 1;
      a.targets[idx] = {static_cast<float>((cx - g.x) / stride), static_cast<float>((cy - g.y) / stride),
                        static_cast<float>((g.right() - cx) / stride), static_cast<float>((g.bottom() - cy) / stride)};
      ++a.positive_count;
    }
  }
  return a;
}

DecodedBox decode_box(const std::array<double, 4>& offsets, int row, int col, int stride) {
  const double cx = cell_center(col, stride);
  const double cy = cell_center(row, stride);
  const double x1 = cx - offsets[0] * stride;
  const double y1 = cy - offsets[1] * stride;
  const double x2 = cx + offsets[2] * stride;
  const double y2 = cy + offsets[3] * stride;
  DecodedBox out;
  out.box = Box{x1, y1, x2 - x1, y2 - y1};
  out.valid = out.box.valid();
  return out;
}

template <typename T>
DecodedBox decode_box(const Tensor<T>& box_map, int row, int col, int stride) {
  if (box_map.rank() != 3 || box_map.dim(0) != 4) {
    throw ShapeError("decode_box: box map must be (4,H,W), got " + shape_to_string(box_map.shape()));
  }
  const int H = box_map.dim(1), W = box_map.dim(2);
  if (row < 0 || row >= H || col < 0 || col >= W) throw ShapeError("decode_box: cell outside map");
  std::array<double, 4> offsets{};
  for (int k = 0; k < 4; ++k) offsets[k] = box_map[(static_cast<std::size_t>(k) * H + row) * W + col];
  return decode_box(offsets, row, col, stride);
}

double class_balance_weight(const TargetAssignment& assignment) {
  return static_cast<double>(assignment.negative_count()) / std::max(1, assignment.positive_count);
}

template <typename T>
Tensor<T> weighted_bce(const Tensor<T>& cls_map, const TargetAssignment& assignment, double positive_weight) {
  const std::size_t n = cls_map.numel();
  if (n != assignment.positive.size()) {
    throw ShapeError("weighted_bce: score map " + shape_to_string(cls_map.shape()) + " vs " +
                     std::to_string(assignment.positive.size()) + " assigned cells");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const auto labels = assignment.positive;
  auto backward = [labels, positive_weight, inv_n, n](detail::TensorNode<T>& self) {
    auto& p = *self.parents[0];
    if (!p.requires_grad) return;
    const double g = self.grad[0];
    for (std::size_t i = 0; i < n; ++i) {
      const double pi = p.data[i];
      double d = 0.0;
      if (labels[i]) {
        if (pi > kLogClamp) d = -positive_weight / pi;
      } else {
        if (1.0 - pi > kLogClamp) d = 1.0 / (1.0 - pi);
      }
      p.grad[i] += static_cast<T>(g * d * inv_n);
    }
  };
  Tensor<T> out = Tensor<T>::make_result({1}, {cls_map.node_ptr()}, backward);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = cls_map[i];
    if (assignment.positive[i]) {
      loss -= positive_weight * std::log(std::max(p, kLogClamp));
    } else {
      loss -= std::log(std::max(1.0 - p, kLogClamp));
    }
  }
  out[0] = static_cast<T>(loss * inv_n);
  return out;
}

double smooth_l1_value(double x) {
  const double a = std::abs(x);
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}

template <typename T>
Tensor<T> smooth_l1(const Tensor<T>& box_map, const TargetAssignment& assignment) {
  if (box_map.rank() != 3 || box_map.dim(0) != 4 ||
      static_cast<std::size_t>(box_map.dim(1)) * box_map.dim(2) != assignment.positive.size()) {
    throw ShapeError("smooth_l1: box map " + shape_to_string(box_map.shape()) + " vs " +
                     std::to_string(assignment.positive.size()) + " assigned cells");
  }
  const std::size_t cells = assignment.positive.size();
  const int count = assignment.positive_count;
  const auto labels = assignment.positive;
  const auto targets = assignment.targets;
  auto backward = [labels, targets, cells, count](detail::TensorNode<T>& self) {
    auto& pred = *self.parents[0];
    if (!pred.requires_grad || count == 0) return;
    const double scale = self.grad[0] / (4.0 * count);
    for (std::size_t c = 0; c < cells; ++c) {
      if (!labels[c]) continue;
      for (int k = 0; k < 4; ++k) {
        const std::size_t idx = k * cells + c;
        const double x = pred.data[idx] - static_cast<double>(targets[c][k]);
        const double d = std::abs(x) < 1.0 ? x : (x > 0 ? 1.0 : -1.0);
        pred.grad[idx] += static_cast<T>(scale * d);
      }
    }
  };
  Tensor<T> out = Tensor<T>::make_result({1}, {box_map.node_ptr()}, backward);
  if (count == 0) {
    out[0] = T(0);
    return out;
  }
  double s = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    if (!labels[c]) continue;
    for (int k = 0; k < 4; ++k) s += smooth_l1_value(box_map[k * cells + c] - static_cast<double>(targets[c][k]));
  }
  out[0] = static_cast<T>(s / (4.0 * count));
  return out;
}

namespace {
void check_component(double value, const char* name) {
  if (!std::isfinite(value)) throw Error("loss.non_finite", std::string("non-finite loss component ") + name);
}
}  // namespace

template <typename T>
Tensor<T> total_loss(const Tensor<T>& cls, const Tensor<T>& l1, const Tensor<T>& adapt, const LossWeights& weights) {
  check_component(cls.item(), "L_cls");
  check_component(l1.item(), "L_1");
  check_component(adapt.item(), "L_adapt");
  return ops::weighted_sum<T>({cls, l1, adapt}, {static_cast<T>(weights.cls), static_cast<T>(weights.reg),
                                                  static_cast<T>(weights.adapt)});
}

double total_loss(double cls, double l1, double adapt, const LossWeights& weights) {
  check_component(cls, "L_cls");
  check_component(l1, "L_1");
  check_component(adapt, "L_adapt");
  return weights.cls * cls + weights.reg * l1 + weights.adapt * adapt;
}

template class PredictionHeads<float>;
template class PredictionHeads<double>;
template DecodedBox decode_box(const Tensor<float>&, int, int, int);
template DecodedBox decode_box(const Tensor<double>&, int, int, int);
template Tensor<float> weighted_bce(const Tensor<float>&, const TargetAssignment&, double);
template Tensor<double> weighted_bce(const Tensor<double>&, const TargetAssignment&, double);
template Tensor<float> smooth_l1(const Tensor<float>&, const TargetAssignment&);
template Tensor<double> smooth_l1(const Tensor<double>&, const TargetAssignment&);
template Tensor<float> total_loss(const Tensor<float>&, const Tensor<float>&, const Tensor<float>&, const LossWeights&);
template Tensor<double> total_loss(const Tensor<double>&, const Tensor<double>&, const Tensor<double>&,
                                   const LossWeights&);

}  // namespace cftrack
