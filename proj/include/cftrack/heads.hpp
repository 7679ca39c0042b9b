#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cftrack/box.hpp"
#include "cftrack/fusion.hpp"

namespace cftrack {

// cls_map [1,H,W] post-sigmoid; box_map [4,H,W] holding (l,t,r,b) distances
// from each cell centre in units of the feature stride.
template <typename T>
struct HeadOutputs {
  Tensor<T> cls_map;
  Tensor<T> box_map;
};

template <typename T>
class PredictionHeads {
 public:
  // Per branch: 3x3 separable (in->width), 3x3 separable (width->width), 5x5 separable (width->out).
  static PredictionHeads build(ParameterSet<T>& params, int in_channels, int width, Rng& rng);

  HeadOutputs<T> run(const FusedMap<T>& fused) const;

  int in_channels() const { return in_channels_; }

 private:
  int in_channels_ = 0;
  std::array<SeparableConvLayer<T>, 3> cls_;
  std::array<SeparableConvLayer<T>, 3> box_;
};

struct LossWeights {
  double cls = 1.0;
  double reg = 1.0;
  double adapt = 2.0;

  void validate() const;
};

struct TargetAssignment {
  int rows = 0;
  int cols = 0;
  int stride = 16;
  std::vector<std::uint8_t> positive;           // row-major, 1 = positive cell
  std::vector<std::array<float, 4>> targets;    // (l,t,r,b) / stride; meaningful on positive cells
  int positive_count = 0;
  bool target_absent = false;

  int negative_count() const { return rows * cols - positive_count; }
};

inline constexpr double kPositiveShrink = 0.5;

// Image-space centre of feature cell (row, col).
inline double cell_center(int index, int stride) { return index * stride + 0.5 * stride; }

// Cell (i,j) is positive iff its centre lies inside gt shrunk by `shrink`
// about the box centre. A missing box, or one entirely outside the crop,
// yields an all-negative assignment with target_absent set.
TargetAssignment assign_targets(const std::optional<Box>& gt_box, int stride = 16, int map_size = 17,
                                double shrink = kPositiveShrink);

struct DecodedBox {
  Box box;
  bool valid = false;
};

// Inverse of assign_targets at one cell: box in search-crop pixels.
DecodedBox decode_box(const std::array<double, 4>& offsets, int row, int col, int stride);

template <typename T>
DecodedBox decode_box(const Tensor<T>& box_map, int row, int col, int stride);

// (#negative cells) / max(1, #positive cells)
double class_balance_weight(const TargetAssignment& assignment);

// -(1/N) sum [w_p t log p + (1-t) log(1-p)], logs clamped at 1e-12, N = all cells.
template <typename T>
Tensor<T> weighted_bce(const Tensor<T>& cls_map, const TargetAssignment& assignment, double positive_weight);

double smooth_l1_value(double x);

// Mean smooth-L1 over positive cells and the 4 coordinates; 0 with no positives.
template <typename T>
Tensor<T> smooth_l1(const Tensor<T>& box_map, const TargetAssignment& assignment);

// lambda1 * L_cls + lambda2 * L_1 + lambda3 * L_adapt. Throws Error("loss.non_finite")
// naming the first non-finite component.
template <typename T>
Tensor<T> total_loss(const Tensor<T>& cls, const Tensor<T>& l1, const Tensor<T>& adapt, const LossWeights& weights);

double total_loss(double cls, double l1, double adapt, const LossWeights& weights);

extern template class PredictionHeads<float>;
extern template class PredictionHeads<double>;

}  // namespace cftrack
