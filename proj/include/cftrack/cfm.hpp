#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cftrack/backbone.hpp"
#include "cftrack/synth.hpp"

namespace cftrack {

struct MarginParams {
  double m0 = 1.0;
  double beta = 1.0;
  double gamma = 2.0;

  void validate() const;
};

// m(D) = m0 + beta * exp(-gamma * D)
double adaptive_margin(double distance, const MarginParams& p);
// m'(D) = -beta * gamma * exp(-gamma * D)
double adaptive_margin_derivative(double distance, const MarginParams& p);

// y * D^2 + (1 - y) * max(0, m(D) - D)^2
double adaptive_contrastive_loss(double distance, int label, const MarginParams& p);
// dL/dD, including the m'(D) term on the y = 0 branch; 0 at the hinge point.
double adaptive_contrastive_loss_grad(double distance, int label, const MarginParams& p);

// Scalar-tensor version of the loss, differentiable in `distance` ([1]).
template <typename T>
Tensor<T> adaptive_contrastive_loss(const Tensor<T>& distance, int label, const MarginParams& p);

inline constexpr double kMinEmbeddingNorm = 1e-12;

// Cosine similarity of two equal-length vectors as a [1] tensor. Throws
// DegenerateInputError if either norm is <= 1e-12.
template <typename T>
Tensor<T> cosine_similarity(const Tensor<T>& a, const Tensor<T>& b);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// max(similarity * score, 0)
double confidence(double similarity, double score);

struct CfmAssessment {
  double similarity = 0.0;
  double distance = 0.0;  // 1 - similarity
  double margin = 0.0;    // m(distance)
  double score = 0.0;
  double confidence = 0.0;
};

// Rounding can push |similarity| a hair past 1; it is clamped to [-1, 1] first.
CfmAssessment assess(double similarity, double score, const MarginParams& p);

template <typename T>
struct Embedding {
  Tensor<T> data;  // [256]
  Role source = Role::kTemplate;
};

// Two 3x3 separable conv + relu layers followed by global average pooling.
// The same parameters embed template features and search-feature windows.
template <typename T>
class EmbeddingModule {
 public:
  static EmbeddingModule build(ParameterSet<T>& params, int in_channels, int hidden, int out, int window, Rng& rng);

  // features: [in_channels, window, window]
  Embedding<T> embed(const Tensor<T>& features, Role source) const;

  int window() const { return window_; }
  int dimension() const { return out_; }

 private:
  int in_channels_ = 0;
  int out_ = 0;
  int window_ = 0;
  SeparableConvLayer<T> first_;
  SeparableConvLayer<T> second_;
};

// Top-left of a window of `window` cells centred on `center`, clamped to the map.
int window_origin(int center, int map_size, int window);

struct PairSample {
  int template_sequence = 0;
  int template_frame = 0;
  int search_sequence = 0;
  int search_frame = 0;
  int label = 1;  // 1 = same target, 0 = different sequences
};

inline constexpr double kDefaultNegativeFraction = 0.25;

// Frames usable as templates (clear view) and as search targets (target at
// least partly visible and not fully occluded).
bool usable_template(Visibility v);
bool usable_search(Visibility v);

// round(batch_size * negative_fraction) negatives, the rest positives, in a
// seeded shuffled order. Positives use two distinct frames of one sequence;
// negatives pair a template of sequence A with the target of sequence B != A.
std::vector<PairSample> sample_pairs(std::span<const Sequence> dataset, int batch_size, double negative_fraction,
                                     std::uint64_t seed);

extern template class EmbeddingModule<float>;
extern template class EmbeddingModule<double>;

}  // namespace cftrack
