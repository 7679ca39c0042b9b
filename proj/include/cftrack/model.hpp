#pragma once

#include <cstdint>
#include <string>

#include "cftrack/cfm.hpp"
#include "cftrack/error.hpp"
#include "cftrack/heads.hpp"

namespace cftrack {

struct ModelConfig {
  BackboneConfig backbone;
  int attention_hidden = 20;
  int head_width = 96;
  int embed_hidden = 128;
  int embed_dim = 256;

  void validate() const;
  // One fused channel per template feature cell.
  int fused_channels() const {
    const int t = backbone.template_feature_size();
    return t * t;
  }
};

// Parameter names are prefixed backbone., fusion., heads. and cfm.
template <typename T>
class TrackerModel {
 public:
  static TrackerModel build(const ModelConfig& config, std::uint64_t seed);

  TrackerModel(TrackerModel&&) noexcept = default;
  TrackerModel& operator=(TrackerModel&&) noexcept = default;
  TrackerModel(const TrackerModel&) = delete;
  TrackerModel& operator=(const TrackerModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParameterSet<T>& params() { return params_; }
  const ParameterSet<T>& params() const { return params_; }
  const Backbone<T>& backbone() const { return backbone_; }
  const AttentionMLP<T>& attention() const { return attention_; }
  const PredictionHeads<T>& heads() const { return heads_; }
  const EmbeddingModule<T>& embedding() const { return embedding_; }

  FeatureMap<T> template_features(const Tensor<T>& patch) const;
  FeatureMap<T> search_features(const Tensor<T>& patch) const;
  // Throws ShapeError unless the result is [fused_channels, S, S] with S the search feature size.
  FusedMap<T> fuse(const FeatureMap<T>& z, const FeatureMap<T>& x) const;
  HeadOutputs<T> predict(const FusedMap<T>& fused) const;

  Embedding<T> embed_template(const FeatureMap<T>& z) const;
  // Template-sized window of the search map centred on (row, col), clamped.
  Embedding<T> embed_search(const FeatureMap<T>& x, int row, int col) const;

  // Copies values by name; every tensor of this model must be present with the same shape.
  template <typename U>
  void assign_from(const ParameterSet<U>& source);

  template <typename U>
  TrackerModel<U> cast() const {
    TrackerModel<U> out = TrackerModel<U>::build(config_, 0);
    out.assign_from(params_);
    return out;
  }

  TrackerModel clone() const { return cast<T>(); }

  std::size_t parameter_count() const { return params_.scalar_count(); }
  // Scalars in tensors whose name starts with `prefix`.
  std::size_t parameter_count(const std::string& prefix) const;

 private:
  TrackerModel() = default;

  ModelConfig config_;
  ParameterSet<T> params_;
  Backbone<T> backbone_;
  AttentionMLP<T> attention_;
  PredictionHeads<T> heads_;
  EmbeddingModule<T> embedding_;
};

template <typename T>
template <typename U>
void TrackerModel<T>::assign_from(const ParameterSet<U>& source) {
  for (auto& e : params_.entries()) {
    const Tensor<U>& src = source.get(e.name);
    if (src.shape() != e.tensor.shape()) {
      throw ShapeError("parameter " + e.name + ": shape " + shape_to_string(src.shape()) + " vs " +
                       shape_to_string(e.tensor.shape()));
    }
    auto dst = e.tensor.data();
    auto values = src.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<T>(values[i]);
  }
}

extern template class TrackerModel<float>;
extern template class TrackerModel<double>;

}  // namespace cftrack
