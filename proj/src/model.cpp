#include "cftrack/model.hpp"

#include "cftrack/error.hpp"

namespace cftrack {

void ModelConfig::validate() const {
  backbone.validate();
  if (attention_hidden <= 0 || head_width <= 0 || embed_hidden <= 0 || embed_dim <= 0) {
    throw ConfigError("model widths must be positive");
  }
}

template <typename T>
TrackerModel<T> TrackerModel<T>::build(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  TrackerModel m;
  m.config_ = config;
  Rng rng(seed);
  m.backbone_ = Backbone<T>::build(config.backbone, m.params_, rng);
  m.attention_ = AttentionMLP<T>::build(m.params_, config.fused_channels(), config.attention_hidden, rng);
  m.heads_ = PredictionHeads<T>::build(m.params_, config.fused_channels(), config.head_width, rng);
  m.embedding_ = EmbeddingModule<T>::build(m.params_, config.backbone.output_channels(), config.embed_hidden,
                                           config.embed_dim, config.backbone.template_feature_size(), rng);
  return m;
}

template <typename T>
FeatureMap<T> TrackerModel<T>::template_features(const Tensor<T>& patch) const {
  return backbone_.extract_features(patch, Role::kTemplate);
}

template <typename T>
FeatureMap<T> TrackerModel<T>::search_features(const Tensor<T>& patch) const {
  return backbone_.extract_features(patch, Role::kSearch);
}

template <typename T>
FusedMap<T> TrackerModel<T>::fuse(const FeatureMap<T>& z, const FeatureMap<T>& x) const {
  FusedMap<T> fused = cftrack::fuse(z, x, attention_);
  const int s = config_.backbone.search_feature_size();
  if (fused.data.shape() != Shape{config_.fused_channels(), s, s}) {
    throw ShapeError("fused map " + shape_to_string(fused.data.shape()) + ", expected " +
                     shape_to_string({config_.fused_channels(), s, s}));
  }
  return fused;
}

template <typename T>
HeadOutputs<T> TrackerModel<T>::predict(const FusedMap<T>& fused) const {
  return heads_.run(fused);
}

template <typename T>
Embedding<T> TrackerModel<T>::embed_template(const FeatureMap<T>& z) const {
  return embedding_.embed(z.data, Role::kTemplate);
}

template <typename T>
Embedding<T> TrackerModel<T>::embed_search(const FeatureMap<T>& x, int row, int col) const {
  const int w = embedding_.window();
  const int r0 = window_origin(row, x.data.dim(1), w);
  const int c0 = window_origin(col, x.data.dim(2), w);
  return embedding_.embed(ops::crop_window(x.data, r0, c0, w, w), Role::kSearch);
}

template <typename T>
std::size_t TrackerModel<T>::parameter_count(const std::string& prefix) const {
  std::size_t n = 0;
  for (const auto& e : params_.entries()) {
    if (e.name.rfind(prefix, 0) == 0) n += e.tensor.numel();
  }
  return n;
}

template class TrackerModel<float>;
template class TrackerModel<double>;

}  // namespace cftrack
