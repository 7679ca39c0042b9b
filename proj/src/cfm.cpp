#include "cftrack/cfm.hpp"

#include <algorithm>
#include <cmath>

#include "cftrack/error.hpp"

namespace cftrack {

void MarginParams::validate() const {
  if (!(m0 >= 0.0) || !(beta >= 0.0) || !(gamma > 0.0)) {
    throw ConfigError("margin parameters need m0 >= 0, beta >= 0, gamma > 0");
  }
}

double adaptive_margin(double distance, const MarginParams& p) { return p.m0 + p.beta * std::exp(-p.gamma * distance); }

double adaptive_margin_derivative(double distance, const MarginParams& p) {
  return -p.beta * p.gamma * std::exp(-p.gamma * distance);
}

double adaptive_contrastive_loss(double distance, int label, const MarginParams& p) {
  if (label == 1) return distance * distance;
  const double hinge = std::max(0.0, adaptive_margin(distance, p) - distance);
  return hinge * hinge;
}

double adaptive_contrastive_loss_grad(double distance, int label, const MarginParams& p) {
  if (label == 1) return 2.0 * distance;
  const double hinge = adaptive_margin(distance, p) - distance;
  if (hinge <= 0.0) return 0.0;
  return 2.0 * hinge * (adaptive_margin_derivative(distance, p) - 1.0);
}

template <typename T>
Tensor<T> adaptive_contrastive_loss(const Tensor<T>& distance, int label, const MarginParams& p) {
  if (distance.numel() != 1) {
    throw ShapeError("adaptive_contrastive_loss: distance must be a scalar, got " + shape_to_string(distance.shape()));
  }
  if (label != 0 && label != 1) throw ConfigError("pair label must be 0 or 1, got " + std::to_string(label));
  const double d = distance.item();
  auto backward = [d, label, p](detail::TensorNode<T>& self) {
    auto& parent = *self.parents[0];
    if (!parent.requires_grad) return;
    parent.grad[0] += static_cast<T>(self.grad[0] * adaptive_contrastive_loss_grad(d, label, p));
  };
  Tensor<T> out = Tensor<T>::make_result({1}, {distance.node_ptr()}, backward);
  out[0] = static_cast<T>(adaptive_contrastive_loss(d, label, p));
  return out;
}

template <typename T>
Tensor<T> cosine_similarity(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 1 || b.rank() != 1 || a.numel() != b.numel()) {
    throw ShapeError("cosine_similarity: vectors " + shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()));
  }
  const std::size_t n = a.numel();
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  const double na = std::sqrt(aa), nb = std::sqrt(bb);
  if (na <= kMinEmbeddingNorm || nb <= kMinEmbeddingNorm) {
    throw DegenerateInputError("cosine_similarity: zero-norm embedding (norms " + std::to_string(na) + ", " +
                               std::to_string(nb) + ")");
  }
  const double s = dot / (na * nb);
  auto backward = [n, na, nb, s](detail::TensorNode<T>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    const double g = self.grad[0];
    const double inv = 1.0 / (na * nb);
    if (pa.requires_grad) {
      for (std::size_t i = 0; i < n; ++i) {
        pa.grad[i] += static_cast<T>(g * (pb.data[i] * inv - s * pa.data[i] / (na * na)));
      }
    }
    if (pb.requires_grad) {
      for (std::size_t i = 0; i < n; ++i) {
        pb.grad[i] += static_cast<T>(g * (pa.data[i] * inv - s * pb.data[i] / (nb * nb)));
      }
    }
  };
  Tensor<T> out = Tensor<T>::make_result({1}, {a.node_ptr(), b.node_ptr()}, backward);
  out[0] = static_cast<T>(s);
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  return cosine_similarity(Tensor<double>({static_cast<int>(a.size())}, std::vector<double>(a.begin(), a.end())),
                           Tensor<double>({static_cast<int>(b.size())}, std::vector<double>(b.begin(), b.end())))
      .item();
}

double confidence(double similarity, double score) { return std::max(similarity * score, 0.0); }

CfmAssessment assess(double similarity, double score, const MarginParams& p) {
  CfmAssessment a;
  a.similarity = std::clamp(similarity, -1.0, 1.0);
  a.distance = 1.0 - a.similarity;
  a.margin = adaptive_margin(a.distance, p);
  a.score = score;
  a.confidence = confidence(a.similarity, score);
  return a;
}

template <typename T>
EmbeddingModule<T> EmbeddingModule<T>::build(ParameterSet<T>& params, int in_channels, int hidden, int out,
                                             int window, Rng& rng) {
  EmbeddingModule m;
  m.in_channels_ = in_channels;
  m.out_ = out;
  m.window_ = window;
  m.first_ = SeparableConvLayer<T>::build(params, "cfm.embed.0", in_channels, hidden, 3, 1, rng);
  m.second_ = SeparableConvLayer<T>::build(params, "cfm.embed.1", hidden, out, 3, 1, rng);
  return m;
}

template <typename T>
Embedding<T> EmbeddingModule<T>::embed(const Tensor<T>& features, Role source) const {
  if (features.rank() != 3 || features.dim(0) != in_channels_ || features.dim(1) != window_ ||
      features.dim(2) != window_) {
    throw ShapeError("embedding expects [" + std::to_string(in_channels_) + "," + std::to_string(window_) + "," +
                     std::to_string(window_) + "] features, got " + shape_to_string(features.shape()));
  }
  Tensor<T> h = ops::relu(second_(ops::relu(first_(features))));
  Embedding<T> e{ops::global_avg_pool(h), source};
  if (e.data.numel() != static_cast<std::size_t>(out_)) {
    throw ShapeError("embedding produced " + shape_to_string(e.data.shape()));
  }
  return e;
}

int window_origin(int center, int map_size, int window) {
  return std::clamp(center - window / 2, 0, std::max(0, map_size - window));
}

bool usable_template(Visibility v) { return v == Visibility::kClear; }

bool usable_search(Visibility v) {
  return v == Visibility::kClear || v == Visibility::kPartialOcclusion || v == Visibility::kFrameCut;
}

namespace {

std::vector<int> frames_where(const Sequence& s, bool (*pred)(Visibility)) {
  std::vector<int> out;
  for (int i = 0; i < static_cast<int>(s.annotations.size()); ++i) {
    if (pred(s.annotations[i].visibility) && s.annotations[i].box) out.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<PairSample> sample_pairs(std::span<const Sequence> dataset, int batch_size, double negative_fraction,
                                     std::uint64_t seed) {
  if (batch_size <= 0) throw SamplingError("batch size must be positive");
  if (!(negative_fraction >= 0.0 && negative_fraction <= 1.0)) {
    throw SamplingError("negative fraction must lie in [0,1]");
  }
  const int negatives = static_cast<int>(std::lround(batch_size * negative_fraction));
  if (negatives > 0 && dataset.size() < 2) {
    throw SamplingError("negative pairs need at least 2 sequences, dataset has " + std::to_string(dataset.size()));
  }
  std::vector<std::vector<int>> templates, searches;
  std::vector<int> positive_sources, template_sources, search_sources;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    templates.push_back(frames_where(dataset[i], usable_template));
    searches.push_back(frames_where(dataset[i], usable_search));
    if (!templates.back().empty()) template_sources.push_back(static_cast<int>(i));
    if (!searches.back().empty()) search_sources.push_back(static_cast<int>(i));
    // A positive pair needs a template frame and a different search frame.
    if (!templates.back().empty() && searches.back().size() >= 2) positive_sources.push_back(static_cast<int>(i));
  }
  if (batch_size - negatives > 0 && positive_sources.empty()) {
    throw SamplingError("no sequence has a clear template frame and a second usable frame");
  }

  Rng rng(seed);
  std::vector<PairSample> out;
  out.reserve(batch_size);
  for (int n = 0; n < batch_size - negatives; ++n) {
    PairSample p;
    p.label = 1;
    p.template_sequence = p.search_sequence = positive_sources[rng.below(positive_sources.size())];
    const auto& tf = templates[p.template_sequence];
    const auto& sf = searches[p.search_sequence];
    p.template_frame = tf[rng.below(tf.size())];
    do {
      p.search_frame = sf[rng.below(sf.size())];
    } while (p.search_frame == p.template_frame);
    out.push_back(p);
  }
  for (int n = 0; n < negatives; ++n) {
    PairSample p;
    p.label = 0;
    if (template_sources.empty() || search_sources.size() < 2) {
      throw SamplingError("not enough usable sequences for negative pairs");
    }
    p.template_sequence = template_sources[rng.below(template_sources.size())];
    do {
      p.search_sequence = search_sources[rng.below(search_sources.size())];
    } while (p.search_sequence == p.template_sequence);
    const auto& tf = templates[p.template_sequence];
    const auto& sf = searches[p.search_sequence];
    p.template_frame = tf[rng.below(tf.size())];
    p.search_frame = sf[rng.below(sf.size())];
    out.push_back(p);
  }
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
  return out;
}

template class EmbeddingModule<float>;
template class EmbeddingModule<double>;
template Tensor<float> adaptive_contrastive_loss(const Tensor<float>&, int, const MarginParams&);
template Tensor<double> adaptive_contrastive_loss(const Tensor<double>&, int, const MarginParams&);
template Tensor<float> cosine_similarity(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> cosine_similarity(const Tensor<double>&, const Tensor<double>&);

}  // namespace cftrack
