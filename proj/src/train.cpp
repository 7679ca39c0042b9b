#include "cftrack/train.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cftrack/error.hpp"

namespace cftrack {

void TrainConfig::validate() const {
  if (epochs <= 0 || samples_per_epoch <= 0 || batch_size <= 0) {
    throw ConfigError("train: epochs, samples_per_epoch and batch_size must be positive");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be > 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("train: weight decay must be >= 0");
  if (!(lr_decay > 0.0)) throw ConfigError("train: lr decay factor must be > 0");
  if (!(negative_fraction >= 0.0 && negative_fraction <= 1.0)) {
    throw ConfigError("train: negative fraction must lie in [0,1]");
  }
  if (!(center_jitter >= 0.0) || !(scale_jitter >= 0.0 && scale_jitter < 1.0)) {
    throw ConfigError("train: jitter must be >= 0 (scale jitter < 1)");
  }
  weights.validate();
  margin.validate();
}

double TrainConfig::learning_rate_at(int epoch) const {
  double lr = learning_rate;
  for (int m : milestones) {
    if (epoch >= m) lr *= lr_decay;
  }
  return lr;
}

TrainingSample prepare_sample(std::span<const Sequence> dataset, const PairSample& pair, const TrainConfig& config,
                              std::uint64_t seed) {
  const Sequence& tseq = dataset[pair.template_sequence];
  const Sequence& sseq = dataset[pair.search_sequence];
  const auto& tbox = tseq.annotations.at(pair.template_frame).box;
  const auto& sbox = sseq.annotations.at(pair.search_frame).box;
  if (!tbox || !sbox) throw SamplingError("pair refers to a frame without a visible target");

  Rng rng(seed);
  TrainingSample s;
  s.label = pair.label;
  s.template_patch = crop_patch(tseq.frames[pair.template_frame], *tbox, kTemplateContext, 144);

  const double side0 = kSearchContext * std::sqrt(sbox->w * sbox->h);
  const double side = side0 * rng.uniform(1.0 - config.scale_jitter, 1.0 + config.scale_jitter);
  const double cx = sbox->cx() + rng.uniform(-config.center_jitter, config.center_jitter) * side0;
  const double cy = sbox->cy() + rng.uniform(-config.center_jitter, config.center_jitter) * side0;
  const double anchor = side / kSearchContext;
  const CropTransform transform = crop_transform(Box::from_center(cx, cy, anchor, anchor), kSearchContext, 272);
  s.search_patch = crop_patch(sseq.frames[pair.search_frame], transform, 272);
  Box box = transform.to_crop(*sbox);
  if (config.augment) {
    Augmented a = augment(s.search_patch, box, rng.next_u64());
    s.search_patch = a.patch;
    box = a.box;
  }
  s.search_box = box;
  return s;
}

namespace {

int target_cell(double coord, int stride, int map_size) {
  return std::clamp(static_cast<int>(std::floor(coord / stride)), 0, map_size - 1);
}

}  // namespace

template <typename T>
LossTerms<T> pair_loss(const TrackerModel<T>& model, const TrainingSample& sample, const LossWeights& weights,
                       const MarginParams& margin) {
  const bool contrastive = weights.adapt > 0.0;
  LossTerms<T> terms;
  if (sample.label == 0 && !contrastive) {
    terms.cls = terms.l1 = terms.adapt = terms.total = Tensor<T>::scalar(T(0));
    return terms;
  }
  const auto& bb = model.config().backbone;
  const FeatureMap<T> z = model.template_features(tensor_cast<T>(sample.template_patch));
  const FeatureMap<T> x = model.search_features(tensor_cast<T>(sample.search_patch));
  if (sample.label == 1) {
    const HeadOutputs<T> out = model.predict(model.fuse(z, x));
    const TargetAssignment a =
        assign_targets(sample.search_box, bb.total_stride(), bb.search_feature_size(), kPositiveShrink);
    terms.cls = weighted_bce(out.cls_map, a, class_balance_weight(a));
    terms.l1 = smooth_l1(out.box_map, a);
  } else {
    terms.cls = Tensor<T>::scalar(T(0));
    terms.l1 = Tensor<T>::scalar(T(0));
  }
  if (contrastive && sample.search_box) {
    const int s = bb.search_feature_size();
    const int row = target_cell(sample.search_box->cy(), bb.total_stride(), s);
    const int col = target_cell(sample.search_box->cx(), bb.total_stride(), s);
    const Embedding<T> ez = model.embed_template(z);
    const Embedding<T> ex = model.embed_search(x, row, col);
    const Tensor<T> distance = ops::one_minus(cosine_similarity(ez.data, ex.data));
    terms.adapt = adaptive_contrastive_loss(distance, sample.label, margin);
  } else {
    terms.adapt = Tensor<T>::scalar(T(0));
  }
  terms.total = total_loss(terms.cls, terms.l1, terms.adapt, weights);
  return terms;
}

template <typename T>
LossTerms<T> batch_loss(const TrackerModel<T>& model, std::span<const TrainingSample> batch,
                        const LossWeights& weights, const MarginParams& margin) {
  if (batch.empty()) throw ConfigError("batch_loss: empty batch");
  std::vector<Tensor<T>> cls, l1, adapt;
  for (const auto& s : batch) {
    LossTerms<T> t = pair_loss(model, s, weights, margin);
    cls.push_back(t.cls);
    l1.push_back(t.l1);
    adapt.push_back(t.adapt);
  }
  const std::vector<T> w(batch.size(), static_cast<T>(1.0 / batch.size()));
  LossTerms<T> out;
  out.cls = ops::weighted_sum(cls, w);
  out.l1 = ops::weighted_sum(l1, w);
  out.adapt = ops::weighted_sum(adapt, w);
  out.total = total_loss(out.cls, out.l1, out.adapt, weights);
  return out;
}

GradCheckReport check_objective_gradients(const TrackerModel<float>& model, std::span<const TrainingSample> batch,
                                          const LossWeights& weights, const MarginParams& margin,
                                          const GradCheckOptions<double>& options) {
  TrackerModel<double> wide = model.cast<double>();
  const std::function<Tensor<double>()> loss = [&] { return batch_loss(wide, batch, weights, margin).total; };
  return finite_diff_check(loss, wide.params(), options);
}

std::vector<StepRecord> train(TrackerModel<float>& model, std::span<const Sequence> dataset,
                              const TrainConfig& config, const StepCallback& on_step) {
  config.validate();
  AdamWConfig opt;
  opt.learning_rate = config.learning_rate;
  opt.weight_decay = config.weight_decay;
  OptimizerState state = make_optimizer_state(model.params(), opt);
  std::vector<StepRecord> history;
  history.reserve(config.total_steps());
  const int B = config.batch_size;
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    state.config.learning_rate = config.learning_rate_at(epoch);
    for (int i = 0; i < config.steps_per_epoch(); ++i, ++step) {
      const auto pairs =
          sample_pairs(dataset, B, config.negative_fraction, derive_seed(config.seed, 2 * static_cast<std::uint64_t>(step)));
      const std::uint64_t prep_seed = derive_seed(config.seed, 2 * static_cast<std::uint64_t>(step) + 1);
      model.params().zero_grad();
      StepRecord rec;
      rec.step = step;
      rec.lr = state.config.learning_rate;
      for (int b = 0; b < B; ++b) {
        const TrainingSample sample = prepare_sample(dataset, pairs[b], config, derive_seed(prep_seed, b));
        LossTerms<float> terms;
        try {
          terms = pair_loss(model, sample, config.weights, config.margin);
        } catch (const Error& e) {
          if (e.code() != "loss.non_finite") throw;
          throw TrainingError(step, "step " + std::to_string(step) + ", batch item " + std::to_string(b) + ": " +
                                        e.what());
        }
        rec.cls += terms.cls.item() / B;
        rec.l1 += terms.l1.item() / B;
        rec.adapt += terms.adapt.item() / B;
        if (terms.total.requires_grad()) ops::scale(terms.total, 1.0f / B).backward();
      }
      rec.total = config.weights.cls * rec.cls + config.weights.reg * rec.l1 + config.weights.adapt * rec.adapt;
      if (!std::isfinite(rec.total)) {
        throw TrainingError(step, "step " + std::to_string(step) + ": non-finite loss (L_cls " +
                                      format_double(rec.cls) + ", L_1 " + format_double(rec.l1) + ", L_adapt " +
                                      format_double(rec.adapt) + ")");
      }
      adamw_step(model.params(), state);
      history.push_back(rec);
      if (on_step) on_step(rec);
    }
  }
  return history;
}

void write_loss_log(const std::vector<StepRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,lr,L_cls,L_1,L_adapt,L_total\n";
  for (const auto& r : history) {
    out << r.step << ',' << format_double(r.lr) << ',' << format_double(r.cls) << ',' << format_double(r.l1) << ','
        << format_double(r.adapt) << ',' << format_double(r.total) << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - pos, 1u << 30);
    crc = crc32(crc, bytes.data() + pos, static_cast<uInt>(n));
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::vector<std::uint8_t> payload_bytes(const ParameterSet<float>& params) {
  std::vector<std::uint8_t> out;
  out.reserve(params.scalar_count() * 4);
  for (const auto& e : params.entries()) {
    for (float v : e.tensor.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

}  // namespace

std::uint32_t parameter_checksum(const ParameterSet<float>& params) { return crc32_of(payload_bytes(params)); }

void save_checkpoint(const ParameterSet<float>& params, const std::filesystem::path& path) {
  std::ostringstream manifest;
  std::size_t offset = 0;
  for (const auto& e : params.entries()) {
    manifest << e.name;
    for (int d : e.tensor.shape()) manifest << ' ' << d;
    manifest << ' ' << offset << '\n';
    offset += e.tensor.numel();
  }
  const std::string m = manifest.str();
  const std::vector<std::uint8_t> payload = payload_bytes(params);
  std::vector<std::uint8_t> bytes{'C', 'F', 'T', 'K'};
  put_u32(bytes, kCheckpointVersion);
  put_u32(bytes, static_cast<std::uint32_t>(m.size()));
  bytes.insert(bytes.end(), m.begin(), m.end());
  bytes.insert(bytes.end(), payload.begin(), payload.end());
  put_u32(bytes, crc32_of(payload));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError(CheckpointErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointErrorKind::kIo, "short write to " + path.string());
}

std::vector<NamedParameter<float>> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::kIo, "cannot read " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = path.string() + ": ";
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "CFTK", 4) != 0) {
    throw CheckpointError(CheckpointErrorKind::kBadMagic, where + "missing CFTK magic");
  }
  if (bytes.size() < 12) throw CheckpointError(CheckpointErrorKind::kTruncated, where + "truncated header");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::kUnsupportedVersion,
                          where + "version " + std::to_string(version) + " is not supported");
  }
  const std::uint32_t mlen = get_u32(bytes.data() + 8);
  if (bytes.size() < 12ull + mlen) throw CheckpointError(CheckpointErrorKind::kTruncated, where + "truncated manifest");
  std::istringstream manifest(std::string(bytes.begin() + 12, bytes.begin() + 12 + mlen));

  std::vector<NamedParameter<float>> out;
  std::vector<std::size_t> offsets;
  std::size_t expected = 0;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name;
    std::vector<long long> nums;
    ls >> name;
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        nums.push_back(std::stoll(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw CheckpointError(CheckpointErrorKind::kManifest, where + "bad manifest token '" + tok + "'");
      }
    }
    if (name.empty() || nums.size() < 2) {
      throw CheckpointError(CheckpointErrorKind::kManifest, where + "bad manifest line '" + line + "'");
    }
    Shape shape;
    for (std::size_t i = 0; i + 1 < nums.size(); ++i) {
      if (nums[i] <= 0 || nums[i] > (1 << 24)) {
        throw CheckpointError(CheckpointErrorKind::kManifest, where + "bad dimension for tensor " + name);
      }
      shape.push_back(static_cast<int>(nums[i]));
    }
    if (nums.back() < 0 || static_cast<std::size_t>(nums.back()) != expected) {
      throw CheckpointError(CheckpointErrorKind::kManifest, where + "tensor " + name + " offset " +
                                                                 std::to_string(nums.back()) + ", expected " +
                                                                 std::to_string(expected));
    }
    offsets.push_back(expected);
    expected += shape_numel(shape);
    out.push_back({name, Tensor<float>(shape)});
  }
  const std::size_t payload_start = 12ull + mlen;
  const std::size_t payload_size = expected * 4;
  if (bytes.size() < payload_start + payload_size + 4) {
    throw CheckpointError(CheckpointErrorKind::kTruncated,
                          where + "payload holds " + std::to_string(bytes.size() - payload_start) + " bytes, manifest needs " +
                              std::to_string(payload_size + 4));
  }
  if (bytes.size() > payload_start + payload_size + 4) {
    throw CheckpointError(CheckpointErrorKind::kManifest, where + "trailing bytes after payload");
  }
  const std::span<const std::uint8_t> payload(bytes.data() + payload_start, payload_size);
  const std::uint32_t stored = get_u32(bytes.data() + payload_start + payload_size);
  if (crc32_of(payload) != stored) throw CheckpointError(CheckpointErrorKind::kChecksum, where + "CRC32 mismatch");
  for (std::size_t t = 0; t < out.size(); ++t) {
    auto d = out[t].tensor.data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] = std::bit_cast<float>(get_u32(payload.data() + 4 * (offsets[t] + i)));
    }
  }
  return out;
}

void restore_checkpoint(ParameterSet<float>& params, const std::filesystem::path& path) {
  const auto loaded = read_checkpoint(path);
  if (loaded.size() != params.size()) {
    throw CheckpointError(CheckpointErrorKind::kManifest, "checkpoint has " + std::to_string(loaded.size()) +
                                                              " tensors, model has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    const auto& want = params.entries()[i];
    const auto& got = loaded[i];
    if (want.name != got.name || want.tensor.shape() != got.tensor.shape()) {
      throw CheckpointError(CheckpointErrorKind::kManifest,
                            "tensor " + want.name + " " + shape_to_string(want.tensor.shape()) +
                                " does not match checkpoint entry " + got.name + " " +
                                shape_to_string(got.tensor.shape()));
    }
  }
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    auto dst = params.entries()[i].tensor.data();
    auto src = loaded[i].tensor.data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

template LossTerms<float> pair_loss(const TrackerModel<float>&, const TrainingSample&, const LossWeights&,
                                    const MarginParams&);
template LossTerms<double> pair_loss(const TrackerModel<double>&, const TrainingSample&, const LossWeights&,
                                     const MarginParams&);
template LossTerms<float> batch_loss(const TrackerModel<float>&, std::span<const TrainingSample>, const LossWeights&,
                                     const MarginParams&);
template LossTerms<double> batch_loss(const TrackerModel<double>&, std::span<const TrainingSample>,
                                      const LossWeights&, const MarginParams&);

}  // namespace cftrack
