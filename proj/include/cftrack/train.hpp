#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cftrack/gradcheck.hpp"
#include "cftrack/model.hpp"
#include "cftrack/optim.hpp"

namespace cftrack {

struct TrainConfig {
  int epochs = 40;
  int samples_per_epoch = 512;
  int batch_size = 8;
  double learning_rate = 1e-4;
  double weight_decay = 1e-4;
  double lr_decay = 0.1;
  std::vector<int> milestones{22, 27, 32, 37};
  double negative_fraction = kDefaultNegativeFraction;
  LossWeights weights;
  MarginParams margin;
  bool augment = true;
  // Search crop centre jitter (fraction of the crop side) and scale jitter.
  double center_jitter = 0.25;
  double scale_jitter = 0.15;
  std::uint64_t seed = 1;

  void validate() const;
  int steps_per_epoch() const { return (samples_per_epoch + batch_size - 1) / batch_size; }
  long total_steps() const { return static_cast<long>(epochs) * steps_per_epoch(); }
  // Base rate times lr_decay for every milestone <= epoch.
  double learning_rate_at(int epoch) const;
  // Baseline objective: no contrastive term and no negative pairs.
  void disable_cfm() {
    weights.adapt = 0.0;
    negative_fraction = 0.0;
  }
};

// Network inputs for one pair, cropped and augmented.
struct TrainingSample {
  Tensor<float> template_patch;  // [3,144,144]
  Tensor<float> search_patch;    // [3,272,272]
  std::optional<Box> search_box; // target in search-crop pixels
  int label = 1;
};

// Template crop at the template context around the template frame's box.
// Search crop around the search frame's box with centre/scale jitter, then
// (if enabled) flip and brightness augmentation of the search patch.
TrainingSample prepare_sample(std::span<const Sequence> dataset, const PairSample& pair, const TrainConfig& config,
                              std::uint64_t seed);

template <typename T>
struct LossTerms {
  Tensor<T> cls;
  Tensor<T> l1;
  Tensor<T> adapt;
  Tensor<T> total;
};

// Positive pairs: weighted BCE, smooth L1 and the contrastive term with
// y = 1 on the window at the target cell. Negative pairs: contrastive term
// with y = 0 only. The contrastive branch is skipped when its weight is 0.
template <typename T>
LossTerms<T> pair_loss(const TrackerModel<T>& model, const TrainingSample& sample, const LossWeights& weights,
                       const MarginParams& margin);

// Mean of pair_loss over the batch.
template <typename T>
LossTerms<T> batch_loss(const TrackerModel<T>& model, std::span<const TrainingSample> batch,
                        const LossWeights& weights, const MarginParams& margin);

// Finite-difference check of the batch objective over every parameter tensor,
// run on a 64-bit copy of the model.
GradCheckReport check_objective_gradients(const TrackerModel<float>& model, std::span<const TrainingSample> batch,
                                          const LossWeights& weights, const MarginParams& margin,
                                          const GradCheckOptions<double>& options);

struct StepRecord {
  long step = 0;
  double lr = 0.0;
  double cls = 0.0;
  double l1 = 0.0;
  double adapt = 0.0;
  double total = 0.0;
};

using StepCallback = std::function<void(const StepRecord&)>;

// Runs the schedule in place on `model`. Throws TrainingError naming the step
// and the component breakdown on a non-finite loss.
std::vector<StepRecord> train(TrackerModel<float>& model, std::span<const Sequence> dataset,
                              const TrainConfig& config, const StepCallback& on_step = {});

void write_loss_log(const std::vector<StepRecord>& history, const std::filesystem::path& path);

// "CFTK", u32 version, u32 manifest length, manifest ("name d0 d1 ... offset"
// per line, offset in floats), f32 payload, u32 CRC32 of the payload. All LE.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ParameterSet<float>& params, const std::filesystem::path& path);
// Loads into an existing parameter set; names and shapes must match exactly.
void restore_checkpoint(ParameterSet<float>& params, const std::filesystem::path& path);
std::vector<NamedParameter<float>> read_checkpoint(const std::filesystem::path& path);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);
// CRC32 over the little-endian float payload of every parameter, in order.
std::uint32_t parameter_checksum(const ParameterSet<float>& params);

}  // namespace cftrack
