#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cftrack/box.hpp"
#include "cftrack/image.hpp"
#include "cftrack/tensor.hpp"

namespace cftrack {

enum class Visibility { kClear, kPartialOcclusion, kFullOcclusion, kFrameCut, kAbsent };

inline constexpr Visibility kAllVisibilities[] = {Visibility::kClear, Visibility::kPartialOcclusion,
                                                  Visibility::kFullOcclusion, Visibility::kFrameCut,
                                                  Visibility::kAbsent};

// "CL", "PO", "FO", "FC", "AB"
const char* to_string(Visibility v);
std::optional<Visibility> parse_visibility(std::string_view token);

struct FrameAnnotation {
  std::optional<Box> box;  // empty iff visibility == kAbsent
  Visibility visibility = Visibility::kClear;

  bool operator==(const FrameAnnotation&) const = default;
};

// Label thresholds on the fraction of the target box covered / outside the frame.
inline constexpr double kPartialOcclusionFraction = 0.20;
inline constexpr double kFullOcclusionFraction = 0.95;
inline constexpr double kFrameCutFraction = 0.10;

// Visibility from exact geometry: absent if the centre leaves the frame, then
// full / partial occlusion by the occluder, then frame cut, else clear.
Visibility classify_visibility(const Box& target, const std::optional<Box>& occluder, int frame_width,
                               int frame_height);

struct SyntheticSceneConfig {
  int frame_width = 384;
  int frame_height = 384;
  int length = 100;
  int num_distractors = 2;
  bool occluder_enabled = true;
  int occlusion_events = 2;
  int exit_events = 1;
  double motion_noise = 0.6;  // px/frame^2 velocity noise
  double target_min_size = 36.0;
  double target_max_size = 56.0;
  std::uint64_t seed = 1;

  void validate() const;
};

// Generator-side geometry kept alongside the rendered frames (not persisted).
struct SceneTruth {
  std::vector<Box> target;                  // unclipped target box per frame
  std::vector<std::optional<Box>> occluder;  // occluder rectangle per frame, if on screen
};

struct Sequence {
  std::string id;
  std::uint64_t seed = 0;
  std::vector<Image> frames;
  std::vector<FrameAnnotation> annotations;
  SceneTruth truth;

  int length() const { return static_cast<int>(frames.size()); }
  int frame_width() const { return frames.empty() ? 0 : frames.front().width(); }
  int frame_height() const { return frames.empty() ? 0 : frames.front().height(); }
};

// Frames and annotations only; generator truth is ignored.
bool same_content(const Sequence& a, const Sequence& b);

Sequence generate_sequence(const SyntheticSceneConfig& config);

// Maps between frame pixels and a square crop of side context * sqrt(w*h)
// centred on the box, resized to out_size.
struct CropTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double scale = 1.0;  // crop pixels per frame pixel

  Box to_crop(const Box& frame_box) const;
  Box to_frame(const Box& crop_box) const;
};

CropTransform crop_transform(const Box& box, double context_factor, int out_size);

// [3,out,out] floats in [0,1]; bilinear sampling, zero outside the frame.
Tensor<float> crop_patch(const Image& frame, const Box& box, double context_factor, int out_size);
Tensor<float> crop_patch(const Image& frame, const CropTransform& transform, int out_size);

inline constexpr double kTemplateContext = 2.0;
inline constexpr double kSearchContext = 2.0 * 272.0 / 144.0;

void flip_horizontal(Tensor<float>& patch, Box& box);
void apply_brightness(Tensor<float>& patch, double factor);

struct Augmented {
  Tensor<float> patch;
  Box box;
  bool flipped = false;
  double brightness = 1.0;
};

// Horizontal flip with probability 0.5, brightness factor uniform in [0.6, 1.4].
Augmented augment(const Tensor<float>& patch, const Box& box, std::uint64_t seed);

// Layout: frames/frame_%06d.ppm, groundtruth.txt, meta.txt.
void save_sequence(const Sequence& sequence, const std::filesystem::path& directory);
Sequence load_sequence(const std::filesystem::path& directory);

// "x,y,w,h,VIS"; absent frames are "NaN,NaN,NaN,NaN,AB". line_number is for messages.
FrameAnnotation parse_annotation_line(std::string_view line, int line_number);
std::string format_annotation_line(const FrameAnnotation& annotation);

std::string format_double(double value);

// Sequence i gets seed derive_seed(seed, i) and id "seq_%04d".
std::vector<Sequence> generate_dataset(const SyntheticSceneConfig& base, int count, std::uint64_t seed);
// One sub-directory per sequence plus manifest.txt ("id seed" per line).
void save_dataset(std::span<const Sequence> sequences, const std::filesystem::path& directory);
std::vector<Sequence> load_dataset(const std::filesystem::path& directory);

}  // namespace cftrack
