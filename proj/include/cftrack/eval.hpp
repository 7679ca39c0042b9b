#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cftrack/tracker.hpp"

namespace cftrack {

// Intersection over union; 0 when the union is empty or either box is not finite.
double iou(const Box& a, const Box& b);

inline constexpr int kSuccessThresholds = 101;

// Fraction of values with IoU > tau for tau = 0.00, 0.01, ..., 1.00.
std::vector<double> success_curve(std::span<const double> ious);
// Mean of success_curve. Throws Error("eval.empty") on empty input.
double success_auc(std::span<const double> ious);

// Centre location error; +inf when either box is not finite.
double cle(const Box& a, const Box& b);
// Fraction of errors <= threshold. Throws Error("eval.empty") on empty input.
double precision_at(double threshold, std::span<const double> errors);

inline constexpr double kPrecisionThreshold = 20.0;
inline constexpr double kReinitIou = 0.8;

enum class Protocol { kOffline, kOnline };

const char* to_string(Protocol p);
Protocol parse_protocol(std::string_view name);

// Raw output of one protocol run over one sequence: one result per frame and
// the frames where the tracker was (re)initialised from ground truth.
struct SequenceRun {
  std::string sequence_id;
  std::vector<TrackResult> results;
  std::vector<int> init_frames;
  int reinit_count = 0;
};

// Offline: init on frame 0, then track every remaining frame.
SequenceRun run_offline(FrameTracker& tracker, const Sequence& sequence);

// Online: init on frame 0. A tracked frame with visible ground truth and
// IoU < 0.8 counts a reinit; the tracker is re-initialised from ground truth
// on the next frame that has it, and that frame is not tracked. Absent frames
// never trigger a reinit. Init frames are reported as the ground-truth box
// with score, confidence and presence 1.
SequenceRun run_online(FrameTracker& tracker, const Sequence& sequence);

struct EvalReport {
  Protocol protocol = Protocol::kOffline;
  int sequences = 0;
  int frames_evaluated = 0;  // tracked frames with visible ground truth
  double auc = 0.0;
  double precision_at_20 = 0.0;
  double mean_iou = 0.0;
  int reinit_count = 0;
  std::array<double, 5> mean_confidence{};  // indexed by Visibility; NaN when a class has no frames
  std::array<int, 5> confidence_frames{};
  int absent_frames = 0;
  double absence_accuracy = 0.0;  // NaN when there are no absent frames
  std::vector<double> success;    // success_curve of the IoU pool
  double fps = 0.0;
  double fps_stddev = 0.0;
  std::uint64_t param_count = 0;
  std::uint64_t mac_count = 0;
};

// Statistics over tracked (non-init) frames: IoU/CLE pool over frames whose
// ground truth is visible, per-visibility mean confidence, absence accuracy
// over absent frames (correct when present = 0).
EvalReport aggregate_report(std::span<const Sequence> sequences, std::span<const SequenceRun> runs,
                            Protocol protocol);

EvalReport evaluate(FrameTracker& tracker, std::span<const Sequence> sequences, Protocol protocol,
                    std::vector<SequenceRun>* runs_out = nullptr);

std::string to_key_value(const EvalReport& report);
std::string to_json(const EvalReport& report);
// Writes FILE (key=value), FILE.json, and the two SVG plots next to it.
void write_report(const EvalReport& report, const std::filesystem::path& path);
std::string success_plot_svg(const EvalReport& report);
std::string confidence_plot_svg(const EvalReport& report);

// Init frame list written alongside results files ("frame" per line).
void write_init_frames(const std::vector<int>& frames, const std::filesystem::path& path);
std::vector<int> read_init_frames(const std::filesystem::path& path);

struct LayerRow {
  std::string name;
  std::string kind;  // conv, depthwise, pointwise, fc, correlation
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int out_height = 0;
  int out_width = 0;
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
};

// Closed-form per-layer counts for one template + search forward pass
// including both CFM embeddings. Correlation MACs are C * positions * S*S.
std::vector<LayerRow> architecture_table(const ModelConfig& config);
std::string format_architecture_table(const std::vector<LayerRow>& rows);

std::uint64_t count_params(const TrackerModel<float>& model);
// Multiply-accumulates measured by running the forward pass once.
std::uint64_t count_flops(const TrackerModel<float>& model);

struct FpsResult {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> runs;
};

// track_frame throughput over a generated sequence after 5 warm-up frames, 3 runs.
FpsResult fps_bench(const TrackerModel<float>& model, int num_frames, std::uint64_t seed,
                    const TrackerConfig& config = {});

}  // namespace cftrack
