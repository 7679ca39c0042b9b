#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cftrack/model.hpp"

namespace cftrack {

struct TrackerConfig {
  double presence_threshold = 0.8;
  bool use_cfm = true;
  double template_context = kTemplateContext;
  double search_context = kSearchContext;

  void validate() const;
};

struct TrackState {
  bool initialized = false;
  FeatureMap<float> template_features{Role::kTemplate, {}};
  Embedding<float> template_embedding;
  Box last_box;  // frame pixels; last confident location
  double last_confidence = 1.0;
  bool present = false;
  int frame_index = 0;
  int frame_width = 0;
  int frame_height = 0;
};

struct TrackResult {
  int frame_index = 0;
  Box box;  // frame pixels; NaN when no valid box could be decoded
  double score = 0.0;
  double similarity = 1.0;
  double confidence = 0.0;
  bool present = false;
};

// Template crop at the template context, features and embedding computed once.
TrackState init_track(const Image& frame, const Box& box, const TrackerModel<float>& model,
                      const TrackerConfig& config, int frame_index = 0);

// Search crop centred on the last confident box, argmax cell (first in
// row-major order on ties), box decoded at that cell, CFM embedding of the
// window at the same cell. The state's box is only moved when the result is
// present; otherwise the result reports the retained box with present = false.
TrackResult track_frame(TrackState& state, const Image& frame, const TrackerModel<float>& model,
                        const TrackerConfig& config);

// Same as init_track at this frame.
TrackState reinit_track(const Image& frame, const Box& gt_box, const TrackerModel<float>& model,
                        const TrackerConfig& config, int frame_index);

// Interface the evaluation protocols drive.
class FrameTracker {
 public:
  virtual ~FrameTracker() = default;
  virtual void init(const Image& frame, const Box& box, int frame_index) = 0;
  virtual TrackResult track(const Image& frame, int frame_index) = 0;
};

class ModelTracker : public FrameTracker {
 public:
  ModelTracker(const TrackerModel<float>& model, TrackerConfig config);

  void init(const Image& frame, const Box& box, int frame_index) override;
  TrackResult track(const Image& frame, int frame_index) override;

  const TrackState& state() const { return state_; }

 private:
  const TrackerModel<float>& model_;
  TrackerConfig config_;
  TrackState state_;
};

// Results file: one "frame_idx,x,y,w,h,score,confidence,present" line per frame.
std::string format_result_line(const TrackResult& r);
TrackResult parse_result_line(std::string_view line, int line_number);
void write_results(const std::vector<TrackResult>& results, const std::filesystem::path& path);
std::vector<TrackResult> read_results(const std::filesystem::path& path);

// Copy of the frame with the box outline drawn: blue when confidence >= threshold, red otherwise.
Image draw_overlay(const Image& frame, const TrackResult& result, double threshold);

}  // namespace cftrack
