#include "cftrack/tracker.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "cftrack/error.hpp"

namespace cftrack {

void TrackerConfig::validate() const {
  if (!(presence_threshold >= 0.0 && presence_threshold <= 1.0)) {
    throw ConfigError("presence_threshold must lie in [0,1], got " + format_double(presence_threshold));
  }
  if (!(template_context > 0.0) || !(search_context > 0.0)) throw ConfigError("crop context factors must be positive");
}

TrackState init_track(const Image& frame, const Box& box, const TrackerModel<float>& model,
                      const TrackerConfig& config, int frame_index) {
  if (!box.valid()) {
    throw DegenerateInputError("tracker init: degenerate box " + format_double(box.w) + "x" + format_double(box.h));
  }
  NoGradGuard no_grad;
  const int size = model.config().backbone.template_size;
  TrackState s;
  s.template_features = model.template_features(crop_patch(frame, box, config.template_context, size));
  s.template_embedding = model.embed_template(s.template_features);
  s.last_box = box;
  s.last_confidence = 1.0;
  s.present = true;
  s.frame_index = frame_index;
  s.frame_width = frame.width();
  s.frame_height = frame.height();
  s.initialized = true;
  return s;
}

TrackState reinit_track(const Image& frame, const Box& gt_box, const TrackerModel<float>& model,
                        const TrackerConfig& config, int frame_index) {
  return init_track(frame, gt_box, model, config, frame_index);
}

TrackResult track_frame(TrackState& state, const Image& frame, const TrackerModel<float>& model,
                        const TrackerConfig& config) {
  if (!state.initialized) throw Error("tracker.uninitialized", "track_frame called before init");
  if (frame.width() != state.frame_width || frame.height() != state.frame_height) {
    throw Error("tracker.frame_size", "frame " + std::to_string(frame.width()) + "x" + std::to_string(frame.height()) +
                                          " differs from init frame " + std::to_string(state.frame_width) + "x" +
                                          std::to_string(state.frame_height));
  }
  NoGradGuard no_grad;
  const int size = model.config().backbone.search_size;
  const int stride = model.config().backbone.total_stride();
  const CropTransform transform = crop_transform(state.last_box, config.search_context, size);
  const FeatureMap<float> x = model.search_features(crop_patch(frame, transform, size));
  const HeadOutputs<float> out = model.predict(model.fuse(state.template_features, x));

  const auto cls = out.cls_map.data();
  std::size_t best = 0;
  for (std::size_t i = 1; i < cls.size(); ++i) {
    if (cls[i] > cls[best]) best = i;
  }
  const int cols = out.cls_map.dim(2);
  const int row = static_cast<int>(best) / cols;
  const int col = static_cast<int>(best) % cols;

  TrackResult r;
  state.frame_index += 1;
  r.frame_index = state.frame_index;
  r.score = cls[best];
  if (config.use_cfm) {
    const Embedding<float> e = model.embed_search(x, row, col);
    r.similarity = cosine_similarity(state.template_embedding.data, e.data).item();
    r.confidence = confidence(r.similarity, r.score);
  } else {
    r.similarity = 1.0;
    r.confidence = r.score;
  }
  r.present = r.confidence >= config.presence_threshold;

  const DecodedBox decoded = decode_box(out.box_map, row, col, stride);
  if (r.present && decoded.valid) {
    state.last_box = transform.to_frame(decoded.box);
    state.last_confidence = r.confidence;
  }
  state.present = r.present;
  if (r.present && !decoded.valid) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    r.box = Box{nan, nan, nan, nan};
  } else {
    r.box = state.last_box;
  }
  return r;
}

ModelTracker::ModelTracker(const TrackerModel<float>& model, TrackerConfig config)
    : model_(model), config_(config) {
  config_.validate();
}

void ModelTracker::init(const Image& frame, const Box& box, int frame_index) {
  state_ = init_track(frame, box, model_, config_, frame_index);
}

TrackResult ModelTracker::track(const Image& frame, int frame_index) {
  state_.frame_index = frame_index - 1;
  return track_frame(state_, frame, model_, config_);
}

std::string format_result_line(const TrackResult& r) {
  return std::to_string(r.frame_index) + "," + format_double(r.box.x) + "," + format_double(r.box.y) + "," +
         format_double(r.box.w) + "," + format_double(r.box.h) + "," + format_double(r.score) + "," +
         format_double(r.confidence) + "," + (r.present ? "1" : "0");
}

TrackResult parse_result_line(std::string_view line, int line_number) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  const std::string where = "results line " + std::to_string(line_number);
  if (fields.size() != 8) throw ParseError(where + ": expected 8 fields, got " + std::to_string(fields.size()));
  auto number = [&](const std::string& s) {
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ParseError(where + ": bad number '" + s + "'");
    return v;
  };
  TrackResult r;
  r.frame_index = static_cast<int>(number(fields[0]));
  r.box = Box{number(fields[1]), number(fields[2]), number(fields[3]), number(fields[4])};
  r.score = number(fields[5]);
  r.confidence = number(fields[6]);
  if (fields[7] != "0" && fields[7] != "1") throw ParseError(where + ": present flag '" + fields[7] + "'");
  r.present = fields[7] == "1";
  return r;
}

void write_results(const std::vector<TrackResult>& results, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& r : results) out << format_result_line(r) << '\n';
  if (!out) throw IoError("short write to " + path.string());
}

std::vector<TrackResult> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<TrackResult> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty()) out.push_back(parse_result_line(line, n));
  }
  return out;
}

Image draw_overlay(const Image& frame, const TrackResult& result, double threshold) {
  Image img = frame;
  if (!result.box.valid()) return img;
  const bool confident = result.confidence >= threshold;
  const std::uint8_t color[3] = {static_cast<std::uint8_t>(confident ? 0 : 255), 0,
                                 static_cast<std::uint8_t>(confident ? 255 : 0)};
  const int x0 = static_cast<int>(std::floor(result.box.x)), y0 = static_cast<int>(std::floor(result.box.y));
  const int x1 = static_cast<int>(std::floor(result.box.right())), y1 = static_cast<int>(std::floor(result.box.bottom()));
  auto put = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
    std::uint8_t* p = img.pixel(x, y);
    for (int k = 0; k < 3; ++k) p[k] = color[k];
  };
  for (int t = 0; t < 2; ++t) {
    for (int x = x0; x <= x1; ++x) {
      put(x, y0 + t);
      put(x, y1 - t);
    }
    for (int y = y0; y <= y1; ++y) {
      put(x0 + t, y);
      put(x1 - t, y);
    }
  }
  return img;
}

}  // namespace cftrack
