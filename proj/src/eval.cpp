#include "cftrack/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cftrack/error.hpp"

namespace cftrack {

double iou(const Box& a, const Box& b) {
  if (!a.finite() || !b.finite()) return 0.0;
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::vector<double> success_curve(std::span<const double> ious) {
  if (ious.empty()) throw Error("eval.empty", "success curve of an empty IoU list");
  std::vector<double> curve(kSuccessThresholds);
  for (int t = 0; t < kSuccessThresholds; ++t) {
    const double tau = t / 100.0;
    std::size_t n = 0;
    for (double v : ious) n += v > tau;
    curve[t] = static_cast<double>(n) / static_cast<double>(ious.size());
  }
  return curve;
}

double success_auc(std::span<const double> ious) {
  const auto curve = success_curve(ious);
  double s = 0.0;
  for (double v : curve) s += v;
  return s / kSuccessThresholds;
}

double cle(const Box& a, const Box& b) {
  if (!a.finite() || !b.finite()) return std::numeric_limits<double>::infinity();
  return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

double precision_at(double threshold, std::span<const double> errors) {
  if (errors.empty()) throw Error("eval.empty", "precision of an empty error list");
  std::size_t n = 0;
  for (double e : errors) n += e <= threshold;
  return static_cast<double>(n) / static_cast<double>(errors.size());
}

const char* to_string(Protocol p) { return p == Protocol::kOffline ? "offline" : "online"; }

Protocol parse_protocol(std::string_view name) {
  if (name == "offline") return Protocol::kOffline;
  if (name == "online") return Protocol::kOnline;
  throw Error("usage", "unknown protocol '" + std::string(name) + "' (expected offline or online)");
}

namespace {

const Box& first_box(const Sequence& s) {
  if (s.annotations.empty() || s.annotations.size() != s.frames.size()) {
    throw Error("eval.unannotated", "sequence " + s.id + " has no annotations for its frames");
  }
  if (!s.annotations.front().box) {
    throw Error("eval.unannotated", "sequence " + s.id + " has no visible target on frame 0");
  }
  return *s.annotations.front().box;
}

TrackResult init_result(int frame, const Box& box) {
  TrackResult r;
  r.frame_index = frame;
  r.box = box;
  r.score = 1.0;
  r.similarity = 1.0;
  r.confidence = 1.0;
  r.present = true;
  return r;
}

}  // namespace

SequenceRun run_offline(FrameTracker& tracker, const Sequence& sequence) {
  const Box& box0 = first_box(sequence);
  SequenceRun run;
  run.sequence_id = sequence.id;
  tracker.init(sequence.frames[0], box0, 0);
  run.results.push_back(init_result(0, box0));
  run.init_frames.push_back(0);
  for (int t = 1; t < sequence.length(); ++t) run.results.push_back(tracker.track(sequence.frames[t], t));
  return run;
}

SequenceRun run_online(FrameTracker& tracker, const Sequence& sequence) {
  const Box& box0 = first_box(sequence);
  SequenceRun run;
  run.sequence_id = sequence.id;
  tracker.init(sequence.frames[0], box0, 0);
  run.results.push_back(init_result(0, box0));
  run.init_frames.push_back(0);
  bool pending = false;
  for (int t = 1; t < sequence.length(); ++t) {
    const auto& gt = sequence.annotations[t].box;
    if (pending && gt) {
      tracker.init(sequence.frames[t], *gt, t);
      run.results.push_back(init_result(t, *gt));
      run.init_frames.push_back(t);
      pending = false;
      continue;
    }
    TrackResult r = tracker.track(sequence.frames[t], t);
    if (gt && !pending && iou(r.box, *gt) < kReinitIou) {
      ++run.reinit_count;
      pending = true;
    }
    run.results.push_back(r);
  }
  return run;
}

EvalReport aggregate_report(std::span<const Sequence> sequences, std::span<const SequenceRun> runs,
                            Protocol protocol) {
  if (sequences.size() != runs.size()) throw Error("eval.mismatch", "sequence and run counts differ");
  EvalReport rep;
  rep.protocol = protocol;
  rep.sequences = static_cast<int>(sequences.size());
  std::vector<double> ious, errors;
  std::array<double, 5> conf_sum{};
  int absent_correct = 0;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const Sequence& seq = sequences[s];
    const SequenceRun& run = runs[s];
    if (run.results.size() != seq.annotations.size()) {
      throw Error("eval.mismatch", "sequence " + seq.id + ": " + std::to_string(run.results.size()) +
                                       " results for " + std::to_string(seq.annotations.size()) + " frames");
    }
    const std::set<int> inits(run.init_frames.begin(), run.init_frames.end());
    for (std::size_t t = 0; t < run.results.size(); ++t) {
      if (inits.count(static_cast<int>(t))) continue;
      const FrameAnnotation& a = seq.annotations[t];
      const TrackResult& r = run.results[t];
      const auto v = static_cast<std::size_t>(a.visibility);
      conf_sum[v] += r.confidence;
      rep.confidence_frames[v] += 1;
      if (!a.box) {
        rep.absent_frames += 1;
        absent_correct += r.present ? 0 : 1;
        continue;
      }
      ious.push_back(iou(r.box, *a.box));
      errors.push_back(cle(r.box, *a.box));
    }
    rep.reinit_count += run.reinit_count;
  }
  if (ious.empty()) throw Error("eval.empty", "no tracked frames with a visible target");
  rep.frames_evaluated = static_cast<int>(ious.size());
  rep.success = success_curve(ious);
  rep.auc = success_auc(ious);
  rep.precision_at_20 = precision_at(kPrecisionThreshold, errors);
  double sum = 0.0;
  for (double v : ious) sum += v;
  rep.mean_iou = sum / static_cast<double>(ious.size());
  for (std::size_t v = 0; v < 5; ++v) {
    rep.mean_confidence[v] = rep.confidence_frames[v] > 0 ? conf_sum[v] / rep.confidence_frames[v]
                                                          : std::numeric_limits<double>::quiet_NaN();
  }
  rep.absence_accuracy = rep.absent_frames > 0 ? static_cast<double>(absent_correct) / rep.absent_frames
                                               : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

EvalReport evaluate(FrameTracker& tracker, std::span<const Sequence> sequences, Protocol protocol,
                    std::vector<SequenceRun>* runs_out) {
  std::vector<SequenceRun> runs;
  for (const auto& s : sequences) {
    runs.push_back(protocol == Protocol::kOffline ? run_offline(tracker, s) : run_online(tracker, s));
  }
  EvalReport rep = aggregate_report(sequences, runs, protocol);
  if (runs_out) *runs_out = std::move(runs);
  return rep;
}

std::string to_key_value(const EvalReport& r) {
  std::ostringstream o;
  o << "protocol=" << to_string(r.protocol) << '\n'
    << "sequences=" << r.sequences << '\n'
    << "frames_evaluated=" << r.frames_evaluated << '\n'
    << "auc=" << format_double(r.auc) << '\n'
    << "precision_at_20=" << format_double(r.precision_at_20) << '\n'
    << "mean_iou=" << format_double(r.mean_iou) << '\n'
    << "reinit_count=" << r.reinit_count << '\n';
  for (Visibility v : kAllVisibilities) {
    const auto i = static_cast<std::size_t>(v);
    o << "confidence_" << to_string(v) << '=' << format_double(r.mean_confidence[i]) << '\n'
      << "frames_" << to_string(v) << '=' << r.confidence_frames[i] << '\n';
  }
  o << "absent_frames=" << r.absent_frames << '\n'
    << "absence_accuracy=" << format_double(r.absence_accuracy) << '\n'
    << "fps=" << format_double(r.fps) << '\n'
    << "fps_stddev=" << format_double(r.fps_stddev) << '\n'
    << "params=" << r.param_count << '\n'
    << "macs=" << r.mac_count << '\n';
  return o.str();
}

std::string to_json(const EvalReport& r) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json conf = json::object();
  json frames = json::object();
  for (Visibility v : kAllVisibilities) {
    conf[to_string(v)] = num(r.mean_confidence[static_cast<std::size_t>(v)]);
    frames[to_string(v)] = r.confidence_frames[static_cast<std::size_t>(v)];
  }
  json j = {{"protocol", to_string(r.protocol)},
            {"sequences", r.sequences},
            {"frames_evaluated", r.frames_evaluated},
            {"auc", num(r.auc)},
            {"precision_at_20", num(r.precision_at_20)},
            {"mean_iou", num(r.mean_iou)},
            {"reinit_count", r.reinit_count},
            {"mean_confidence", conf},
            {"confidence_frames", frames},
            {"absent_frames", r.absent_frames},
            {"absence_accuracy", num(r.absence_accuracy)},
            {"success_curve", r.success},
            {"fps", num(r.fps)},
            {"fps_stddev", num(r.fps_stddev)},
            {"params", r.param_count},
            {"macs", r.mac_count}};
  return j.dump(2);
}

std::string success_plot_svg(const EvalReport& r) {
  constexpr int W = 420, H = 320, L = 50, T = 20, PW = 340, PH = 250;
  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << PW << "\" height=\"" << PH
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < r.success.size(); ++i) {
    o << L + PW * (i / 100.0) << ',' << T + PH * (1.0 - r.success[i]) << ' ';
  }
  o << "\"/>\n";
  o << "<text x=\"" << L + PW / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">IoU threshold</text>\n"
    << "<text x=\"" << L + 10 << "\" y=\"" << T + 15 << "\" font-size=\"12\">AUC " << std::setprecision(3) << r.auc
    << "</text>\n"
    << "<text x=\"" << L - 5 << "\" y=\"" << T + 5 << "\" text-anchor=\"end\" font-size=\"10\">1</text>\n"
    << "<text x=\"" << L - 5 << "\" y=\"" << T + PH << "\" text-anchor=\"end\" font-size=\"10\">0</text>\n"
    << "</svg>\n";
  return o.str();
}

std::string confidence_plot_svg(const EvalReport& r) {
  constexpr int W = 420, H = 320, L = 50, T = 20, PW = 340, PH = 250;
  // Column order: FO, PO, FC, AB, CL.
  const Visibility order[] = {Visibility::kFullOcclusion, Visibility::kPartialOcclusion, Visibility::kFrameCut,
                              Visibility::kAbsent, Visibility::kClear};
  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<line x1=\"" << L << "\" y1=\"" << T + PH << "\" x2=\"" << L + PW << "\" y2=\"" << T + PH
    << "\" stroke=\"black\"/>\n";
  const double slot = PW / 5.0;
  for (int i = 0; i < 5; ++i) {
    const double v = r.mean_confidence[static_cast<std::size_t>(order[i])];
    const double h = std::isfinite(v) ? PH * std::clamp(v, 0.0, 1.0) : 0.0;
    const double x = L + slot * i + slot * 0.2;
    o << "<rect x=\"" << x << "\" y=\"" << T + PH - h << "\" width=\"" << slot * 0.6 << "\" height=\"" << h
      << "\" fill=\"#1f5fbf\"/>\n"
      << "<text x=\"" << x + slot * 0.3 << "\" y=\"" << T + PH + 15 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << to_string(order[i]) << "</text>\n";
    if (std::isfinite(v)) {
      o << "<text x=\"" << x + slot * 0.3 << "\" y=\"" << T + PH - h - 4
        << "\" text-anchor=\"middle\" font-size=\"10\">" << v << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

namespace {
void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}
}  // namespace

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  write_text(path, to_key_value(report));
  auto with_suffix = [&](const std::string& s) {
    auto p = path;
    p += s;
    return p;
  };
  write_text(with_suffix(".json"), to_json(report));
  if (!report.success.empty()) write_text(with_suffix(".success.svg"), success_plot_svg(report));
  write_text(with_suffix(".confidence.svg"), confidence_plot_svg(report));
}

void write_init_frames(const std::vector<int>& frames, const std::filesystem::path& path) {
  std::ostringstream o;
  for (int f : frames) o << f << '\n';
  write_text(path, o.str());
}

std::vector<int> read_init_frames(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<int> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(std::stoi(line));
    } catch (const std::exception&) {
      throw ParseError(path.string() + ": bad frame index '" + line + "'");
    }
  }
  return out;
}

namespace {

int out_size(int size, int k, int stride) { return (size + 2 * (k / 2) - k) / stride + 1; }

struct TableBuilder {
  std::vector<LayerRow>& rows;

  void conv(const std::string& name, int cin, int cout, int k, int stride, int& size, bool shared) {
    const int o = out_size(size, k, stride);
    rows.push_back({name, "conv", cin, cout, k, o, o,
                    shared ? 0 : static_cast<std::uint64_t>(cout) * cin * k * k + cout,
                    static_cast<std::uint64_t>(cout) * cin * k * k * o * o});
    size = o;
  }

  void separable(const std::string& name, int cin, int cout, int k, int stride, int& size, bool shared) {
    const int o = out_size(size, k, stride);
    rows.push_back({name + ".dw", "depthwise", cin, cin, k, o, o,
                    shared ? 0 : static_cast<std::uint64_t>(cin) * k * k + cin,
                    static_cast<std::uint64_t>(cin) * k * k * o * o});
    rows.push_back({name + ".pw", "pointwise", cin, cout, 1, o, o,
                    shared ? 0 : static_cast<std::uint64_t>(cout) * cin + cout,
                    static_cast<std::uint64_t>(cout) * cin * o * o});
    size = o;
  }

  void fc(const std::string& name, int in, int out) {
    rows.push_back({name, "fc", in, out, 1, 1, 1, static_cast<std::uint64_t>(out) * in + out,
                    static_cast<std::uint64_t>(out) * in});
  }
};

}  // namespace

std::vector<LayerRow> architecture_table(const ModelConfig& config) {
  config.validate();
  const BackboneConfig& bb = config.backbone;
  std::vector<LayerRow> rows;
  TableBuilder b{rows};
  for (int pass = 0; pass < 2; ++pass) {
    const bool shared = pass == 1;
    const std::string tag = shared ? "[search]" : "[template]";
    int size = shared ? bb.search_size : bb.template_size;
    b.conv("backbone.stem" + tag, bb.input_channels, bb.widths[0], bb.kernels[0], bb.strides[0], size, shared);
    for (std::size_t i = 1; i < bb.widths.size(); ++i) {
      b.separable("backbone.stage" + std::to_string(i) + tag, bb.widths[i - 1], bb.widths[i], bb.kernels[i],
                  bb.strides[i], size, shared);
    }
  }
  const int s = bb.search_feature_size();
  const int positions = config.fused_channels();
  rows.push_back({"fusion.correlation", "correlation", bb.output_channels(), positions, 1, s, s, 0,
                  static_cast<std::uint64_t>(positions) * bb.output_channels() * s * s});
  b.fc("fusion.fc1", positions, config.attention_hidden);
  b.fc("fusion.fc2", config.attention_hidden, positions);
  for (const auto& [branch, out] : {std::pair<std::string, int>{"heads.cls", 1}, {"heads.box", 4}}) {
    int size = s;
    b.separable(branch + ".0", positions, config.head_width, 3, 1, size, false);
    b.separable(branch + ".1", config.head_width, config.head_width, 3, 1, size, false);
    b.separable(branch + ".2", config.head_width, out, 5, 1, size, false);
  }
  for (int pass = 0; pass < 2; ++pass) {
    const bool shared = pass == 1;
    const std::string tag = shared ? "[search]" : "[template]";
    int size = bb.template_feature_size();
    b.separable("cfm.embed.0" + tag, bb.output_channels(), config.embed_hidden, 3, 1, size, shared);
    b.separable("cfm.embed.1" + tag, config.embed_hidden, config.embed_dim, 3, 1, size, shared);
  }
  return rows;
}

std::string format_architecture_table(const std::vector<LayerRow>& rows) {
  std::ostringstream o;
  o << std::left << std::setw(30) << "layer" << std::setw(12) << "kind" << std::right << std::setw(6) << "in"
    << std::setw(6) << "out" << std::setw(4) << "k" << std::setw(8) << "output" << std::setw(10) << "params"
    << std::setw(12) << "MACs" << '\n';
  std::uint64_t params = 0, macs = 0;
  for (const auto& r : rows) {
    o << std::left << std::setw(30) << r.name << std::setw(12) << r.kind << std::right << std::setw(6)
      << r.in_channels << std::setw(6) << r.out_channels << std::setw(4) << r.kernel << std::setw(8)
      << (std::to_string(r.out_height) + "x" + std::to_string(r.out_width)) << std::setw(10) << r.params
      << std::setw(12) << r.macs << '\n';
    params += r.params;
    macs += r.macs;
  }
  o << std::left << std::setw(66) << "total" << std::right << std::setw(10) << params << std::setw(12) << macs
    << '\n';
  return o.str();
}

std::uint64_t count_params(const TrackerModel<float>& model) { return model.parameter_count(); }

std::uint64_t count_flops(const TrackerModel<float>& model) {
  NoGradGuard no_grad;
  const auto& bb = model.config().backbone;
  const Tensor<float> z_in({bb.input_channels, bb.template_size, bb.template_size}, 0.5f);
  const Tensor<float> x_in({bb.input_channels, bb.search_size, bb.search_size}, 0.5f);
  ops::MacCounter counter;
  const FeatureMap<float> z = model.template_features(z_in);
  const FeatureMap<float> x = model.search_features(x_in);
  model.predict(model.fuse(z, x));
  model.embed_template(z);
  const int c = bb.search_feature_size() / 2;
  model.embed_search(x, c, c);
  return counter.count();
}

FpsResult fps_bench(const TrackerModel<float>& model, int num_frames, std::uint64_t seed,
                    const TrackerConfig& config) {
  if (num_frames < 10) throw ConfigError("fps benchmark needs at least 10 frames");
  constexpr int kWarmup = 5;
  constexpr int kRuns = 3;
  SyntheticSceneConfig scene;
  scene.seed = seed;
  scene.length = num_frames + kWarmup + 1;
  const Sequence seq = generate_sequence(scene);
  FpsResult res;
  for (int run = 0; run < kRuns; ++run) {
    ModelTracker tracker(model, config);
    tracker.init(seq.frames[0], *seq.annotations[0].box, 0);
    for (int t = 1; t <= kWarmup; ++t) tracker.track(seq.frames[t], t);
    const auto start = std::chrono::steady_clock::now();
    for (int t = kWarmup + 1; t < seq.length(); ++t) tracker.track(seq.frames[t], t);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    res.runs.push_back(num_frames / secs);
  }
  double sum = 0.0;
  for (double v : res.runs) sum += v;
  res.mean = sum / kRuns;
  double var = 0.0;
  for (double v : res.runs) var += (v - res.mean) * (v - res.mean);
  res.stddev = std::sqrt(var / kRuns);
  return res;
}

}  // namespace cftrack
