// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: cftrack_acceptance [criterion numbers...]
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cftrack/config.hpp"
#include "cftrack/error.hpp"
#include "cftrack/eval.hpp"

namespace fs = std::filesystem;
using namespace cftrack;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "ok: " : "FAILED: ") + what);
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
  }
  return files;
}

struct Scratch {
  fs::path path;
  explicit Scratch(const std::string& tag) {
    path = fs::temp_directory_path() / ("cftrack-accept-" + tag + "-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path operator/(const std::string& s) const { return path / s; }
};

// ---------------------------------------------------------------- shared runs

TrainConfig overfit_schedule() {
  TrainConfig c;
  c.epochs = 10;
  c.samples_per_epoch = 400;
  c.batch_size = 8;
  c.learning_rate = 2e-3;
  c.milestones = {7};
  return c;
}

constexpr std::uint64_t kModelSeed = 7;

const std::vector<Sequence>& train_set() {
  static const auto set = generate_dataset(SyntheticSceneConfig{}, 8, 11);
  return set;
}

const std::vector<Sequence>& test_set() {
  static const auto set = [] {
    SyntheticSceneConfig scene;
    scene.occlusion_events = 3;
    scene.exit_events = 0;
    return generate_dataset(scene, 8, 99);
  }();
  return set;
}

struct Trained {
  std::unique_ptr<TrackerModel<float>> model;
  std::vector<StepRecord> history;
  double seconds = 0.0;
};

Trained train_model(bool cfm) {
  auto config = overfit_schedule();
  if (!cfm) config.disable_cfm();
  const auto t0 = Clock::now();
  Trained t;
  t.model = std::make_unique<TrackerModel<float>>(TrackerModel<float>::build(ModelConfig{}, kModelSeed));
  t.history = train(*t.model, train_set(), config);
  t.seconds = seconds_since(t0);
  std::printf("  trained %s model: %zu steps in %.1f s\n", cfm ? "CFM" : "baseline", t.history.size(), t.seconds);
  std::fflush(stdout);
  return t;
}

Trained& cfm_model() {
  static Trained t = train_model(true);
  return t;
}

Trained& baseline_model() {
  static Trained t = train_model(false);
  return t;
}

TrackerConfig tracker_config(bool cfm) {
  TrackerConfig c;
  c.use_cfm = cfm;
  return c;
}

// ---------------------------------------------------------------- independent metric references

// Overlap of [a0,a1] and [b0,b1] summed over the elementary segments between sorted endpoints.
double overlap_1d(double a0, double a1, double b0, double b1) {
  std::vector<double> xs{a0, a1, b0, b1};
  std::sort(xs.begin(), xs.end());
  double total = 0.0;
  for (int i = 0; i + 1 < 4; ++i) {
    const double mid = 0.5 * (xs[i] + xs[i + 1]);
    if (mid >= a0 && mid <= a1 && mid >= b0 && mid <= b1) total += xs[i + 1] - xs[i];
  }
  return total;
}

double reference_iou(const Box& a, const Box& b) {
  if (!a.finite() || !b.finite()) return 0.0;
  const double aw = std::max(0.0, a.w), ah = std::max(0.0, a.h);
  const double bw = std::max(0.0, b.w), bh = std::max(0.0, b.h);
  const double inter = overlap_1d(a.x, a.x + aw, b.x, b.x + bw) * overlap_1d(a.y, a.y + ah, b.y, b.y + bh);
  const double uni = aw * ah + bw * bh - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double reference_auc(const std::vector<double>& ious) {
  double sum = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double tau = i / 100.0;
    long above = 0;
    for (double v : ious) above += v > tau ? 1 : 0;
    sum += static_cast<double>(above) / static_cast<double>(ious.size());
  }
  return sum / 101.0;
}

double reference_cle(const Box& a, const Box& b) {
  const double dx = (a.x + a.w / 2) - (b.x + b.w / 2);
  const double dy = (a.y + a.h / 2) - (b.y + b.h / 2);
  return std::sqrt(dx * dx + dy * dy);
}

double reference_precision(double threshold, const std::vector<double>& errors) {
  long hits = 0;
  for (double e : errors) hits += e <= threshold ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(errors.size());
}

// ---------------------------------------------------------------- stub trackers

class OracleTracker : public FrameTracker {
 public:
  explicit OracleTracker(const Sequence& seq) : seq_(seq) {}
  void init(const Image&, const Box&, int) override {}
  TrackResult track(const Image&, int f) override {
    const auto& a = seq_.annotations[f];
    TrackResult r;
    r.frame_index = f;
    r.box = a.box.value_or(Box{0, 0, 8, 8});
    r.score = a.box ? 0.9 : 0.1;
    r.similarity = a.box ? 0.95 : 0.2;
    r.confidence = r.score * r.similarity;
    r.present = a.box.has_value();
    return r;
  }

 private:
  const Sequence& seq_;
};

// Shifted right by a third of the box width: IoU exactly 0.5 on every visible frame.
class HalfIouTracker : public FrameTracker {
 public:
  explicit HalfIouTracker(const Sequence& seq) : seq_(seq) {}
  void init(const Image&, const Box&, int) override {}
  TrackResult track(const Image&, int f) override {
    const Box gt = seq_.annotations[f].box.value_or(Box{0, 0, 8, 8});
    TrackResult r;
    r.frame_index = f;
    r.box = Box{gt.x + gt.w / 3.0, gt.y, gt.w, gt.h};
    r.score = 0.3 + 0.05 * (f % 9);
    r.similarity = 0.8;
    r.confidence = r.score * r.similarity;
    r.present = true;
    return r;
  }

 private:
  const Sequence& seq_;
};

// Recomputes the headline numbers of a report from raw per-frame results.
struct Recomputed {
  double auc = 0.0;
  double precision = 0.0;
  double mean_iou = 0.0;
  std::array<double, 5> confidence{};
  std::array<int, 5> counts{};
};

Recomputed recompute(const std::vector<Sequence>& seqs, const std::vector<SequenceRun>& runs) {
  Recomputed r;
  std::vector<double> ious, errors;
  std::array<double, 5> sums{};
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    const std::set<int> inits(runs[s].init_frames.begin(), runs[s].init_frames.end());
    for (int t = 0; t < seqs[s].length(); ++t) {
      if (inits.count(t)) continue;
      const auto& a = seqs[s].annotations[t];
      const auto& res = runs[s].results[t];
      sums[static_cast<int>(a.visibility)] += res.confidence;
      r.counts[static_cast<int>(a.visibility)]++;
      if (!a.box) continue;
      ious.push_back(reference_iou(res.box, *a.box));
      errors.push_back(res.box.finite() ? reference_cle(res.box, *a.box) : INFINITY);
    }
  }
  r.auc = reference_auc(ious);
  r.precision = reference_precision(20.0, errors);
  double total = 0.0;
  for (double v : ious) total += v;
  r.mean_iou = total / ious.size();
  for (int v = 0; v < 5; ++v) r.confidence[v] = r.counts[v] ? sums[v] / r.counts[v] : NAN;
  return r;
}

bool close(double a, double b, double tol = 1e-9) {
  return (std::isnan(a) && std::isnan(b)) || std::abs(a - b) <= tol;
}

void compare_report(Outcome& o, const std::string& label, const EvalReport& rep, const Recomputed& ref) {
  bool classes = true;
  for (int v = 0; v < 5; ++v) {
    classes = classes && close(rep.mean_confidence[v], ref.confidence[v]) && rep.confidence_frames[v] == ref.counts[v];
  }
  o.require(close(rep.auc, ref.auc) && close(rep.precision_at_20, ref.precision) &&
                close(rep.mean_iou, ref.mean_iou) && classes,
            label + ": auc/precision/iou/per-class confidence match recomputation within 1e-9 (auc " +
                fmt("%.6f", rep.auc) + ")");
}

// ---------------------------------------------------------------- criteria

Outcome criterion_cfm_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  const MarginParams p{1.0, 1.0, 2.0};
  o.require(adaptive_margin(0.0, p) == 2.0, "m(0) == 2.0 exactly");
  o.require(std::abs(adaptive_margin(2.0, p) - (1.0 + std::exp(-4.0))) <= 1e-9, "m(2) == 1 + e^-4 within 1e-9");

  double worst = 0.0;
  int points = 0;
  for (double d : {0.0, 0.1, 0.35, 0.5, 0.9, 1.0, 1.2, 1.5, 1.9, 2.0}) {
    for (int y : {0, 1}) {
      // Hand-expanded: y*D^2 + (1-y)*max(0, 1 + exp(-2D) - D)^2
      double expected;
      if (y == 1) {
        expected = d * d;
      } else {
        const double hinge = 1.0 + std::exp(-2.0 * d) - d;
        expected = hinge > 0.0 ? hinge * hinge : 0.0;
      }
      worst = std::max(worst, std::abs(adaptive_contrastive_loss(d, y, p) - expected));
      ++points;
    }
  }
  o.require(points == 20 && worst <= 1e-9, "20-point (D,y) grid max |error| " + fmt("%.2e", worst));
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 1.0, "runtime " + fmt("%.4f", elapsed) + " s < 1 s");
  return o;
}

Outcome criterion_gradients() {
  Outcome o;
  const auto t0 = Clock::now();
  const RunConfig cfg;
  SyntheticSceneConfig scene = cfg.scene;
  scene.length = 30;
  const auto dataset = generate_dataset(scene, 2, cfg.gradcheck.seed);
  const auto pos = sample_pairs(dataset, 1, 0.0, cfg.gradcheck.seed);
  const auto neg = sample_pairs(dataset, 1, 1.0, cfg.gradcheck.seed + 1);
  std::vector<TrainingSample> batch{
      prepare_sample(dataset, pos[0], cfg.train, derive_seed(cfg.gradcheck.seed, 10)),
      prepare_sample(dataset, neg[0], cfg.train, derive_seed(cfg.gradcheck.seed, 11))};
  const auto model = TrackerModel<float>::build(ModelConfig{}, cfg.model_seed);

  const auto neg_terms = pair_loss(model, batch[1], cfg.train.weights, cfg.train.margin);
  o.require(batch[1].label == 0 && neg_terms.adapt.item() > 0.0,
            "negative pair sits inside the margin, so the m'(D) path is live (L_adapt " +
                fmt("%.4f", neg_terms.adapt.item()) + ")");

  GradCheckOptions<double> opts;
  opts.h = cfg.gradcheck.h;
  opts.tolerance = cfg.gradcheck.tolerance;
  opts.samples_per_tensor = cfg.gradcheck.samples_per_tensor;
  opts.seed = cfg.gradcheck.seed;
  opts.scale_floor = cfg.gradcheck.scale_floor;
  const auto rep = check_objective_gradients(model, batch, cfg.train.weights, cfg.train.margin, opts);
  std::set<std::string> groups;
  for (const auto& e : rep.entries) groups.insert(e.name.substr(0, e.name.find('.')));
  o.require(rep.entries.size() == model.params().entries().size() && groups.size() == 4,
            std::to_string(rep.entries.size()) + " tensors checked across backbone/fusion/heads/cfm");
  o.require(rep.passed(), "max relative error " + fmt("%.3e", rep.max_relative_error) + " < 1e-3 over " +
                              std::to_string(rep.coordinates) + " coordinates (" + std::to_string(rep.skipped) +
                              " kink skips)");
  const double elapsed = seconds_since(t0);
  o.require(elapsed < 120.0, "runtime " + fmt("%.1f", elapsed) + " s < 2 min");
  return o;
}

Outcome criterion_shapes() {
  Outcome o;
  const auto model = TrackerModel<float>::build(ModelConfig{}, kModelSeed);
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor<float> zp({3, 144, 144}), xp({3, 272, 272});
  for (float& v : zp.data()) v = u(rng);
  for (float& v : xp.data()) v = u(rng);
  const auto z = model.template_features(zp);
  const auto x = model.search_features(xp);
  const auto fused = model.fuse(z, x);
  o.require(fused.data.shape() == Shape{81, 17, 17}, "fused map " + shape_to_string(fused.data.shape()));
  const auto heads = model.predict(fused);
  o.require(heads.cls_map.shape() == Shape{1, 17, 17} && heads.box_map.shape() == Shape{4, 17, 17},
            "heads " + shape_to_string(heads.cls_map.shape()) + " and " + shape_to_string(heads.box_map.shape()));
  const auto et = model.embed_template(z);
  const auto es = model.embed_search(x, 8, 8);
  o.require(et.data.shape() == Shape{256} && es.data.shape() == Shape{256},
            "embeddings " + shape_to_string(et.data.shape()));

  // The tracker runtime performs the same forward pass on real frames.
  const auto& seq = test_set().front();
  ModelTracker tracker(model, TrackerConfig{});
  tracker.init(seq.frames[0], *seq.annotations[0].box, 0);
  tracker.track(seq.frames[1], 1);
  o.require(tracker.state().template_embedding.data.shape() == Shape{256} &&
                tracker.state().template_features.data.shape() == Shape{64, 9, 9},
            "tracker state template (64,9,9) and 256-d embedding");
  return o;
}

Outcome criterion_overfit() {
  Outcome o;
  auto& t = cfm_model();
  const auto& h = t.history;
  double tail = 0.0;
  for (std::size_t i = h.size() - 20; i < h.size(); ++i) tail += h[i].total;
  tail /= 20.0;
  const double ratio = tail / h.front().total;
  o.require(h.size() == 500, std::to_string(h.size()) + " steps");
  o.require(ratio < 0.1, "loss " + fmt("%.4f", h.front().total) + " -> " + fmt("%.4f", tail) + " (mean of last 20), ratio " +
                             fmt("%.4f", ratio) + " < 0.1");
  const auto t0 = Clock::now();
  ModelTracker tracker(*t.model, tracker_config(true));
  const auto rep = evaluate(tracker, train_set(), Protocol::kOffline);
  o.require(rep.mean_iou > 0.6, "offline mean IoU " + fmt("%.4f", rep.mean_iou) + " > 0.6");
  o.require(rep.auc > 0.5, "offline AUC " + fmt("%.4f", rep.auc) + " > 0.5");
  const double elapsed = t.seconds + seconds_since(t0);
  o.require(elapsed < 900.0, "runtime " + fmt("%.0f", elapsed) + " s < 15 min");
  return o;
}

Outcome criterion_confidence() {
  Outcome o;
  auto& cfm = cfm_model();
  auto& base = baseline_model();
  const auto t0 = Clock::now();
  auto online = [&](const TrackerModel<float>& m, bool use_cfm) {
    ModelTracker tracker(m, tracker_config(use_cfm));
    return evaluate(tracker, test_set(), Protocol::kOnline);
  };
  const auto rc = online(*cfm.model, true);
  const auto rb = online(*base.model, false);
  auto conf = [](const EvalReport& r, Visibility v) { return r.mean_confidence[static_cast<int>(v)]; };
  const double cl = conf(rc, Visibility::kClear), po = conf(rc, Visibility::kPartialOcclusion),
               fo = conf(rc, Visibility::kFullOcclusion);
  const double bcl = conf(rb, Visibility::kClear), bfo = conf(rb, Visibility::kFullOcclusion);
  o.require(rc.confidence_frames[static_cast<int>(Visibility::kFullOcclusion)] > 0 &&
                rc.confidence_frames[static_cast<int>(Visibility::kPartialOcclusion)] > 0,
            "held-out set has " + std::to_string(rc.confidence_frames[1]) + " PO and " +
                std::to_string(rc.confidence_frames[2]) + " FO tracked frames");
  o.require(cl > po && po > fo, "CFM confidence CL " + fmt("%.4f", cl) + " > PO " + fmt("%.4f", po) + " > FO " +
                                    fmt("%.4f", fo));
  o.require((cl - fo) - (bcl - bfo) > 0.0, "gap CL-FO: CFM " + fmt("%.4f", cl - fo) + " vs baseline " +
                                               fmt("%.4f", bcl - bfo) + " (baseline CL " + fmt("%.4f", bcl) +
                                               ", FO " + fmt("%.4f", bfo) + ")");
  const double elapsed = cfm.seconds + base.seconds + seconds_since(t0);
  o.require(elapsed < 600.0, "runtime " + fmt("%.0f", elapsed) + " s < 10 min including both trainings");
  return o;
}

Outcome criterion_offline_auc() {
  Outcome o;
  auto offline = [&](const TrackerModel<float>& m, bool use_cfm) {
    ModelTracker tracker(m, tracker_config(use_cfm));
    return evaluate(tracker, test_set(), Protocol::kOffline);
  };
  const auto rc = offline(*cfm_model().model, true);
  const auto rb = offline(*baseline_model().model, false);
  o.require(rc.auc >= rb.auc, "held-out offline AUC: CFM " + fmt("%.4f", rc.auc) + " >= baseline " + fmt("%.4f", rb.auc));
  return o;
}

Outcome criterion_metrics() {
  Outcome o;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(-50.0, 150.0), size(0.0, 80.0), unit(0.0, 1.0);
  double iou_err = 0.0, cle_err = 0.0;
  std::vector<double> ious, errors;
  for (int i = 0; i < 1000; ++i) {
    Box a{pos(rng), pos(rng), size(rng), size(rng)};
    Box b{pos(rng), pos(rng), size(rng), size(rng)};
    if (i % 10 == 0) b = Box{a.x + size(rng) * 0.2, a.y, a.w, a.h};  // near-overlapping pairs
    if (i % 50 == 0) b = a;
    iou_err = std::max(iou_err, std::abs(iou(a, b) - reference_iou(a, b)));
    cle_err = std::max(cle_err, std::abs(cle(a, b) - reference_cle(a, b)));
    ious.push_back(reference_iou(a, b));
    errors.push_back(reference_cle(a, b));
  }
  o.require(iou_err <= 1e-9, "iou max |error| " + fmt("%.2e", iou_err) + " over 1000 pairs");
  o.require(cle_err <= 1e-9, "cle max |error| " + fmt("%.2e", cle_err) + " over 1000 pairs");

  double auc_err = 0.0, prec_err = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> list(50 + trial * 47);
    for (double& v : list) v = unit(rng);
    auc_err = std::max(auc_err, std::abs(success_auc(list) - reference_auc(list)));
    std::vector<double> errs(list.size());
    for (double& e : errs) e = 40.0 * unit(rng);
    prec_err = std::max(prec_err, std::abs(precision_at(20.0, errs) - reference_precision(20.0, errs)));
  }
  auc_err = std::max(auc_err, std::abs(success_auc(ious) - reference_auc(ious)));
  prec_err = std::max(prec_err, std::abs(precision_at(20.0, errors) - reference_precision(20.0, errors)));
  o.require(auc_err <= 1e-9, "success_auc max |error| " + fmt("%.2e", auc_err));
  o.require(prec_err <= 1e-9, "precision_at max |error| " + fmt("%.2e", prec_err));

  const std::vector<double> ones(37, 1.0), halves(37, 0.5);
  o.require(success_auc(ones) == 100.0 / 101.0, "all-1 IoU list gives 100/101 exactly");
  o.require(success_auc(halves) == 50.0 / 101.0, "all-0.5 IoU list gives 50/101 exactly");
  return o;
}

Outcome criterion_accounting() {
  Outcome o;
  const ModelConfig config;
  const auto model = TrackerModel<float>::build(config, kModelSeed);
  std::uint64_t params = 0, macs = 0;
  for (const auto& r : architecture_table(config)) {
    params += r.params;
    macs += r.macs;
  }
  std::uint64_t tensor_sum = 0;
  for (const auto& e : model.params().entries()) tensor_sum += e.tensor.numel();
  o.require(count_params(model) == params && tensor_sum == params,
            "count_params " + std::to_string(count_params(model)) + " == table sum == stored scalars");
  o.require(count_flops(model) == macs, "count_flops " + std::to_string(count_flops(model)) + " == table sum");

  Scratch dir("ckpt");
  const auto path = dir / "m.ckpt";
  save_checkpoint(model.params(), path);
  auto other = TrackerModel<float>::build(config, kModelSeed + 1);
  restore_checkpoint(other.params(), path);
  bool identical = true;
  const auto& a = model.params().entries();
  const auto& b = other.params().entries();
  for (std::size_t i = 0; i < a.size(); ++i) {
    identical = identical && a[i].name == b[i].name &&
                std::memcmp(a[i].tensor.data().data(), b[i].tensor.data().data(), a[i].tensor.numel() * sizeof(float)) == 0;
  }
  o.require(identical && parameter_checksum(model.params()) == parameter_checksum(other.params()),
            "checkpoint round trip bit-exact, crc32 " + std::to_string(parameter_checksum(model.params())));

  auto bytes = slurp(path);
  bytes[bytes.size() / 2] ^= 0x10;
  std::ofstream(dir / "bad.ckpt", std::ios::binary) << bytes;
  bool caught = false;
  try {
    restore_checkpoint(other.params(), dir / "bad.ckpt");
  } catch (const CheckpointError& e) {
    caught = e.kind() == CheckpointErrorKind::kChecksum;
  }
  o.require(caught, "a flipped payload bit fails CRC verification");
  return o;
}

Outcome criterion_determinism() {
  Outcome o;
  Scratch dir("det");
  SyntheticSceneConfig scene;
  scene.length = 24;
  scene.occlusion_events = 2;
  save_dataset(generate_dataset(scene, 3, 77), dir / "a");
  save_dataset(generate_dataset(scene, 3, 77), dir / "b");
  const auto ta = tree(dir / "a");
  o.require(ta == tree(dir / "b"), "datasets: " + std::to_string(ta.size()) + " files byte-identical");

  TrainConfig tc;
  tc.epochs = 1;
  tc.samples_per_epoch = 6;
  tc.batch_size = 2;
  tc.learning_rate = 1e-3;
  const auto data = load_dataset(dir / "a");
  std::vector<std::string> ckpts;
  std::vector<std::string> results;
  for (const char* tag : {"1", "2"}) {
    auto model = TrackerModel<float>::build(ModelConfig{}, kModelSeed);
    train(model, data, tc);
    const auto path = dir / (std::string("m") + tag + ".ckpt");
    save_checkpoint(model.params(), path);
    ckpts.push_back(slurp(path));

    ModelTracker tracker(model, TrackerConfig{});
    std::vector<SequenceRun> runs;
    evaluate(tracker, data, Protocol::kOnline, &runs);
    std::string all;
    for (const auto& run : runs) {
      const auto rpath = dir / (run.sequence_id + "_" + tag + ".txt");
      write_results(run.results, rpath);
      all += slurp(rpath);
    }
    results.push_back(all);
  }
  o.require(ckpts[0] == ckpts[1], "checkpoints byte-identical (" + std::to_string(ckpts[0].size()) + " bytes)");
  o.require(results[0] == results[1] && !results[0].empty(), "results files byte-identical");
  return o;
}

Outcome criterion_online_protocol() {
  Outcome o;
  const auto& seqs = test_set();
  int oracle_reinits = 0;
  int visible_tracked = 0, stub_reinits = 0;
  bool every_visible = true;
  std::vector<SequenceRun> stub_runs;
  for (const auto& s : seqs) {
    OracleTracker oracle(s);
    oracle_reinits += run_online(oracle, s).reinit_count;

    HalfIouTracker half(s);
    auto run = run_online(half, s);
    const std::set<int> inits(run.init_frames.begin(), run.init_frames.end());
    for (int t = 0; t < s.length(); ++t) {
      if (inits.count(t) || !s.annotations[t].box) continue;
      ++visible_tracked;
      // The next annotated frame must be a re-initialisation.
      int next = t + 1;
      while (next < s.length() && !s.annotations[next].box) ++next;
      if (next < s.length() && !inits.count(next)) every_visible = false;
    }
    stub_reinits += run.reinit_count;
    stub_runs.push_back(std::move(run));
  }
  o.require(oracle_reinits == 0, "oracle tracker: " + std::to_string(oracle_reinits) + " reinits");
  o.require(every_visible && stub_reinits == visible_tracked,
            "IoU-0.5 stub: " + std::to_string(stub_reinits) + " reinits for " + std::to_string(visible_tracked) +
                " visible tracked frames");

  Scratch dir("online");
  std::vector<SequenceRun> reread;
  for (const auto& run : stub_runs) {
    write_results(run.results, dir / (run.sequence_id + ".txt"));
    write_init_frames(run.init_frames, dir / (run.sequence_id + ".init.txt"));
    SequenceRun r;
    r.sequence_id = run.sequence_id;
    r.results = read_results(dir / (run.sequence_id + ".txt"));
    r.init_frames = read_init_frames(dir / (run.sequence_id + ".init.txt"));
    reread.push_back(std::move(r));
  }
  const auto rep = aggregate_report(seqs, stub_runs, Protocol::kOnline);
  compare_report(o, "stub report vs results files", rep, recompute(seqs, reread));

  std::vector<SequenceRun> oracle_runs;
  for (const auto& s : seqs) {
    OracleTracker oracle(s);
    oracle_runs.push_back(run_online(oracle, s));
  }
  const auto orep = aggregate_report(seqs, oracle_runs, Protocol::kOnline);
  compare_report(o, "oracle report", orep, recompute(seqs, oracle_runs));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed-form contrastive loss oracle", criterion_cfm_oracle},
      {"full-objective gradient check", criterion_gradients},
      {"shape contract", criterion_shapes},
      {"overfit sanity", criterion_overfit},
      {"confidence ordering and gap vs baseline", criterion_confidence},
      {"offline AUC vs baseline", criterion_offline_auc},
      {"metric oracles", criterion_metrics},
      {"accounting and checkpoint round trip", criterion_accounting},
      {"determinism", criterion_determinism},
      {"online protocol", criterion_online_protocol},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  std::vector<std::string> summary;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto& [name, run] = criteria[i];
    std::printf("criterion %d: %s\n", id, name.c_str());
    std::fflush(stdout);
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    for (const auto& n : o.notes) std::printf("  %s\n", n.c_str());
    char line[160];
    std::snprintf(line, sizeof line, "[%s] %d %s (%.1f s)", o.pass ? "PASS" : "FAIL", id, name.c_str(),
                  seconds_since(t0));
    std::printf("%s\n", line);
    std::fflush(stdout);
    summary.push_back(line);
    failures += o.pass ? 0 : 1;
  }
  std::printf("\n");
  for (const auto& s : summary) std::printf("%s\n", s.c_str());
  std::printf("%d of %zu criteria failed\n", failures, summary.size());
  return failures == 0 ? 0 : 1;
}
