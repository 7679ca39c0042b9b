// cftrack command-line entry point: synth, train, track, eval, bench, gradcheck.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cftrack/config.hpp"
#include "cftrack/error.hpp"
#include "cftrack/eval.hpp"

namespace fs = std::filesystem;
using namespace cftrack;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
};

RunConfig load_config(const CommonOptions& opts) {
  RunConfig cfg = opts.config_path.empty() ? RunConfig{} : load_run_config(opts.config_path);
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "key=value run configuration file");
  cmd->add_option("--set", opts.overrides, "override a config key (key=value); wins over --config");
}

TrackerModel<float> load_model(const std::string& path, const RunConfig& cfg) {
  TrackerModel<float> model = TrackerModel<float>::build(ModelConfig{}, cfg.model_seed);
  restore_checkpoint(model.params(), path);
  return model;
}

bool directory_has_entries(const fs::path& dir) {
  return fs::exists(dir) && fs::is_directory(dir) && fs::directory_iterator(dir) != fs::directory_iterator();
}

int cmd_synth(const fs::path& out, int count, std::uint64_t seed, bool force, const CommonOptions& common) {
  const RunConfig cfg = load_config(common);
  if (directory_has_entries(out) && !force) {
    throw Error("synth.exists", out.string() + " is not empty (use --force to overwrite)");
  }
  if (force && fs::exists(out)) fs::remove_all(out);
  const auto sequences = generate_dataset(cfg.scene, count, seed);
  save_dataset(sequences, out);
  for (const auto& s : sequences) {
    int counts[5] = {};
    for (const auto& a : s.annotations) counts[static_cast<int>(a.visibility)]++;
    std::printf("%s seed=%llu frames=%d CL=%d PO=%d FO=%d FC=%d AB=%d\n", s.id.c_str(),
                static_cast<unsigned long long>(s.seed), s.length(), counts[0], counts[1], counts[2], counts[3],
                counts[4]);
  }
  return 0;
}

int cmd_train(const fs::path& data, const fs::path& out, bool no_cfm, std::string loss_log,
              const CommonOptions& common) {
  RunConfig cfg = load_config(common);
  if (no_cfm) cfg.train.disable_cfm();
  const auto dataset = load_dataset(data);
  TrackerModel<float> model = TrackerModel<float>::build(ModelConfig{}, cfg.model_seed);
  const long total = cfg.train.total_steps();
  const auto history = train(model, dataset, cfg.train, [&](const StepRecord& r) {
    if (r.step % 50 == 0 || r.step + 1 == total) {
      std::fprintf(stderr, "step %ld/%ld lr=%g L_cls=%.5f L_1=%.5f L_adapt=%.5f L_total=%.5f\n", r.step + 1, total,
                   r.lr, r.cls, r.l1, r.adapt, r.total);
    }
  });
  save_checkpoint(model.params(), out);
  if (loss_log.empty()) loss_log = out.string() + ".loss.csv";
  write_loss_log(history, loss_log);
  std::printf("checkpoint=%s crc32=%08x steps=%zu loss_log=%s\n", out.string().c_str(),
              parameter_checksum(model.params()), history.size(), loss_log.c_str());
  return 0;
}

int cmd_track(const std::string& model_path, const fs::path& seq_dir, const fs::path& out,
              const std::string& overlay_dir, bool no_cfm, const CommonOptions& common) {
  RunConfig cfg = load_config(common);
  if (no_cfm) cfg.tracker.use_cfm = false;
  const TrackerModel<float> model = load_model(model_path, cfg);
  const Sequence seq = load_sequence(seq_dir);
  if (seq.annotations.empty() || !seq.annotations[0].box) {
    throw Error("track.no_init", seq_dir.string() + ": frame 0 has no visible target to initialise from");
  }
  ModelTracker tracker(model, cfg.tracker);
  const SequenceRun run = run_offline(tracker, seq);
  write_results(run.results, out);
  if (!overlay_dir.empty()) {
    fs::create_directories(overlay_dir);
    for (int t = 0; t < seq.length(); ++t) {
      char name[32];
      std::snprintf(name, sizeof name, "frame_%06d.ppm", t);
      write_ppm(draw_overlay(seq.frames[t], run.results[t], cfg.tracker.presence_threshold), fs::path(overlay_dir) / name);
    }
  }
  std::printf("results=%s frames=%zu\n", out.string().c_str(), run.results.size());
  return 0;
}

int cmd_eval(const std::string& model_path, const fs::path& data, const std::string& protocol_name,
             const fs::path& report_path, const std::string& results_dir, bool no_cfm, int fps_frames,
             const CommonOptions& common) {
  const Protocol protocol = parse_protocol(protocol_name);
  RunConfig cfg = load_config(common);
  if (no_cfm) cfg.tracker.use_cfm = false;
  const TrackerModel<float> model = load_model(model_path, cfg);
  const auto dataset = load_dataset(data);
  ModelTracker tracker(model, cfg.tracker);
  std::vector<SequenceRun> runs;
  EvalReport report = evaluate(tracker, dataset, protocol, &runs);
  report.param_count = count_params(model);
  report.mac_count = count_flops(model);
  if (fps_frames > 0) {
    const FpsResult fps = fps_bench(model, fps_frames, cfg.train.seed, cfg.tracker);
    report.fps = fps.mean;
    report.fps_stddev = fps.stddev;
  }
  if (!results_dir.empty()) {
    fs::create_directories(results_dir);
    for (const auto& run : runs) {
      write_results(run.results, fs::path(results_dir) / (run.sequence_id + ".txt"));
      write_init_frames(run.init_frames, fs::path(results_dir) / (run.sequence_id + ".init.txt"));
    }
  }
  write_report(report, report_path);
  std::cout << to_key_value(report);
  return 0;
}

int cmd_bench(const std::string& model_path, int frames, std::uint64_t seed, const CommonOptions& common) {
  const RunConfig cfg = load_config(common);
  const TrackerModel<float> model = load_model(model_path, cfg);
  const auto table = architecture_table(model.config());
  std::cout << format_architecture_table(table);
  const FpsResult fps = fps_bench(model, frames, seed, cfg.tracker);
  std::printf("params=%llu\nmacs=%llu\nfps=%.3f\nfps_stddev=%.3f\n",
              static_cast<unsigned long long>(count_params(model)),
              static_cast<unsigned long long>(count_flops(model)), fps.mean, fps.stddev);
  return 0;
}

int cmd_gradcheck(const std::string& corrupt, const CommonOptions& common) {
  const RunConfig cfg = load_config(common);
  SyntheticSceneConfig scene = cfg.scene;
  scene.length = std::min(scene.length, 30);
  const auto dataset = generate_dataset(scene, 2, cfg.gradcheck.seed);
  // One positive and one negative pair so both contrastive branches are exercised.
  std::vector<TrainingSample> batch;
  const auto pos = sample_pairs(dataset, 1, 0.0, cfg.gradcheck.seed);
  const auto neg = sample_pairs(dataset, 1, 1.0, cfg.gradcheck.seed + 1);
  batch.push_back(prepare_sample(dataset, pos[0], cfg.train, derive_seed(cfg.gradcheck.seed, 10)));
  batch.push_back(prepare_sample(dataset, neg[0], cfg.train, derive_seed(cfg.gradcheck.seed, 11)));

  const TrackerModel<float> model = TrackerModel<float>::build(ModelConfig{}, cfg.model_seed);
  GradCheckOptions<double> opts;
  opts.h = cfg.gradcheck.h;
  opts.tolerance = cfg.gradcheck.tolerance;
  opts.samples_per_tensor = cfg.gradcheck.samples_per_tensor;
  opts.seed = cfg.gradcheck.seed;
  opts.scale_floor = cfg.gradcheck.scale_floor;
  if (!corrupt.empty()) {
    opts.after_backward = [corrupt](ParameterSet<double>& params) {
      Tensor<double> t = params.get(corrupt);
      for (double& g : t.grad()) g *= 2.0;
    };
  }
  const GradCheckReport rep = check_objective_gradients(model, batch, cfg.train.weights, cfg.train.margin, opts);
  for (const auto& e : rep.entries) {
    std::printf("%-28s n=%-4zu skipped=%-3zu max_rel=%.3e analytic=% .6e numeric=% .6e\n", e.name.c_str(),
                e.coordinates, e.skipped, e.max_relative_error, e.analytic, e.numeric);
  }
  std::printf("coordinates=%zu skipped=%zu max_relative_error=%.3e tolerance=%.1e %s\n", rep.coordinates,
              rep.skipped, rep.max_relative_error, rep.tolerance, rep.passed() ? "PASS" : "FAIL");
  if (!rep.passed()) {
    throw Error("gradcheck.failed", "max relative error " + format_double(rep.max_relative_error) + " (tolerance " +
                                        format_double(rep.tolerance) + "), " + std::to_string(rep.skipped) +
                                        " coordinates skipped as kinks");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cftrack: lightweight Siamese tracker with contrastive feature matching"};
  app.require_subcommand(1);

  CommonOptions synth_common, train_common, track_common, eval_common, bench_common, grad_common;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  std::string synth_out;
  int synth_n = 8;
  std::uint64_t synth_seed = 1;
  bool synth_force = false;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--num-sequences", synth_n, "number of sequences")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "dataset seed");
  synth->add_flag("--force", synth_force, "overwrite a non-empty output directory");
  add_common(synth, synth_common);

  auto* trainc = app.add_subcommand("train", "train a model");
  std::string train_data, train_out, train_log;
  bool train_no_cfm = false;
  trainc->add_option("--data", train_data, "dataset directory")->required();
  trainc->add_option("--out", train_out, "checkpoint path")->required();
  trainc->add_option("--loss-log", train_log, "loss CSV path (default <out>.loss.csv)");
  trainc->add_flag("--no-cfm", train_no_cfm, "baseline objective: lambda3 = 0, no negative pairs");
  add_common(trainc, train_common);

  auto* track = app.add_subcommand("track", "track one sequence");
  std::string track_model, track_seq, track_out, track_overlay;
  bool track_no_cfm = false;
  track->add_option("--model", track_model, "checkpoint")->required();
  track->add_option("--sequence", track_seq, "sequence directory")->required();
  track->add_option("--out", track_out, "results file")->required();
  track->add_option("--overlay", track_overlay, "directory for overlay frames");
  track->add_flag("--no-cfm", track_no_cfm, "gate presence on the classification score only");
  add_common(track, track_common);

  auto* evalc = app.add_subcommand("eval", "evaluate on a dataset");
  std::string eval_model, eval_data, eval_protocol = "offline", eval_report, eval_results;
  bool eval_no_cfm = false;
  int eval_fps_frames = 30;
  evalc->add_option("--model", eval_model, "checkpoint")->required();
  evalc->add_option("--data", eval_data, "dataset directory")->required();
  evalc->add_option("--protocol", eval_protocol, "offline or online");
  evalc->add_option("--report", eval_report, "report path (key=value; .json and .svg written alongside)")->required();
  evalc->add_option("--results-dir", eval_results, "write per-sequence results and init-frame lists here");
  evalc->add_flag("--no-cfm", eval_no_cfm, "gate presence on the classification score only");
  evalc->add_option("--fps-frames", eval_fps_frames, "timed frames per speed run (0 skips the speed measurement)")
      ->check(CLI::NonNegativeNumber);
  add_common(evalc, eval_common);

  auto* bench = app.add_subcommand("bench", "parameter, MAC and speed accounting");
  std::string bench_model;
  int bench_frames = 50;
  std::uint64_t bench_seed = 1;
  bench->add_option("--model", bench_model, "checkpoint")->required();
  bench->add_option("--frames", bench_frames, "timed frames per run (>= 10)");
  bench->add_option("--seed", bench_seed, "workload seed");
  add_common(bench, bench_common);

  auto* grad = app.add_subcommand("gradcheck", "finite-difference check of the full objective");
  std::string corrupt;
  grad->add_option("--corrupt-grad", corrupt, "test hook: double the gradient of this tensor")->group("");
  add_common(grad, grad_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: usage: %s\n", e.what());
    return 2;
  }

  try {
    if (*synth) return cmd_synth(synth_out, synth_n, synth_seed, synth_force, synth_common);
    if (*trainc) return cmd_train(train_data, train_out, train_no_cfm, train_log, train_common);
    if (*track) return cmd_track(track_model, track_seq, track_out, track_overlay, track_no_cfm, track_common);
    if (*evalc) {
      return cmd_eval(eval_model, eval_data, eval_protocol, eval_report, eval_results, eval_no_cfm, eval_fps_frames,
                      eval_common);
    }
    if (*bench) return cmd_bench(bench_model, bench_frames, bench_seed, bench_common);
    if (*grad) return cmd_gradcheck(corrupt, grad_common);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s: %s\n", e.code().c_str(), e.what());
    return e.code() == "usage" ? 2 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: internal: %s\n", e.what());
    return 1;
  }
  return 0;
}
