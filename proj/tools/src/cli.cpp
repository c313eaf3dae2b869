#include "pixmotion/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <unordered_map>

#include <CLI11.hpp>

#include "pixmotion/bundle_adjustment.hpp"
#include "pixmotion/dataset.hpp"
#include "pixmotion/evaluation.hpp"
#include "pixmotion/image_io.hpp"
#include "pixmotion/pipeline.hpp"
#include "pixmotion/synthetic.hpp"

namespace pixmotion {

namespace fs = std::filesystem;

namespace {

std::string frame_file(std::size_t frame, const std::string& stage, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", frame);
  return std::string(buf) + "_" + stage + ext;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kInvalidArgument:
      return kExitUsage;
    case ErrorKind::kIo:
    case ErrorKind::kFormat:
    case ErrorKind::kDimensionMismatch:
      return kExitIo;
    case ErrorKind::kDegenerate:
    case ErrorKind::kBehindCamera:
    case ErrorKind::kInvalidDepth:
      return kExitNumerical;
  }
  return kExitFailure;
}

void make_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create output directory " + dir.string() + ": " + ec.message());
}

// Dataset selection shared by estimate and splat-debug.
struct DatasetOptions {
  std::string manifest;
  std::string tum_root;
  std::string background_dir = "background";
  double max_time_gap = 0.02;
  double depth_scale = 5000.0;
  Intrinsics intrinsics = tum_fr3_intrinsics();

  void add_to(CLI::App& app) {
    auto* m = app.add_option("--manifest", manifest, "Sequence manifest file");
    auto* t = app.add_option("--tum-root", tum_root, "TUM-layout sequence directory");
    m->excludes(t);
    app.add_option("--background-dir", background_dir, "Background directory under the TUM root")
        ->capture_default_str();
    app.add_option("--max-time-gap", max_time_gap, "rgb/depth/pose association gap (s)")->capture_default_str();
    app.add_option("--depth-scale", depth_scale, "Raw depth units per metre")->capture_default_str();
    app.add_option("--fx", intrinsics.fx)->capture_default_str();
    app.add_option("--fy", intrinsics.fy)->capture_default_str();
    app.add_option("--cx", intrinsics.cx)->capture_default_str();
    app.add_option("--cy", intrinsics.cy)->capture_default_str();
    app.add_option("--width", intrinsics.width)->capture_default_str();
    app.add_option("--height", intrinsics.height)->capture_default_str();
  }

  [[nodiscard]] ManifestSource open() const {
    SequenceManifest m;
    if (!manifest.empty()) {
      m = read_manifest(fs::path(manifest));
    } else if (!tum_root.empty()) {
      TumLoadOptions opts;
      opts.max_time_gap = max_time_gap;
      opts.intrinsics = intrinsics;
      opts.depth_scale = depth_scale;
      opts.background_dir = background_dir;
      m = load_tum_sequence(tum_root, opts);
      if (m.dropped_frames > 0) {
        std::cerr << "note: " << m.dropped_frames << " rgb frame(s) without a depth partner were dropped\n";
      }
    } else {
      fail(ErrorKind::kConfig, "one of --manifest or --tum-root is required");
    }
    m.validate(true);
    return ManifestSource(std::move(m));
  }
};

struct EstimatorOptions {
  EstimatorParams params;

  void add_to(CLI::App& app) {
    app.add_option("--clip-lo", params.movable.clip_lo, "Lower clip bound of the max-difference channel")
        ->capture_default_str();
    app.add_option("--clip-hi", params.movable.clip_hi, "Upper clip bound of the max-difference channel")
        ->capture_default_str();
    app.add_option("--lambda-scale", params.movable.lambda_scale)->capture_default_str();
    app.add_option("--offsets", params.fusion.offsets, "Frame offsets j (t+j and t-j are used)")
        ->capture_default_str();
    app.add_option("--mag-lo", params.fusion.mag_lo, "Motion magnitude mapped to 0 (px)")->capture_default_str();
    app.add_option("--mag-hi", params.fusion.mag_hi, "Motion magnitude mapped to 1 (px)")->capture_default_str();
    app.add_option("--sharpness", params.splat.sharpness, "Splatting depth sharpness")->capture_default_str();
    app.add_option("--coverage-eps", params.splat.coverage_eps)->capture_default_str();
  }
};

std::unique_ptr<FlowProvider> make_flow_provider(const std::string& kind, const std::string& dir) {
  if (kind == "baseline") return std::make_unique<BaselineFlowProvider>();
  if (kind == "files") {
    if (dir.empty()) fail(ErrorKind::kConfig, "--flow files requires --flow-dir");
    if (!fs::is_directory(dir)) fail(ErrorKind::kIo, "flow directory not found: " + dir);
    return std::make_unique<FileFlowProvider>(dir);
  }
  fail(ErrorKind::kConfig, "unknown flow source '" + kind + "' (expected baseline or files)");
}

ScalarGrid motion_as_probability(const MotionMap& motion, const FusionParams& params) {
  ScalarGrid out(motion.values.width(), motion.values.height(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (motion.valid[i]) out[i] = normalize_motion(motion.values[i], params);
  }
  return out;
}

void write_coverage(const fs::path& path, const SplattedFrame& view) { write_mask_png(path, view.valid); }

std::string offset_tag(int offset) {
  return (offset >= 0 ? "p" : "m") + std::to_string(offset >= 0 ? offset : -offset);
}

void write_diagnostics(const fs::path& out, const FrameEstimate& e, const FusionParams& fusion) {
  write_probability_png(out / frame_file(e.index, "movable", ".png"), e.movable.values);
  write_probability_png(out / frame_file(e.index, "motion", ".png"), motion_as_probability(e.motion, fusion));
  for (const NeighborDiagnostics& n : e.neighbors) {
    const std::string tag = offset_tag(n.offset);
    write_color_image(out / frame_file(e.index, "splat_dyn_" + tag, ".png"),
                      to_color_image(n.dynamic_view.image, &n.dynamic_view.valid));
    write_color_image(out / frame_file(e.index, "splat_bg_" + tag, ".png"),
                      to_color_image(n.background_view.image, &n.background_view.valid));
    write_coverage(out / frame_file(e.index, "coverage_dyn_" + tag, ".png"), n.dynamic_view);
    write_float_grid(out / frame_file(e.index, "diff_" + tag, ".bin"), n.motion.values);
  }
}

// False when help was requested (and printed).
bool parse_args(CLI::App& app, std::vector<std::string> args) {
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return false;
  }
  return true;
}

// estimate ------------------------------------------------------------------

int cmd_estimate(const std::vector<std::string>& args) {
  CLI::App app{"Per-pixel motion probability for every frame of a sequence", "pixmotion estimate"};
  app.set_config("--config", "", "key=value config file; flags override it");
  DatasetOptions data;
  data.add_to(app);
  EstimatorOptions est;
  est.add_to(app);
  std::string output;
  std::string flow_kind = "baseline";
  std::string flow_dir;
  int jobs = 1;
  bool debug = false;
  bool float_maps = false;
  std::size_t first = 0;
  std::size_t last = static_cast<std::size_t>(-1);
  app.add_option("--output", output, "Output directory")->required();
  app.add_option("--flow", flow_kind, "Flow source: baseline or files")->capture_default_str();
  app.add_option("--flow-dir", flow_dir, "Directory of precomputed .flo files");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
  app.add_option("--first", first, "First frame index");
  app.add_option("--last", last, "One past the last frame index");
  app.add_flag("--debug", debug, "Also write intermediate stages");
  app.add_flag("--float", float_maps, "Also write probability maps as float grids");
  if (!parse_args(app, args)) return kExitOk;

  const ManifestSource source = data.open();
  est.params.validate();
  const auto flow = make_flow_provider(flow_kind, flow_dir);
  const fs::path out(output);
  make_output_dir(out);

  const std::size_t end = std::min(last, source.size());
  if (first >= end) fail(ErrorKind::kConfig, "empty frame range");

  const SequenceSummary summary = estimate_sequence(
      source, *flow, est.params, jobs,
      [&](FrameEstimate&& e) {
        write_probability_png(out / frame_file(e.index, "prob", ".png"), e.probability.values);
        if (float_maps) write_float_grid(out / frame_file(e.index, "prob", ".bin"), e.probability.values);
        if (debug) write_diagnostics(out, e, est.params.fusion);
      },
      debug, first, end);

  for (const FrameFailure& f : summary.failures) {
    std::cerr << "frame " << f.index << " failed: " << f.message << '\n';
  }
  const std::size_t total = end - first;
  std::cout << "processed " << summary.processed << " of " << total << " frame(s)";
  if (!summary.failures.empty()) std::cout << ", " << summary.failures.size() << " failed";
  std::cout << '\n';
  return summary.failures.size() * 10 > total ? kExitFrames : kExitOk;
}

// ba ------------------------------------------------------------------------

int cmd_ba(const std::vector<std::string>& args) {
  CLI::App app{"Probability-weighted bundle adjustment on a problem file", "pixmotion ba"};
  app.set_config("--config", "", "key=value config file; flags override it");
  std::string input;
  std::string output;
  std::string report_path;
  SolverConfig solver;
  SelectionParams selection;
  bool cull = false;
  app.add_option("--input", input, "Problem file")->required();
  app.add_option("--output", output, "Optimised problem file")->required();
  app.add_option("--report", report_path, "Write the solve report (key=value) here");
  app.add_option("--max-iterations", solver.max_iterations)->capture_default_str();
  app.add_option("--initial-damping", solver.initial_damping)->capture_default_str();
  app.add_option("--damping-increase", solver.damping_increase)->capture_default_str();
  app.add_option("--damping-decrease", solver.damping_decrease)->capture_default_str();
  app.add_option("--relative-cost-tol", solver.relative_cost_tol)->capture_default_str();
  app.add_option("--update-tol", solver.update_tol)->capture_default_str();
  app.add_option("--p-add", selection.p_add)->capture_default_str();
  app.add_option("--p-del", selection.p_del)->capture_default_str();
  app.add_flag("--cull", cull, "Drop points with motion probability >= p-del before solving");
  if (!parse_args(app, args)) return kExitOk;

  selection.validate();
  BAProblem problem = read_ba_problem(fs::path(input));
  std::size_t culled = 0;
  if (cull) {
    std::vector<std::size_t> remap(problem.points.size(), static_cast<std::size_t>(-1));
    std::vector<BAPoint> kept;
    std::unordered_map<std::int64_t, double> probs;
    std::vector<TrackedPoint> tracked;
    for (const BAPoint& p : problem.points) {
      tracked.push_back(p.point);
      probs[p.point.id()] = p.point.motion_prob();
    }
    const std::vector<TrackedPoint> survivors = cull_map_points(tracked, probs, selection);
    std::size_t s = 0;
    for (std::size_t i = 0; i < problem.points.size() && s < survivors.size(); ++i) {
      if (problem.points[i].point.id() == survivors[s].id()) {
        remap[i] = kept.size();
        kept.push_back(problem.points[i]);
        ++s;
      }
    }
    culled = problem.points.size() - kept.size();
    std::vector<Observation> obs;
    for (Observation o : problem.observations) {
      if (remap[o.point] == static_cast<std::size_t>(-1)) continue;
      o.point = remap[o.point];
      obs.push_back(o);
    }
    problem.points = std::move(kept);
    problem.observations = std::move(obs);
  }

  const BAResult result = solve_weighted_ba(problem, solver);
  write_ba_problem(fs::path(output), result.problem);

  std::ostringstream kv;
  kv.precision(17);
  kv << "initial_cost=" << result.report.initial_cost << '\n'
     << "final_cost=" << result.report.final_cost << '\n'
     << "iterations=" << result.report.iterations << '\n'
     << "converged=" << (result.report.converged ? 1 : 0) << '\n'
     << "excluded_observations=" << result.report.excluded_observations << '\n'
     << "culled_points=" << culled << '\n';
  std::cout << kv.str();
  if (!report_path.empty()) {
    std::ofstream rf(report_path);
    if (!rf) fail(ErrorKind::kIo, "cannot write report " + report_path);
    rf << kv.str();
  }
  if (result.report.excluded_observations > 0) {
    std::cerr << "warning: " << result.report.excluded_observations
              << " observation(s) behind the camera were excluded\n";
  }
  return result.report.converged ? kExitOk : kExitNumerical;
}

// eval ----------------------------------------------------------------------

int cmd_eval(const std::vector<std::string>& args) {
  CLI::App app{"ATE RMSE and tracking rate of an estimated trajectory", "pixmotion eval"};
  app.set_config("--config", "", "key=value config file; flags override it");
  std::string est_path;
  std::string gt_path;
  std::string output;
  std::optional<double> t0;
  std::optional<double> t1;
  double max_gap = 0.02;
  app.add_option("--est", est_path, "Estimated trajectory (TUM format)")->required();
  app.add_option("--gt", gt_path, "Ground-truth trajectory (TUM format)")->required();
  app.add_option("--t0", t0, "Sequence start (defaults to the first ground-truth stamp)");
  app.add_option("--t1", t1, "Sequence end (defaults to the last ground-truth stamp)");
  app.add_option("--max-gap", max_gap)->capture_default_str();
  app.add_option("--output", output, "Write key=value report here");
  if (!parse_args(app, args)) return kExitOk;

  const Trajectory est = read_tum_trajectory(fs::path(est_path));
  const Trajectory gt = read_tum_trajectory(fs::path(gt_path));
  if (gt.empty()) fail(ErrorKind::kFormat, "ground-truth trajectory is empty");
  const double start = t0.value_or(gt[0].timestamp);
  const double stop = t1.value_or(gt[gt.size() - 1].timestamp);
  const EvalReport report = evaluate(est, gt, start, stop, max_gap);
  std::cout << format_report_text(report);
  if (!output.empty()) {
    std::ofstream f(output);
    if (!f) fail(ErrorKind::kIo, "cannot write " + output);
    f << format_report_kv(report);
  }
  return kExitOk;
}

// synth ---------------------------------------------------------------------

int cmd_synth(const std::vector<std::string>& args) {
  CLI::App app{"Render a synthetic sequence with ground truth", "pixmotion synth"};
  app.set_config("--config", "", "key=value config file; flags override it");
  std::string scene_path;
  std::string output;
  std::size_t frames = 60;
  std::optional<double> noise;
  app.add_option("--scene", scene_path, "Scene JSON (defaults to the built-in desk scene)");
  app.add_option("--output", output, "Output directory")->required();
  app.add_option("--frames", frames, "Number of frames")->capture_default_str();
  app.add_option("--noise", noise, "Override the scene's sensor noise sigma");
  if (!parse_args(app, args)) return kExitOk;

  SyntheticScene scene = scene_path.empty() ? SyntheticScene::desk_preset() : load_scene_json(scene_path);
  if (noise) scene.noise_sigma = *noise;
  scene.validate();
  if (frames == 0) fail(ErrorKind::kConfig, "--frames must be positive");

  const fs::path out(output);
  make_output_dir(out);
  const SyntheticSequence seq = render_synthetic_sequence(scene, frames);
  SequenceManifest manifest = write_tum_sequence(out, seq.intrinsics, seq.frames);
  manifest.root = ".";
  write_manifest(out / "manifest.txt", manifest);

  const fs::path gt = out / "groundtruth";
  make_output_dir(gt);
  for (std::size_t i = 0; i < frames; ++i) {
    write_mask_png(gt / frame_file(i, "moving", ".png"), seq.moving_masks[i]);
    write_mask_png(gt / frame_file(i, "shadow", ".png"), seq.shadow_masks[i]);
    if (i + 1 < frames) write_flo(gt / frame_file(i, "flow", ".flo"), seq.forward_flows[i]);
  }
  write_tum_trajectory(out / "trajectory.txt", seq.trajectory);
  {
    std::ofstream f(out / "scene.json");
    f << scene_to_json(scene) << '\n';
  }
  {
    // Intrinsics as an estimate/splat-debug config for --tum-root use.
    std::ofstream f(out / "camera.cfg");
    if (!f) fail(ErrorKind::kIo, "cannot write " + (out / "camera.cfg").string());
    f.precision(17);
    const Intrinsics& k = seq.intrinsics;
    f << "fx=" << k.fx << "\nfy=" << k.fy << "\ncx=" << k.cx << "\ncy=" << k.cy << "\nwidth=" << k.width
      << "\nheight=" << k.height << "\ndepth-scale=" << manifest.depth_scale << '\n';
  }
  std::cout << "wrote " << frames << " frame(s) to " << out.string() << '\n';
  return kExitOk;
}

// splat-debug ---------------------------------------------------------------

int cmd_splat_debug(const std::vector<std::string>& args) {
  CLI::App app{"Synthesise one neighbour view and compare against a homography warp", "pixmotion splat-debug"};
  app.set_config("--config", "", "key=value config file; flags override it");
  DatasetOptions data;
  data.add_to(app);
  std::size_t frame = 0;
  int offset = 2;
  double sharpness = SplatParams{}.sharpness;
  std::string output;
  app.add_option("--frame", frame, "Target frame index")->capture_default_str();
  app.add_option("--offset", offset, "Neighbour offset")->capture_default_str();
  app.add_option("--sharpness", sharpness)->capture_default_str();
  app.add_option("--output", output, "Output directory")->required();
  if (!parse_args(app, args)) return kExitOk;

  const ManifestSource source = data.open();
  const long neighbor = static_cast<long>(frame) + offset;
  if (frame >= source.size() || neighbor < 0 || neighbor >= static_cast<long>(source.size())) {
    fail(ErrorKind::kConfig, "frame/offset outside the sequence");
  }
  const Intrinsics& k = source.intrinsics();
  const FrameBundle cur = source.load(frame);
  const FrameBundle other = source.load(static_cast<std::size_t>(neighbor));
  if (!cur.pose || !other.pose) fail(ErrorKind::kConfig, "splat-debug needs poses on both frames");
  const PoseSE3 rel = cur.pose->inverse() * *other.pose;

  SplatParams sp;
  sp.sharpness = sharpness;
  const SplattedFrame view = synthesize_view(other.rgb, other.depth, rel, k, sp);
  const double d = median_depth(other.depth);
  if (!(d > 0.0)) fail(ErrorKind::kDegenerate, "neighbour frame has no valid depth");
  const WarpedFrame warped = homography_warp(other.rgb, plane_induced_homography(k, rel, {0.0, 0.0, 1.0}, d));

  const fs::path out(output);
  make_output_dir(out);
  const std::string tag = offset_tag(offset);
  write_color_image(out / frame_file(frame, "splat_" + tag, ".png"), to_color_image(view.image, &view.valid));
  write_mask_png(out / frame_file(frame, "coverage_" + tag, ".png"), view.valid);
  write_color_image(out / frame_file(frame, "homography_" + tag, ".png"),
                    to_color_image(warped.image, &warped.valid));

  Mask both(k.width, k.height, 0);
  for (std::size_t i = 0; i < both.size(); ++i) both[i] = view.valid[i] && warped.valid[i];
  const RealImage target = to_real_image(cur.rgb);
  std::cout.precision(6);
  std::cout << "splat_mean_abs_error=" << mean_abs_difference(view.image, target, &both) << '\n'
            << "homography_mean_abs_error=" << mean_abs_difference(warped.image, target, &both) << '\n';
  return kExitOk;
}

void print_usage(std::ostream& os) {
  os << "usage: pixmotion <command> [options]\n\n"
        "commands:\n"
        "  estimate     per-pixel motion probability maps for a sequence\n"
        "  ba           weighted bundle adjustment on a problem file\n"
        "  eval         ATE RMSE and tracking rate\n"
        "  synth        render a synthetic sequence with ground truth\n"
        "  splat-debug  dump one synthesised view and its homography counterpart\n\n"
        "Run `pixmotion <command> --help` for the options of a command.\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  if (args.empty() || args[0] == "-h" || args[0] == "--help") {
    print_usage(args.empty() ? std::cerr : std::cout);
    return args.empty() ? kExitUsage : kExitOk;
  }
  const std::string& command = args[0];
  // CLI11 parses a reversed argument vector.
  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
  try {
    if (command == "estimate") return cmd_estimate(rest);
    if (command == "ba") return cmd_ba(rest);
    if (command == "eval") return cmd_eval(rest);
    if (command == "synth") return cmd_synth(rest);
    if (command == "splat-debug") return cmd_splat_debug(rest);
    std::cerr << "unknown command '" << command << "'\n";
    print_usage(std::cerr);
    return kExitUsage;
  } catch (const CLI::Success&) {
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "pixmotion " << command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "pixmotion " << command << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "pixmotion " << command << ": " << e.what() << '\n';
    return kExitFailure;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace pixmotion
