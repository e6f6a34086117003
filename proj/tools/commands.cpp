#include "commands.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <opencv2/imgcodecs.hpp>

#include "safeguard/config.hpp"
#include "safeguard/engine.hpp"
#include "safeguard/error.hpp"
#include "safeguard/evaluation.hpp"
#include "safeguard/ingestion.hpp"
#include "safeguard/overlay.hpp"
#include "safeguard/report.hpp"

namespace safeguard::cli {

namespace fs = std::filesystem;

namespace {

struct ConfigFlags {
  std::string config_path;
  std::optional<double> lambda;
  std::optional<double> margin;
  std::optional<double> iou;
  std::optional<std::string> match_mode;
};

void add_config_flags(CLI::App& cmd, ConfigFlags& flags) {
  cmd.add_option("--config", flags.config_path,
                 fmt::format("Engine configuration file (default: ${})", kConfigEnvVar));
}

EngineConfig resolve_config(const ConfigFlags& flags) {
  std::string path = flags.config_path;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar); env != nullptr) path = env;
  }
  EngineConfig config = path.empty() ? EngineConfig{} : load_config_file(path);
  if (flags.lambda) config.distancing.lambda_coefficient = *flags.lambda;
  if (flags.margin) config.crop.margin_fraction = *flags.margin;
  if (flags.iou) config.matching.iou_threshold = *flags.iou;
  if (flags.match_mode) config.set("match_mode", *flags.match_mode);
  return config;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write {}", path.string()));
  return out;
}

/// `<dir>/<id>.<ext>` or the six-digit zero-padded variant.
std::optional<fs::path> find_frame_image(const fs::path& dir, FrameId id) {
  static constexpr std::array<const char*, 5> kExtensions{".png", ".jpg", ".jpeg", ".bmp", ".ppm"};
  for (const auto& stem : {std::to_string(id), fmt::format("{:06}", id)}) {
    for (const char* ext : kExtensions) {
      auto candidate = dir / (stem + ext);
      if (fs::is_regular_file(candidate)) return candidate;
    }
  }
  return std::nullopt;
}

cv::Mat load_image(const fs::path& path) {
  cv::Mat image = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (image.empty()) throw Error(ErrorCode::Io, fmt::format("cannot decode {}", path.string()));
  return image;
}

// -- run ----------------------------------------------------------------------

struct RunOptions {
  std::string detections;
  std::string scores;
  std::string mask_model;
  std::string hand_model;
  std::string images;
  std::string out;
  unsigned jobs{1};
  bool record_timing{false};
  ConfigFlags config;
};

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  EngineConfig config = resolve_config(opt.config);
  if (!opt.mask_model.empty() || !opt.hand_model.empty()) {
    config.set("backend", "model");
  }
  if (!opt.mask_model.empty()) config.mask_backend.model_path = opt.mask_model;
  if (!opt.hand_model.empty()) config.hand_backend.model_path = opt.hand_model;
  config.validate();

  std::shared_ptr<const ScoreTable> scores;
  const bool recorded = config.mask_backend.kind == BackendKind::Recorded ||
                        config.hand_backend.kind == BackendKind::Recorded;
  if (recorded) {
    if (opt.scores.empty()) {
      throw Error(ErrorCode::Config, "recorded backend needs --scores (or model paths)");
    }
    if (!fs::is_regular_file(opt.scores)) {
      throw Error(ErrorCode::Io, fmt::format("scores file not found: {}", opt.scores));
    }
    scores = std::make_shared<const ScoreTable>(read_recorded_scores_file(opt.scores));
  }
  const bool needs_pixels = !recorded || !opt.images.empty();

  Engine engine(config, make_backend(ClassifierTask::Mask, config.mask_backend, scores),
                make_backend(ClassifierTask::Hand, config.hand_backend, scores));

  std::ifstream in(opt.detections);
  if (!in) throw Error(ErrorCode::Io, fmt::format("detections file not found: {}", opt.detections));
  DetectionReader reader(in, opt.detections);
  const auto& header = reader.header();

  auto report_out = open_output(opt.out);
  write_report_header(report_out, header.video_id, header.geometry);

  const auto started = std::chrono::steady_clock::now();
  VideoSummary summary;
  summary.video_id = header.video_id;
  constexpr std::size_t kBatch = 256;
  std::vector<Frame> batch;
  std::vector<std::vector<std::string>> batch_warnings;
  std::size_t seen_warnings = 0;

  auto flush = [&] {
    auto reports = engine.process_all(batch, header.video_id, opt.jobs);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      auto& r = reports[i];
      r.warnings.insert(r.warnings.begin(), batch_warnings[i].begin(), batch_warnings[i].end());
      write_frame_report(report_out, r);
    }
    summary.merge(summarize_video(reports));
    batch.clear();
    batch_warnings.clear();
  };

  while (auto frame = reader.next()) {
    std::vector<std::string> warnings;
    for (; seen_warnings < reader.warnings().size(); ++seen_warnings) {
      warnings.push_back(reader.warnings()[seen_warnings].message);
    }
    if (needs_pixels && !opt.images.empty()) {
      if (auto path = find_frame_image(opt.images, frame->frame_id)) {
        frame->pixels = load_image(*path);
      } else {
        warnings.push_back(fmt::format("no image for frame {}", frame->frame_id));
      }
    }
    batch.push_back(std::move(*frame));
    batch_warnings.push_back(std::move(warnings));
    if (batch.size() == kBatch) flush();
  }
  if (!batch.empty()) flush();

  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  const double fps = elapsed.count() > 0.0 ? summary.frame_count / elapsed.count() : 0.0;
  if (opt.record_timing) summary.frames_per_second = fps;
  write_summary(report_out, summary);
  report_out.close();
  if (!report_out) throw Error(ErrorCode::Io, fmt::format("failed writing {}", opt.out));

  fmt::print(out,
             "video {}: {} frames, {} faces, {} persons, {} pairs ({} violating), {} warnings, "
             "{:.1f} frames/s\n",
             header.video_id.empty() ? "-" : header.video_id, summary.frame_count,
             summary.face_count, summary.person_count, summary.pair_count,
             summary.violation_pairs, summary.warning_count, fps);
  (void)err;
  return kExitOk;
}

// -- evaluate -----------------------------------------------------------------

struct EvaluateOptions {
  std::vector<std::string> reports;
  std::vector<std::string> ground_truths;
  std::string out;
  ConfigFlags config;
};

int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
  EngineConfig config = resolve_config(opt.config);
  config.matching.validate();

  std::map<std::string, ReportFile> reports;
  for (const auto& path : opt.reports) {
    auto file = read_report_file(path);
    const auto id = file.video_id;
    if (!reports.emplace(id, std::move(file)).second) {
      throw Error(ErrorCode::IdMismatch, fmt::format("video '{}' given twice ({})", id, path));
    }
  }
  std::map<std::string, GroundTruthSet> truths;
  for (const auto& path : opt.ground_truths) {
    auto set = read_ground_truth_file(path);
    const auto id = set.video_id;
    if (!truths.emplace(id, std::move(set)).second) {
      throw Error(ErrorCode::IdMismatch,
                  fmt::format("ground truth for video '{}' given twice ({})", id, path));
    }
  }

  std::vector<std::string> problems;
  for (const auto& [id, _] : reports) {
    if (!truths.contains(id)) problems.push_back(fmt::format("no ground truth for video '{}'", id));
  }
  for (const auto& [id, _] : truths) {
    if (!reports.contains(id)) problems.push_back(fmt::format("no report for video '{}'", id));
  }
  if (!problems.empty()) {
    throw Error(ErrorCode::IdMismatch, fmt::format("mismatched video ids: {}",
                                                   fmt::join(problems, "; ")));
  }

  std::vector<VideoCase> cases;
  for (auto& [id, file] : reports) {
    VideoCase c;
    c.video_id = id;
    c.reports = std::move(file.frames);
    if (file.summary) c.frames_per_second = file.summary->frames_per_second;
    c.ground_truth = std::move(truths.at(id));
    cases.push_back(std::move(c));
  }
  const auto table = evaluate_videos(cases, config.matching);
  out << format_table(table);
  if (!opt.out.empty()) {
    auto json_out = open_output(opt.out);
    json_out << table_to_json(table).dump(2) << '\n';
  }
  (void)err;
  return kExitOk;
}

// -- render -------------------------------------------------------------------

struct RenderOptions {
  std::string detections;
  std::string images;
  std::string report;
  std::string out;
  bool commands_only{false};
};

int cmd_render(const RenderOptions& opt, std::ostream& out, std::ostream& err) {
  const auto stream = read_detection_file(opt.detections);
  const auto report = read_report_file(opt.report);
  if (!(report.geometry == stream.header.geometry)) {
    throw Error(ErrorCode::GeometryMismatch,
                fmt::format("report geometry {}x{} differs from detections {}x{}",
                            report.geometry.width, report.geometry.height,
                            stream.header.geometry.width, stream.header.geometry.height));
  }
  std::map<FrameId, const FrameReport*> by_frame;
  for (const auto& r : report.frames) by_frame.emplace(r.frame_id, &r);

  if (!opt.commands_only && opt.images.empty()) {
    throw Error(ErrorCode::Config, "--images is required unless --commands-only is given");
  }
  // Resolve every image up front so a missing one fails before any output.
  std::map<FrameId, fs::path> images;
  for (const auto& frame : stream.frames) {
    if (!by_frame.contains(frame.frame_id)) {
      throw Error(ErrorCode::IdMismatch,
                  fmt::format("report has no record for frame {}", frame.frame_id));
    }
    if (opt.commands_only) continue;
    auto path = find_frame_image(opt.images, frame.frame_id);
    if (!path) {
      throw Error(ErrorCode::Io, fmt::format("missing image for frame {} in {}", frame.frame_id,
                                             opt.images));
    }
    images.emplace(frame.frame_id, *path);
  }

  fs::create_directories(opt.out);
  const OverlayStyle style;
  std::size_t written = 0;
  for (const auto& frame : stream.frames) {
    const auto& frame_report = *by_frame.at(frame.frame_id);
    const auto stem = fmt::format("{:06}", frame.frame_id);
    {
      auto cmd_out = open_output(fs::path(opt.out) / (stem + ".commands.ndjson"));
      write_draw_commands(cmd_out, frame_report, emit_overlay_commands(frame_report, style));
    }
    if (!opt.commands_only) {
      const auto rendered = render_frame(load_image(images.at(frame.frame_id)), frame_report, style);
      const auto target = fs::path(opt.out) / (stem + ".png");
      if (!cv::imwrite(target.string(), rendered)) {
        throw Error(ErrorCode::Io, fmt::format("cannot write {}", target.string()));
      }
    }
    ++written;
  }
  fmt::print(out, "rendered {} frames to {}{}\n", written, opt.out,
             opt.commands_only ? " (commands only)" : "");
  (void)err;
  return kExitOk;
}

// -- validate -----------------------------------------------------------------

/// Returns true when the file is clean (warnings allowed).
bool validate_file(const fs::path& path, std::ostream& out) {
  try {
    const auto format = detect_format(path);
    if (format == kDetectionsFormat) {
      const auto stream = read_detection_file(path);
      for (const auto& w : stream.warnings) fmt::print(out, "warning: {}\n", w.message);
      fmt::print(out, "{}: ok ({} frames, {} warnings)\n", path.string(), stream.frames.size(),
                 stream.warnings.size());
    } else if (format == kScoresFormat) {
      const auto table = read_recorded_scores_file(path);
      fmt::print(out, "{}: ok ({} score entries)\n", path.string(), table.size());
    } else if (format == kGroundTruthFormat) {
      const auto set = read_ground_truth_file(path);
      fmt::print(out, "{}: ok ({} annotated frames)\n", path.string(), set.frames.size());
    } else if (format == kReportFormat) {
      const auto report = read_report_file(path);
      fmt::print(out, "{}: ok ({} frame reports)\n", path.string(), report.frames.size());
    } else if (format == kDrawCommandsFormat) {
      std::ifstream in(path);
      RecordReader reader(in, path.string());
      read_header(reader, kDrawCommandsFormat);
      std::size_t count = 0;
      while (auto record = reader.next()) {
        for (const char* key : {"kind", "id", "box", "color", "text"}) {
          if (!record->contains(key)) {
            throw Error(ErrorCode::Parse, reader.where(fmt::format("missing field '{}'", key)));
          }
        }
        ++count;
      }
      fmt::print(out, "{}: ok ({} draw commands)\n", path.string(), count);
    } else {
      fmt::print(out, "error: {}: unknown format '{}'\n", path.string(), format);
      return false;
    }
  } catch (const Error& e) {
    fmt::print(out, "error: [{}] {}\n", to_string(e.code()), e.what());
    return false;
  }
  return true;
}

int cmd_validate(const std::vector<std::string>& files, std::ostream& out) {
  bool clean = true;
  for (const auto& file : files) clean = validate_file(file, out) && clean;
  return clean ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Face mask, face-hand interaction and social distance compliance engine",
               "safeguard"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Assess a detection stream and write a report");
  run_cmd->add_option("--detections", run.detections, "Detection stream (.ndjson)")->required();
  run_cmd->add_option("--scores", run.scores, "Recorded classifier scores (.ndjson)");
  run_cmd->add_option("--mask-model", run.mask_model, "ONNX mask classifier");
  run_cmd->add_option("--hand-model", run.hand_model, "ONNX face-hand classifier");
  run_cmd->add_option("--images", run.images, "Directory of frame images named by frame_id");
  run_cmd->add_option("--out", run.out, "Report output path")->required();
  run_cmd->add_option("--lambda", run.config.lambda, "Distance threshold coefficient");
  run_cmd->add_option("--margin", run.config.margin, "Face crop margin per side");
  run_cmd->add_option("--jobs", run.jobs, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--record-timing", run.record_timing,
                    "Store the measured frame rate in the report summary");
  add_config_flags(*run_cmd, run.config);

  EvaluateOptions eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score reports against ground truth");
  eval_cmd->add_option("--report", eval.reports, "Report file (repeatable)")->required();
  eval_cmd->add_option("--ground-truth", eval.ground_truths, "Ground truth file (repeatable)")
      ->required();
  eval_cmd->add_option("--iou", eval.config.iou, "IoU threshold for box matching");
  eval_cmd->add_option("--match-mode", eval.config.match_mode, "Subject matching: id or iou");
  eval_cmd->add_option("--out", eval.out, "Write the table as JSON");
  add_config_flags(*eval_cmd, eval.config);

  RenderOptions render;
  auto* render_cmd = app.add_subcommand("render", "Draw report decisions onto frame images");
  render_cmd->add_option("--detections", render.detections, "Detection stream")->required();
  render_cmd->add_option("--images", render.images, "Directory of frame images");
  render_cmd->add_option("--report", render.report, "Report file")->required();
  render_cmd->add_option("--out", render.out, "Output directory")->required();
  render_cmd->add_flag("--commands-only", render.commands_only,
                       "Write draw-command files only, no images");

  std::vector<std::string> files;
  auto* validate_cmd = app.add_subcommand("validate", "Check artifact files");
  validate_cmd->add_option("files", files, "Files to check")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run, out, err);
    if (*eval_cmd) return cmd_evaluate(eval, out, err);
    if (*render_cmd) return cmd_render(render, out, err);
    if (*validate_cmd) return cmd_validate(files, out);
  } catch (const Error& e) {
    fmt::print(err, "error: [{}] {}\n", to_string(e.code()), e.what());
    return e.code() == ErrorCode::Config ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace safeguard::cli
