#pragma once

// Scoring against ground truth. Ground-truth subjects that no detection
// matches are treated as missed detections and left out of every
// denominator; only matched subjects are scored. Totals pool the counts of
// all videos (micro-average).

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "safeguard/ingestion.hpp"
#include "safeguard/report.hpp"

namespace safeguard {

enum class MatchingMode { ById, ByIoU };

std::string_view to_string(MatchingMode mode) noexcept;
std::optional<MatchingMode> parse_matching_mode(std::string_view text) noexcept;

struct MatchingConfig {
  double iou_threshold{0.5};
  MatchingMode matching{MatchingMode::ByIoU};

  void validate() const;
};

/// Per ground-truth subject, the matched face assessment and subject status
/// (indices into the frame report), if any.
struct SubjectMatch {
  std::optional<std::size_t> face;
  std::optional<std::size_t> person;
};

struct Correspondence {
  std::vector<SubjectMatch> subjects;  // parallel to GroundTruthFrame::subjects
};

Correspondence match_subjects(const FrameReport& report, const GroundTruthFrame& truth,
                              const MatchingConfig& config);

enum class Task { Mask, FaceHand, Distance };
inline constexpr std::array<Task, 3> kAllTasks{Task::Mask, Task::FaceHand, Task::Distance};

std::string_view to_string(Task task) noexcept;

struct TaskAccuracy {
  Task task{Task::Mask};
  std::size_t correct{0};
  std::size_t scored{0};

  /// Undefined (nullopt) when nothing was scored.
  [[nodiscard]] std::optional<double> accuracy() const noexcept;
  TaskAccuracy& operator+=(const TaskAccuracy& other) noexcept;

  bool operator==(const TaskAccuracy&) const = default;
};

TaskAccuracy score_task(const FrameReport& report, const GroundTruthFrame& truth,
                        const Correspondence& correspondence, Task task);

struct VideoCase {
  std::string video_id;
  std::vector<FrameReport> reports;
  std::optional<double> frames_per_second;
  GroundTruthSet ground_truth;
};

struct VideoEvaluation {
  std::string video_id;
  std::size_t frame_count{0};
  std::optional<double> frames_per_second;
  std::size_t subject_count{0};
  std::array<TaskAccuracy, 3> tasks{TaskAccuracy{Task::Mask}, TaskAccuracy{Task::FaceHand},
                                    TaskAccuracy{Task::Distance}};

  [[nodiscard]] const TaskAccuracy& task(Task t) const noexcept {
    return tasks[static_cast<std::size_t>(t)];
  }
};

struct EvaluationTable {
  std::vector<VideoEvaluation> videos;
  VideoEvaluation total;
};

VideoEvaluation evaluate_video(const VideoCase& video, const MatchingConfig& config);
EvaluationTable evaluate_videos(std::span<const VideoCase> videos, const MatchingConfig& config);

/// Fixed-width text table with columns Video, # frames, FPS, # subject,
/// Mask acc., Face-hand acc., Distance acc.
std::string format_table(const EvaluationTable& table);
nlohmann::json table_to_json(const EvaluationTable& table);

}  // namespace safeguard
