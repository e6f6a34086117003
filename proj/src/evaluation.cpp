#include "safeguard/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "safeguard/error.hpp"

namespace safeguard {

using nlohmann::json;

std::string_view to_string(MatchingMode mode) noexcept {
  return mode == MatchingMode::ById ? "id" : "iou";
}

std::optional<MatchingMode> parse_matching_mode(std::string_view text) noexcept {
  if (text == "id") return MatchingMode::ById;
  if (text == "iou") return MatchingMode::ByIoU;
  return std::nullopt;
}

void MatchingConfig::validate() const {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw Error(ErrorCode::Config,
                fmt::format("iou threshold must be in (0,1], got {}", iou_threshold));
  }
}

std::string_view to_string(Task task) noexcept {
  switch (task) {
    case Task::Mask: return "mask";
    case Task::FaceHand: return "face_hand";
    case Task::Distance: return "distance";
  }
  return "?";
}

namespace {

struct Candidate {
  double overlap;
  const SubjectId* truth_id;
  const SubjectId* predicted_id;
  std::size_t truth_index;
  std::size_t predicted_index;
};

/// Greedy one-to-one assignment: highest IoU first, ties by ground-truth id
/// then predicted id.
template <typename TruthBox, typename Predicted>
void greedy_match(const GroundTruthFrame& truth, TruthBox truth_box,
                  const std::vector<Predicted>& predicted, double threshold,
                  std::vector<std::optional<std::size_t>>& out) {
  std::vector<Candidate> candidates;
  for (std::size_t t = 0; t < truth.subjects.size(); ++t) {
    const auto& subject = truth.subjects[t];
    const std::optional<BoundingBox>& box = truth_box(subject);
    if (!box) continue;
    for (std::size_t p = 0; p < predicted.size(); ++p) {
      const double overlap = iou(*box, predicted[p].box);
      if (overlap >= threshold) {
        candidates.push_back({overlap, &subject.id, &predicted[p].id, t, p});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.overlap, *a.truth_id, *a.predicted_id) <
           std::tie(a.overlap, *b.truth_id, *b.predicted_id);
  });
  std::vector<bool> used(predicted.size(), false);
  for (const auto& c : candidates) {
    if (out[c.truth_index] || used[c.predicted_index]) continue;
    out[c.truth_index] = c.predicted_index;
    used[c.predicted_index] = true;
  }
}

struct BoxedId {
  const SubjectId& id;
  const BoundingBox& box;
};

}  // namespace

Correspondence match_subjects(const FrameReport& report, const GroundTruthFrame& truth,
                              const MatchingConfig& config) {
  Correspondence result;
  result.subjects.resize(truth.subjects.size());

  if (config.matching == MatchingMode::ById) {
    std::map<std::string_view, std::size_t> faces;
    std::map<std::string_view, std::size_t> persons;
    for (std::size_t i = 0; i < report.face_assessments.size(); ++i) {
      faces.emplace(report.face_assessments[i].face_id, i);
    }
    for (std::size_t i = 0; i < report.subject_statuses.size(); ++i) {
      persons.emplace(report.subject_statuses[i].person_id, i);
    }
    for (std::size_t t = 0; t < truth.subjects.size(); ++t) {
      const auto& s = truth.subjects[t];
      if (auto it = faces.find(s.face_key()); it != faces.end()) {
        result.subjects[t].face = it->second;
      }
      if (auto it = persons.find(s.person_key()); it != persons.end()) {
        result.subjects[t].person = it->second;
      }
    }
    return result;
  }

  std::vector<BoxedId> faces;
  for (const auto& f : report.face_assessments) faces.push_back({f.face_id, f.face_box});
  std::vector<BoxedId> persons;
  for (const auto& s : report.subject_statuses) persons.push_back({s.person_id, s.box});

  std::vector<std::optional<std::size_t>> face_match(truth.subjects.size());
  std::vector<std::optional<std::size_t>> person_match(truth.subjects.size());
  greedy_match(
      truth, [](const GroundTruthSubject& s) -> const auto& { return s.face_box; }, faces,
      config.iou_threshold, face_match);
  greedy_match(
      truth, [](const GroundTruthSubject& s) -> const auto& { return s.person_box; }, persons,
      config.iou_threshold, person_match);
  for (std::size_t t = 0; t < truth.subjects.size(); ++t) {
    result.subjects[t] = {face_match[t], person_match[t]};
  }
  return result;
}

std::optional<double> TaskAccuracy::accuracy() const noexcept {
  if (scored == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(scored);
}

TaskAccuracy& TaskAccuracy::operator+=(const TaskAccuracy& other) noexcept {
  correct += other.correct;
  scored += other.scored;
  return *this;
}

TaskAccuracy score_task(const FrameReport& report, const GroundTruthFrame& truth,
                        const Correspondence& correspondence, Task task) {
  TaskAccuracy acc{task};
  for (std::size_t t = 0; t < truth.subjects.size(); ++t) {
    const auto& subject = truth.subjects[t];
    const auto& match = correspondence.subjects.at(t);
    switch (task) {
      case Task::Mask:
        if (subject.mask && match.face) {
          ++acc.scored;
          acc.correct += report.face_assessments[*match.face].mask_label == *subject.mask;
        }
        break;
      case Task::FaceHand:
        if (subject.hand && match.face) {
          ++acc.scored;
          acc.correct += report.face_assessments[*match.face].hand_label == *subject.hand;
        }
        break;
      case Task::Distance:
        if (subject.distance && match.person) {
          const auto status = report.subject_statuses[*match.person].status;
          if (status == DistanceStatus::Unassessed) break;
          ++acc.scored;
          acc.correct += status == *subject.distance;
        }
        break;
    }
  }
  return acc;
}

VideoEvaluation evaluate_video(const VideoCase& video, const MatchingConfig& config) {
  VideoEvaluation out;
  out.video_id = video.video_id;
  out.frame_count = video.reports.size();
  out.frames_per_second = video.frames_per_second;

  std::map<FrameId, const FrameReport*> by_frame;
  for (const auto& r : video.reports) by_frame.emplace(r.frame_id, &r);

  std::set<SubjectId> subjects;
  for (const auto& truth : video.ground_truth.frames) {
    for (const auto& s : truth.subjects) subjects.insert(s.id);
    auto it = by_frame.find(truth.frame_id);
    if (it == by_frame.end()) continue;  // whole frame undetected
    const auto correspondence = match_subjects(*it->second, truth, config);
    for (auto task : kAllTasks) {
      out.tasks[static_cast<std::size_t>(task)] +=
          score_task(*it->second, truth, correspondence, task);
    }
  }
  out.subject_count = subjects.size();
  return out;
}

EvaluationTable evaluate_videos(std::span<const VideoCase> videos, const MatchingConfig& config) {
  EvaluationTable table;
  table.total.video_id = "Total";
  double seconds = 0.0;
  bool all_timed = !videos.empty();
  for (const auto& video : videos) {
    auto row = evaluate_video(video, config);
    table.total.frame_count += row.frame_count;
    table.total.subject_count += row.subject_count;
    for (std::size_t i = 0; i < row.tasks.size(); ++i) table.total.tasks[i] += row.tasks[i];
    if (row.frames_per_second && *row.frames_per_second > 0.0) {
      seconds += static_cast<double>(row.frame_count) / *row.frames_per_second;
    } else {
      all_timed = false;
    }
    table.videos.push_back(std::move(row));
  }
  if (all_timed && seconds > 0.0) {
    table.total.frames_per_second = static_cast<double>(table.total.frame_count) / seconds;
  }
  return table;
}

namespace {

std::string percent(const TaskAccuracy& acc) {
  auto value = acc.accuracy();
  return value ? fmt::format("{:.2f}%", *value * 100.0) : std::string("n/a");
}

std::string rate(const std::optional<double>& fps) {
  return fps ? fmt::format("{:.2f}", *fps) : std::string("-");
}

json accuracy_json(const TaskAccuracy& acc) {
  json j = {{"correct", acc.correct}, {"scored", acc.scored}};
  auto value = acc.accuracy();
  j["accuracy"] = value ? json(*value) : json(nullptr);
  return j;
}

json row_json(const VideoEvaluation& row) {
  json j = {{"video", row.video_id},
            {"frames", row.frame_count},
            {"subjects", row.subject_count},
            {"mask_acc", accuracy_json(row.task(Task::Mask))},
            {"face_hand_acc", accuracy_json(row.task(Task::FaceHand))},
            {"distance_acc", accuracy_json(row.task(Task::Distance))}};
  j["fps"] = row.frames_per_second ? json(*row.frames_per_second) : json(nullptr);
  return j;
}

}  // namespace

std::string format_table(const EvaluationTable& table) {
  std::size_t name_width = 5;
  for (const auto& row : table.videos) name_width = std::max(name_width, row.video_id.size());

  std::string out;
  auto line = [&](std::string_view video, std::string_view frames, std::string_view fps,
                  std::string_view subjects, std::string_view mask, std::string_view hand,
                  std::string_view dist) {
    out += fmt::format("{:<{}}  {:>8}  {:>6}  {:>9}  {:>9}  {:>13}  {:>12}\n", video, name_width,
                       frames, fps, subjects, mask, hand, dist);
  };
  auto row_line = [&](const VideoEvaluation& row) {
    line(row.video_id, std::to_string(row.frame_count), rate(row.frames_per_second),
         std::to_string(row.subject_count), percent(row.task(Task::Mask)),
         percent(row.task(Task::FaceHand)), percent(row.task(Task::Distance)));
  };
  line("Video", "# frames", "FPS", "# subject", "Mask acc.", "Face-hand acc.", "Distance acc");
  for (const auto& row : table.videos) row_line(row);
  row_line(table.total);
  return out;
}

json table_to_json(const EvaluationTable& table) {
  json videos = json::array();
  for (const auto& row : table.videos) videos.push_back(row_json(row));
  return {{"videos", videos}, {"total", row_json(table.total)}};
}

}  // namespace safeguard
