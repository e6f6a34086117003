#pragma once

// Random report/ground-truth pairs for exercising the evaluation protocol.
// Ground truth includes subjects no detection covers, subjects with missing
// labels, and detections with no ground truth, so the ignore rule and the
// Unassessed exclusion are both on the path.

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "safeguard/evaluation.hpp"
#include "support/fixtures.hpp"

namespace fixtures {

using namespace safeguard;

inline BoundingBox jitter(std::mt19937_64& rng, const BoundingBox& b, double amount) {
  std::uniform_real_distribution<double> d(-amount, amount);
  return {b.x_min + d(rng), b.y_min + d(rng), b.x_max + d(rng), b.y_max + d(rng)};
}

inline VideoCase synthetic_video(std::mt19937_64& rng, const std::string& video_id,
                                 int frame_count, double label_noise) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> subjects(0, 6);
  std::uniform_real_distribution<double> pos(0.0, 1500.0);
  std::uniform_real_distribution<double> size(30.0, 200.0);

  VideoCase video;
  video.video_id = video_id;
  video.ground_truth.video_id = video_id;
  video.frames_per_second = 20.0 + 10.0 * unit(rng);

  for (int f = 0; f < frame_count; ++f) {
    FrameReport report;
    report.video_id = video_id;
    report.frame_id = f;
    report.geometry = {1920, 1080};
    GroundTruthFrame truth;
    truth.frame_id = f;

    const int n = subjects(rng);
    for (int i = 0; i < n; ++i) {
      const std::string id = "s" + std::to_string(i);
      const double x = pos(rng);
      const double y = pos(rng) * 0.5;
      const double w = size(rng);
      const BoundingBox person_box{x, y, x + w, y + 2.5 * w};
      const BoundingBox face_box{x + 0.3 * w, y, x + 0.7 * w, y + 0.5 * w};

      FaceAssessment face;
      face.face_id = "f" + std::to_string(i);
      face.person_id = id;
      face.face_box = face_box;
      face.crop_box = face_box;
      face.mask_label = kAllMaskLabels[static_cast<std::size_t>(unit(rng) * 3) % 3];
      face.hand_label = kAllHandLabels[static_cast<std::size_t>(unit(rng) * 2) % 2];
      report.face_assessments.push_back(face);

      SubjectDistanceStatus status;
      status.person_id = id;
      status.box = person_box;
      const double roll = unit(rng);
      status.status = roll < 0.45   ? DistanceStatus::Keeps
                      : roll < 0.9  ? DistanceStatus::Violates
                                    : DistanceStatus::Unassessed;
      if (status.status == DistanceStatus::Unassessed) status.reason = UnassessedReason::NoPeer;
      report.subject_statuses.push_back(status);

      if (unit(rng) < 0.15) continue;  // detection without ground truth

      GroundTruthSubject s;
      s.id = id;
      s.face_id = face.face_id;
      s.face_box = jitter(rng, face_box, 3.0);
      s.person_box = jitter(rng, person_box, 6.0);
      if (unit(rng) < 0.9) {
        s.mask = unit(rng) < label_noise
                     ? kAllMaskLabels[(static_cast<std::size_t>(face.mask_label) + 1) % 3]
                     : face.mask_label;
      }
      if (unit(rng) < 0.9) {
        s.hand = unit(rng) < label_noise
                     ? kAllHandLabels[(static_cast<std::size_t>(face.hand_label) + 1) % 2]
                     : face.hand_label;
      }
      if (unit(rng) < 0.9) {
        const bool flip = unit(rng) < label_noise;
        const bool keeps = status.status == DistanceStatus::Keeps;
        s.distance = (keeps != flip) ? DistanceStatus::Keeps : DistanceStatus::Violates;
      }
      truth.subjects.push_back(std::move(s));
    }

    // ground truth nothing detected
    if (unit(rng) < 0.3) {
      GroundTruthSubject missed;
      missed.id = "missed";
      missed.face_box = BoundingBox{1800, 900, 1830, 930};
      missed.person_box = BoundingBox{1790, 900, 1840, 1050};
      missed.mask = MaskLabel::Mask;
      missed.hand = HandLabel::Interaction;
      missed.distance = DistanceStatus::Violates;
      truth.subjects.push_back(std::move(missed));
    }

    if (unit(rng) < 0.05) {
      // frame with ground truth but no report at all
      video.ground_truth.frames.push_back(std::move(truth));
      continue;
    }
    video.reports.push_back(std::move(report));
    video.ground_truth.frames.push_back(std::move(truth));
  }
  return video;
}

struct Workload {
  std::vector<Frame> frames;
  std::shared_ptr<ScoreTable> scores = std::make_shared<ScoreTable>();
};

/// Detection frames with one face per person and a recorded score entry for
/// every face.
inline Workload recorded_workload(std::mt19937_64& rng, int frame_count, int max_persons = 6) {
  std::uniform_int_distribution<int> persons(0, max_persons);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Workload w;
  for (int f = 0; f < frame_count; ++f) {
    auto frame = random_frame(rng, persons(rng));
    frame.frame_id = f;
    for (std::size_t k = 0; k < frame.persons.size(); ++k) {
      const auto& b = frame.persons[k].box;
      const auto id = "f" + std::to_string(k);
      frame.faces.push_back({id,
                             {b.x_min + 0.25 * b.width(), b.y_min, b.x_min + 0.75 * b.width(),
                              b.y_min + 0.2 * b.height()},
                             0.9, frame.persons[k].id});
      const double m0 = unit(rng);
      const double m1 = unit(rng) * (1.0 - m0);
      const double h0 = unit(rng);
      w.scores->insert({f, id, {m0, m1, 1.0 - m0 - m1}, {h0, 1.0 - h0}});
    }
    w.frames.push_back(std::move(frame));
  }
  return w;
}

}  // namespace fixtures
