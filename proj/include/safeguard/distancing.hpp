#pragma once

// Social distance decision from shoulder keypoints.
//
// For a pair of persons with shoulder points (l, r):
//   distance  D = || (l_a + r_a)/2 - (l_b + r_b)/2 ||
//   threshold T = lambda * (||l_a - r_a|| + ||l_b - r_b||) / 2
//   violation     D < T   (D == T keeps distance)
// No calibration is involved; the mean shoulder width of the pair stands in
// for the local pixel-per-metre scale.

#include <optional>
#include <string_view>
#include <vector>

#include "safeguard/types.hpp"

namespace safeguard {

struct DistancingConfig {
  double lambda_coefficient{3.0};
  double min_shoulder_width{1.0};  // pixels; narrower poses are not trusted

  /// Throws Error(Config) when a field violates its invariant.
  void validate() const;
};

struct PairAssessment {
  SubjectId person_a;  // lexicographically smaller id
  SubjectId person_b;
  double distance{0.0};
  double threshold{0.0};
  bool violation{false};

  bool operator==(const PairAssessment&) const = default;
};

enum class DistanceStatus { Keeps, Violates, Unassessed };

enum class UnassessedReason { None, MissingShoulders, DegenerateWidth, NoPeer };

std::string_view to_string(DistanceStatus status) noexcept;
std::string_view to_string(UnassessedReason reason) noexcept;
std::optional<DistanceStatus> parse_distance_status(std::string_view text) noexcept;
std::optional<UnassessedReason> parse_unassessed_reason(std::string_view text) noexcept;

struct SubjectDistanceStatus {
  SubjectId person_id;
  DistanceStatus status{DistanceStatus::Unassessed};
  UnassessedReason reason{UnassessedReason::None};
  BoundingBox box;

  bool operator==(const SubjectDistanceStatus&) const = default;
};

struct DistancingResult {
  std::vector<PairAssessment> pairs;
  std::vector<SubjectDistanceStatus> statuses;  // one per person, frame order
};

Point2D shoulder_center(const PersonDetection& person);
double shoulder_width(const PersonDetection& person);
double pair_distance(const PersonDetection& a, const PersonDetection& b);
double pair_threshold(const PersonDetection& a, const PersonDetection& b,
                      const DistancingConfig& config);
PairAssessment assess_pair(const PersonDetection& a, const PersonDetection& b,
                           const DistancingConfig& config);

/// Evaluates every unordered pair of assessable persons. Persons without
/// shoulders or with a degenerate shoulder width are left out of pairing and
/// reported Unassessed; so is a lone assessable person.
DistancingResult assess_frame(const Frame& frame, const DistancingConfig& config);

}  // namespace safeguard
