#include "safeguard/distancing.hpp"

#include <cmath>

#include <fmt/format.h>

#include "safeguard/error.hpp"

namespace safeguard {

namespace {

void require_shoulders(const PersonDetection& person) {
  if (!person.has_shoulders()) {
    throw Error(ErrorCode::MissingShoulders,
                fmt::format("person {} has no shoulder keypoints", person.id));
  }
}

double norm(double dx, double dy) { return std::sqrt(dx * dx + dy * dy); }

double checked_width(const PersonDetection& person, const DistancingConfig& config) {
  const double w = shoulder_width(person);
  if (!(w >= config.min_shoulder_width)) {
    throw Error(ErrorCode::DegenerateWidth,
                fmt::format("person {} shoulder width {} below minimum {}", person.id, w,
                            config.min_shoulder_width));
  }
  return w;
}

PairAssessment decide(const PersonDetection& a, const PersonDetection& b, double width_a,
                      double width_b, const DistancingConfig& config) {
  const bool a_first = a.id <= b.id;
  PairAssessment out;
  out.person_a = a_first ? a.id : b.id;
  out.person_b = a_first ? b.id : a.id;
  out.distance = pair_distance(a, b);
  out.threshold = config.lambda_coefficient * (width_a + width_b) / 2.0;
  out.violation = out.distance < out.threshold;
  return out;
}

}  // namespace

void DistancingConfig::validate() const {
  if (!(lambda_coefficient > 0.0) || !std::isfinite(lambda_coefficient)) {
    throw Error(ErrorCode::Config, fmt::format("lambda must be > 0, got {}", lambda_coefficient));
  }
  if (!(min_shoulder_width > 0.0) || !std::isfinite(min_shoulder_width)) {
    throw Error(ErrorCode::Config,
                fmt::format("min_shoulder_width must be > 0, got {}", min_shoulder_width));
  }
}

std::string_view to_string(DistanceStatus status) noexcept {
  switch (status) {
    case DistanceStatus::Keeps: return "keeps";
    case DistanceStatus::Violates: return "violates";
    case DistanceStatus::Unassessed: return "unassessed";
  }
  return "?";
}

std::string_view to_string(UnassessedReason reason) noexcept {
  switch (reason) {
    case UnassessedReason::None: return "none";
    case UnassessedReason::MissingShoulders: return "missing_shoulders";
    case UnassessedReason::DegenerateWidth: return "degenerate_width";
    case UnassessedReason::NoPeer: return "no_peer";
  }
  return "?";
}

std::optional<DistanceStatus> parse_distance_status(std::string_view text) noexcept {
  for (auto s : {DistanceStatus::Keeps, DistanceStatus::Violates, DistanceStatus::Unassessed}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::optional<UnassessedReason> parse_unassessed_reason(std::string_view text) noexcept {
  for (auto r : {UnassessedReason::None, UnassessedReason::MissingShoulders,
                 UnassessedReason::DegenerateWidth, UnassessedReason::NoPeer}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

Point2D shoulder_center(const PersonDetection& person) {
  require_shoulders(person);
  const auto& l = *person.left_shoulder;
  const auto& r = *person.right_shoulder;
  return {(l.x + r.x) / 2.0, (l.y + r.y) / 2.0};
}

double shoulder_width(const PersonDetection& person) {
  require_shoulders(person);
  const auto& l = *person.left_shoulder;
  const auto& r = *person.right_shoulder;
  return norm(l.x - r.x, l.y - r.y);
}

double pair_distance(const PersonDetection& a, const PersonDetection& b) {
  const Point2D ca = shoulder_center(a);
  const Point2D cb = shoulder_center(b);
  return norm(ca.x - cb.x, ca.y - cb.y);
}

double pair_threshold(const PersonDetection& a, const PersonDetection& b,
                      const DistancingConfig& config) {
  const double wa = checked_width(a, config);
  const double wb = checked_width(b, config);
  return config.lambda_coefficient * (wa + wb) / 2.0;
}

PairAssessment assess_pair(const PersonDetection& a, const PersonDetection& b,
                           const DistancingConfig& config) {
  return decide(a, b, checked_width(a, config), checked_width(b, config), config);
}

DistancingResult assess_frame(const Frame& frame, const DistancingConfig& config) {
  DistancingResult result;
  result.statuses.reserve(frame.persons.size());

  struct Candidate {
    const PersonDetection* person;
    double width;
    std::size_t status_index;
  };
  std::vector<Candidate> assessable;
  assessable.reserve(frame.persons.size());

  for (const auto& person : frame.persons) {
    SubjectDistanceStatus status{person.id, DistanceStatus::Unassessed, UnassessedReason::None,
                                 person.box};
    if (!person.has_shoulders()) {
      status.reason = UnassessedReason::MissingShoulders;
    } else if (const double w = shoulder_width(person); !(w >= config.min_shoulder_width)) {
      status.reason = UnassessedReason::DegenerateWidth;
    } else {
      status.status = DistanceStatus::Keeps;
      assessable.push_back({&person, w, result.statuses.size()});
    }
    result.statuses.push_back(std::move(status));
  }

  if (assessable.size() == 1) {
    auto& lone = result.statuses[assessable.front().status_index];
    lone.status = DistanceStatus::Unassessed;
    lone.reason = UnassessedReason::NoPeer;
    return result;
  }

  result.pairs.reserve(assessable.size() * (assessable.size() - (assessable.empty() ? 0 : 1)) / 2);
  for (std::size_t i = 0; i < assessable.size(); ++i) {
    for (std::size_t j = i + 1; j < assessable.size(); ++j) {
      const auto& a = assessable[i];
      const auto& b = assessable[j];
      auto pair = decide(*a.person, *b.person, a.width, b.width, config);
      if (pair.violation) {
        result.statuses[a.status_index].status = DistanceStatus::Violates;
        result.statuses[b.status_index].status = DistanceStatus::Violates;
      }
      result.pairs.push_back(std::move(pair));
    }
  }
  return result;
}

}  // namespace safeguard
