#include "safeguard/recorded_scores.hpp"

#include <cmath>

#include <fmt/format.h>

#include "safeguard/error.hpp"

namespace safeguard {

std::string distribution_problem(std::span<const double> scores) {
  if (scores.empty()) return "empty score vector";
  double sum = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s)) return "non-finite score";
    if (s < 0.0) return fmt::format("negative score {}", s);
    sum += s;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    return fmt::format("scores sum to {} (expected 1 within {})", sum, kDistributionTolerance);
  }
  return {};
}

void ScoreTable::insert(RecordedScoresEntry entry) {
  Key key{entry.frame_id, entry.face_id};
  auto [it, inserted] = entries_.try_emplace(key, std::move(entry));
  if (!inserted) {
    throw Error(ErrorCode::DuplicateKey, fmt::format("duplicate recorded scores for frame {} face '{}'",
                                                     key.first, key.second));
  }
}

const RecordedScoresEntry* ScoreTable::find(FrameId frame, const SubjectId& face) const {
  auto it = entries_.find(Key{frame, face});
  return it == entries_.end() ? nullptr : &it->second;
}

}  // namespace safeguard
