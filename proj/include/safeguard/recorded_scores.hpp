#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "safeguard/types.hpp"

namespace safeguard {

inline constexpr double kDistributionTolerance = 1e-6;

/// Empty string when `scores` is a probability vector (finite, nonnegative,
/// summing to 1 within kDistributionTolerance); otherwise the reason.
std::string distribution_problem(std::span<const double> scores);

/// Score vectors are stored in canonical label order:
/// mask (no_mask, mask, improper_mask), hand (interaction, no_interaction).
struct RecordedScoresEntry {
  FrameId frame_id{0};
  SubjectId face_id;
  std::array<double, 3> mask_scores{};
  std::array<double, 2> hand_scores{};

  bool operator==(const RecordedScoresEntry&) const = default;
};

class ScoreTable {
 public:
  using Key = std::pair<FrameId, SubjectId>;

  /// Throws Error(DuplicateKey) if the key is already present.
  void insert(RecordedScoresEntry entry);
  [[nodiscard]] const RecordedScoresEntry* find(FrameId frame, const SubjectId& face) const;
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] auto begin() const { return entries_.begin(); }
  [[nodiscard]] auto end() const { return entries_.end(); }

 private:
  std::map<Key, RecordedScoresEntry> entries_;
};

}  // namespace safeguard
