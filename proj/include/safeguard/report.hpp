#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "safeguard/distancing.hpp"
#include "safeguard/face_pipeline.hpp"
#include "safeguard/types.hpp"

namespace safeguard {

struct FrameReport {
  std::string video_id;
  FrameId frame_id{0};
  ImageGeometry geometry;
  std::vector<FaceAssessment> face_assessments;
  std::vector<PairAssessment> pair_assessments;
  std::vector<SubjectDistanceStatus> subject_statuses;
  std::vector<std::string> warnings;

  bool operator==(const FrameReport&) const = default;
};

/// Assembles one frame's decisions. Throws Error(IdMismatch) when an
/// assessment names an entity that is not in `frame`.
FrameReport build_frame_report(const Frame& frame, const std::string& video_id,
                               const FaceBranchResult& faces, const DistancingResult& distancing);

struct VideoSummary {
  std::string video_id;
  std::size_t frame_count{0};
  std::size_t face_count{0};
  std::size_t person_count{0};
  std::array<std::size_t, 3> mask_counts{};      // no_mask, mask, improper_mask
  std::array<std::size_t, 2> hand_counts{};      // interaction, no_interaction
  std::array<std::size_t, 3> distance_counts{};  // keeps, violates, unassessed
  std::size_t pair_count{0};
  std::size_t violation_pairs{0};
  std::size_t warning_count{0};
  std::optional<double> frames_per_second;  // wall clock, only when measured

  /// Adds the count fields of `other`; the rate is left untouched.
  VideoSummary& merge(const VideoSummary& other);

  bool operator==(const VideoSummary&) const = default;
};

VideoSummary summarize_video(std::span<const FrameReport> reports);

// -- report files -------------------------------------------------------------

struct ReportFile {
  std::string video_id;
  ImageGeometry geometry;
  std::vector<FrameReport> frames;
  std::optional<VideoSummary> summary;
};

void write_report_header(std::ostream& out, const std::string& video_id,
                         const ImageGeometry& geometry);
void write_frame_report(std::ostream& out, const FrameReport& report);
void write_summary(std::ostream& out, const VideoSummary& summary);

ReportFile read_report(std::istream& in, std::string source_name = "<report>");
ReportFile read_report_file(const std::filesystem::path& path);

}  // namespace safeguard
