#pragma once

// Line-delimited JSON formats. Every file starts with a header record naming
// its format and version; each following non-blank line is one record.
// See docs/FORMATS.md for field-level documentation.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "safeguard/distancing.hpp"
#include "safeguard/recorded_scores.hpp"
#include "safeguard/types.hpp"

namespace safeguard {

inline constexpr int kFormatVersion = 1;

inline constexpr std::string_view kDetectionsFormat = "safeguard.detections";
inline constexpr std::string_view kScoresFormat = "safeguard.scores";
inline constexpr std::string_view kGroundTruthFormat = "safeguard.ground_truth";
inline constexpr std::string_view kReportFormat = "safeguard.report";
inline constexpr std::string_view kDrawCommandsFormat = "safeguard.draw_commands";

struct IngestWarning {
  std::size_t line{0};
  std::string message;
};

/// Splits a stream into numbered JSON records, skipping blank lines.
class RecordReader {
 public:
  RecordReader(std::istream& in, std::string source_name);

  /// Next record, or nullopt at end of stream. Throws Error(Parse) on bad JSON.
  std::optional<nlohmann::json> next();
  [[nodiscard]] std::size_t line() const noexcept { return line_; }
  [[nodiscard]] const std::string& source() const noexcept { return source_; }

  /// "source:line: message" for the record most recently returned.
  [[nodiscard]] std::string where(std::string_view message) const;

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_{0};
};

/// Reads the first record and checks `format` and `format_version`.
nlohmann::json read_header(RecordReader& reader, std::string_view expected_format);

// -- detections ---------------------------------------------------------------

struct DetectionStreamHeader {
  int format_version{kFormatVersion};
  std::string video_id;
  std::optional<double> frame_rate;
  ImageGeometry geometry;

  bool operator==(const DetectionStreamHeader&) const = default;
};

/// Sequential frame iterator over a detection stream. Coordinates outside the
/// image are clamped with a warning; any other invariant breach is an error
/// naming the line.
class DetectionReader {
 public:
  DetectionReader(std::istream& in, std::string source_name = "<detections>");

  [[nodiscard]] const DetectionStreamHeader& header() const noexcept { return header_; }
  std::optional<Frame> next();
  [[nodiscard]] const std::vector<IngestWarning>& warnings() const noexcept { return warnings_; }

 private:
  RecordReader records_;
  DetectionStreamHeader header_;
  std::optional<FrameId> last_frame_id_;
  std::vector<IngestWarning> warnings_;
};

struct DetectionStream {
  DetectionStreamHeader header;
  std::vector<Frame> frames;
  std::vector<IngestWarning> warnings;
};

DetectionStream read_detection_stream(std::istream& in, std::string source_name = "<detections>");
DetectionStream read_detection_file(const std::filesystem::path& path);

void write_detection_header(std::ostream& out, const DetectionStreamHeader& header);
void write_frame(std::ostream& out, const Frame& frame);

// -- recorded scores ----------------------------------------------------------

ScoreTable read_recorded_scores(std::istream& in, std::string source_name = "<scores>");
ScoreTable read_recorded_scores_file(const std::filesystem::path& path);
void write_recorded_scores(std::ostream& out, const ScoreTable& table);

// -- ground truth -------------------------------------------------------------

struct GroundTruthSubject {
  SubjectId id;
  std::optional<SubjectId> face_id;    // defaults to id when matching by id
  std::optional<SubjectId> person_id;  // defaults to id when matching by id
  std::optional<BoundingBox> face_box;
  std::optional<BoundingBox> person_box;
  std::optional<MaskLabel> mask;
  std::optional<HandLabel> hand;
  std::optional<DistanceStatus> distance;  // Keeps or Violates

  [[nodiscard]] const SubjectId& face_key() const noexcept { return face_id ? *face_id : id; }
  [[nodiscard]] const SubjectId& person_key() const noexcept {
    return person_id ? *person_id : id;
  }

  bool operator==(const GroundTruthSubject&) const = default;
};

struct GroundTruthFrame {
  FrameId frame_id{0};
  std::vector<GroundTruthSubject> subjects;

  bool operator==(const GroundTruthFrame&) const = default;
};

struct GroundTruthSet {
  std::string video_id;
  std::vector<GroundTruthFrame> frames;

  bool operator==(const GroundTruthSet&) const = default;
};

GroundTruthSet read_ground_truth(std::istream& in, std::string source_name = "<ground_truth>");
GroundTruthSet read_ground_truth_file(const std::filesystem::path& path);
void write_ground_truth(std::ostream& out, const GroundTruthSet& set);

// -- shared json helpers ------------------------------------------------------

nlohmann::json box_to_json(const BoundingBox& box);
nlohmann::json point_to_json(const Point2D& point);

/// Peeks at the header of an artifact file and returns its `format` string.
std::string detect_format(const std::filesystem::path& path);

}  // namespace safeguard
