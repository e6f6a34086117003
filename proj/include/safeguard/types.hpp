#pragma once

// Shared domain types. Pixel coordinates: origin top-left, x to the right,
// y downward. Boxes are real-valued corners.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <opencv2/core/mat.hpp>

namespace safeguard {

using SubjectId = std::string;
using FrameId = std::int64_t;

struct ImageGeometry {
  int width{1};
  int height{1};

  bool operator==(const ImageGeometry&) const = default;
};

struct Point2D {
  double x{0.0};
  double y{0.0};

  bool operator==(const Point2D&) const = default;
};

struct BoundingBox {
  double x_min{0.0};
  double y_min{0.0};
  double x_max{0.0};
  double y_max{0.0};

  [[nodiscard]] double width() const noexcept { return x_max - x_min; }
  [[nodiscard]] double height() const noexcept { return y_max - y_min; }
  [[nodiscard]] double area() const noexcept;
  [[nodiscard]] bool contains(const BoundingBox& other) const noexcept;

  bool operator==(const BoundingBox&) const = default;
};

/// Intersection over union; 0 when either box has zero area and they do not coincide.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

struct PersonDetection {
  SubjectId id;
  BoundingBox box;
  std::optional<Point2D> left_shoulder;
  std::optional<Point2D> right_shoulder;
  double confidence{1.0};

  [[nodiscard]] bool has_shoulders() const noexcept {
    return left_shoulder.has_value() && right_shoulder.has_value();
  }

  bool operator==(const PersonDetection&) const = default;
};

struct FaceDetection {
  SubjectId id;
  BoundingBox box;
  double confidence{1.0};
  std::optional<SubjectId> person_id;

  bool operator==(const FaceDetection&) const = default;
};

enum class MaskLabel { NoMask, Mask, ImproperMask };
enum class HandLabel { Interaction, NoInteraction };

inline constexpr std::array<MaskLabel, 3> kAllMaskLabels{MaskLabel::NoMask, MaskLabel::Mask,
                                                         MaskLabel::ImproperMask};
inline constexpr std::array<HandLabel, 2> kAllHandLabels{HandLabel::Interaction,
                                                         HandLabel::NoInteraction};

std::string_view to_string(MaskLabel label) noexcept;
std::string_view to_string(HandLabel label) noexcept;
std::optional<MaskLabel> parse_mask_label(std::string_view text) noexcept;
std::optional<HandLabel> parse_hand_label(std::string_view text) noexcept;

struct Frame {
  FrameId frame_id{0};
  ImageGeometry geometry;
  std::vector<PersonDetection> persons;
  std::vector<FaceDetection> faces;
  cv::Mat pixels;  // BGR8; empty unless loaded for cropping or rendering

  [[nodiscard]] const PersonDetection* find_person(std::string_view id) const noexcept;
  [[nodiscard]] const FaceDetection* find_face(std::string_view id) const noexcept;
};

/// Compares detections and geometry; pixel payloads are ignored.
bool operator==(const Frame& a, const Frame& b);

/// Checks every type invariant of a frame. Empty result means the frame is
/// well-formed; each entry names the offending entity and field.
std::vector<std::string> validate_frame(const Frame& frame);

}  // namespace safeguard
