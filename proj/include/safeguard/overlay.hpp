#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <opencv2/core/mat.hpp>

#include "safeguard/report.hpp"

namespace safeguard {

using Rgb = std::array<std::uint8_t, 3>;

struct OverlayStyle {
  Rgb keeps_color{0, 200, 0};
  Rgb violates_color{230, 0, 0};
  Rgb unassessed_color{128, 128, 128};
  int line_thickness{2};
  double font_scale{1.0};

  /// Throws Error(Config) if colours coincide or thickness < 1.
  void validate() const;
};

enum class EntityKind { Person, Face };

struct DrawCommand {
  EntityKind kind{EntityKind::Person};
  SubjectId id;
  BoundingBox box;
  Rgb color{};
  int thickness{1};
  std::string text;  // drawn above the box

  bool operator==(const DrawCommand&) const = default;
};

/// Person boxes coloured by distance status, face boxes labelled with the
/// mask and face-hand decisions. Sorted by (kind, id).
std::vector<DrawCommand> emit_overlay_commands(const FrameReport& report,
                                               const OverlayStyle& style);

/// Draws the commands for `report` on a copy of `image` (BGR8). Throws
/// Error(GeometryMismatch) if the image size differs from the report geometry.
cv::Mat render_frame(const cv::Mat& image, const FrameReport& report, const OverlayStyle& style);

void write_draw_commands(std::ostream& out, const FrameReport& report,
                         const std::vector<DrawCommand>& commands);

}  // namespace safeguard
