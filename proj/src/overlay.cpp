#include "safeguard/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <opencv2/imgproc.hpp>

#include "safeguard/error.hpp"
#include "safeguard/ingestion.hpp"

namespace safeguard {

void OverlayStyle::validate() const {
  if (keeps_color == violates_color || keeps_color == unassessed_color ||
      violates_color == unassessed_color) {
    throw Error(ErrorCode::Config, "overlay colours must be distinct");
  }
  if (line_thickness < 1) throw Error(ErrorCode::Config, "line thickness must be >= 1");
}

std::vector<DrawCommand> emit_overlay_commands(const FrameReport& report,
                                               const OverlayStyle& style) {
  std::vector<DrawCommand> commands;
  commands.reserve(report.subject_statuses.size() + report.face_assessments.size());

  for (const auto& s : report.subject_statuses) {
    const Rgb& color = s.status == DistanceStatus::Keeps      ? style.keeps_color
                       : s.status == DistanceStatus::Violates ? style.violates_color
                                                              : style.unassessed_color;
    commands.push_back({EntityKind::Person, s.person_id, s.box, color, style.line_thickness,
                        std::string(to_string(s.status))});
  }
  for (const auto& f : report.face_assessments) {
    const bool compliant =
        f.mask_label == MaskLabel::Mask && f.hand_label == HandLabel::NoInteraction;
    commands.push_back({EntityKind::Face, f.face_id, f.face_box,
                        compliant ? style.keeps_color : style.violates_color,
                        style.line_thickness,
                        fmt::format("{} | {}", to_string(f.mask_label), to_string(f.hand_label))});
  }
  std::sort(commands.begin(), commands.end(), [](const DrawCommand& a, const DrawCommand& b) {
    return std::tie(a.kind, a.id) < std::tie(b.kind, b.id);
  });
  return commands;
}

cv::Mat render_frame(const cv::Mat& image, const FrameReport& report, const OverlayStyle& style) {
  if (image.cols != report.geometry.width || image.rows != report.geometry.height) {
    throw Error(ErrorCode::GeometryMismatch,
                fmt::format("frame {}: image is {}x{}, report geometry {}x{}", report.frame_id,
                            image.cols, image.rows, report.geometry.width,
                            report.geometry.height));
  }
  cv::Mat canvas;
  if (image.channels() == 1) {
    cv::cvtColor(image, canvas, cv::COLOR_GRAY2BGR);
  } else if (image.channels() == 4) {
    cv::cvtColor(image, canvas, cv::COLOR_BGRA2BGR);
  } else {
    canvas = image.clone();
  }

  const int max_x = std::max(0, canvas.cols - 1);
  const int max_y = std::max(0, canvas.rows - 1);
  for (const auto& cmd : emit_overlay_commands(report, style)) {
    const cv::Scalar color(cmd.color[2], cmd.color[1], cmd.color[0]);
    const cv::Point tl(std::clamp(static_cast<int>(std::lround(cmd.box.x_min)), 0, max_x),
                       std::clamp(static_cast<int>(std::lround(cmd.box.y_min)), 0, max_y));
    const cv::Point br(std::clamp(static_cast<int>(std::lround(cmd.box.x_max)), 0, max_x),
                       std::clamp(static_cast<int>(std::lround(cmd.box.y_max)), 0, max_y));
    cv::rectangle(canvas, tl, br, color, cmd.thickness, cv::LINE_8);

    int baseline = 0;
    const auto size = cv::getTextSize(cmd.text, cv::FONT_HERSHEY_PLAIN, style.font_scale, 1,
                                      &baseline);
    // Above the box when there is room, otherwise just inside its top edge.
    const int text_y = tl.y - 3 >= size.height ? tl.y - 3 : tl.y + size.height + 2;
    cv::putText(canvas, cmd.text, cv::Point(tl.x, text_y), cv::FONT_HERSHEY_PLAIN,
                style.font_scale, color, 1, cv::LINE_8);
  }
  return canvas;
}

void write_draw_commands(std::ostream& out, const FrameReport& report,
                         const std::vector<DrawCommand>& commands) {
  using nlohmann::json;
  out << json{{"format", kDrawCommandsFormat},
              {"format_version", kFormatVersion},
              {"video_id", report.video_id},
              {"frame_id", report.frame_id},
              {"width", report.geometry.width},
              {"height", report.geometry.height}}
             .dump()
      << '\n';
  for (const auto& cmd : commands) {
    out << json{{"kind", cmd.kind == EntityKind::Person ? "person" : "face"},
                {"id", cmd.id},
                {"box", box_to_json(cmd.box)},
                {"color", cmd.color},
                {"thickness", cmd.thickness},
                {"text", cmd.text}}
               .dump()
        << '\n';
  }
}

}  // namespace safeguard
