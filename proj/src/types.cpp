#include "safeguard/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "safeguard/error.hpp"

namespace safeguard {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingShoulders: return "missing-shoulders";
    case ErrorCode::DegenerateWidth: return "degenerate-width";
    case ErrorCode::BackendUnavailable: return "backend-unavailable";
    case ErrorCode::RecordedEntryMissing: return "recorded-entry-missing";
    case ErrorCode::InvalidDistribution: return "bad-distribution";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Version: return "version";
    case ErrorCode::Ordering: return "ordering";
    case ErrorCode::DuplicateKey: return "duplicate-key";
    case ErrorCode::UnknownLabel: return "unknown-label";
    case ErrorCode::IdMismatch: return "id-mismatch";
    case ErrorCode::GeometryMismatch: return "geometry-mismatch";
    case ErrorCode::Io: return "io";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

double BoundingBox::area() const noexcept {
  return std::max(0.0, width()) * std::max(0.0, height());
}

bool BoundingBox::contains(const BoundingBox& other) const noexcept {
  return x_min <= other.x_min && y_min <= other.y_min && x_max >= other.x_max &&
         y_max >= other.y_max;
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) {
    return a == b ? 1.0 : 0.0;
  }
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::string_view to_string(MaskLabel label) noexcept {
  switch (label) {
    case MaskLabel::NoMask: return "no_mask";
    case MaskLabel::Mask: return "mask";
    case MaskLabel::ImproperMask: return "improper_mask";
  }
  return "?";
}

std::string_view to_string(HandLabel label) noexcept {
  switch (label) {
    case HandLabel::Interaction: return "interaction";
    case HandLabel::NoInteraction: return "no_interaction";
  }
  return "?";
}

std::optional<MaskLabel> parse_mask_label(std::string_view text) noexcept {
  for (auto label : kAllMaskLabels) {
    if (to_string(label) == text) return label;
  }
  return std::nullopt;
}

std::optional<HandLabel> parse_hand_label(std::string_view text) noexcept {
  for (auto label : kAllHandLabels) {
    if (to_string(label) == text) return label;
  }
  return std::nullopt;
}

const PersonDetection* Frame::find_person(std::string_view id) const noexcept {
  auto it = std::find_if(persons.begin(), persons.end(),
                         [&](const PersonDetection& p) { return p.id == id; });
  return it == persons.end() ? nullptr : &*it;
}

const FaceDetection* Frame::find_face(std::string_view id) const noexcept {
  auto it = std::find_if(faces.begin(), faces.end(),
                         [&](const FaceDetection& f) { return f.id == id; });
  return it == faces.end() ? nullptr : &*it;
}

bool operator==(const Frame& a, const Frame& b) {
  return a.frame_id == b.frame_id && a.geometry == b.geometry && a.persons == b.persons &&
         a.faces == b.faces;
}

namespace {

class FrameChecker {
 public:
  explicit FrameChecker(const Frame& frame) : frame_(frame) {}

  std::vector<std::string> run() {
    const auto& g = frame_.geometry;
    if (g.width < 1) report("geometry: width<1 ({})", g.width);
    if (g.height < 1) report("geometry: height<1 ({})", g.height);

    for (const auto& p : frame_.persons) {
      const auto what = fmt::format("person {}", p.id);
      check_id(p.id, what);
      check_box(p.box, what);
      check_confidence(p.confidence, what);
      if (p.left_shoulder.has_value() != p.right_shoulder.has_value()) {
        report("unpaired shoulder for {}: only {} present", what,
               p.left_shoulder ? "left_shoulder" : "right_shoulder");
      }
      if (p.left_shoulder) check_point(*p.left_shoulder, what + " left_shoulder");
      if (p.right_shoulder) check_point(*p.right_shoulder, what + " right_shoulder");
    }
    for (const auto& f : frame_.faces) {
      const auto what = fmt::format("face {}", f.id);
      check_id(f.id, what);
      check_box(f.box, what);
      check_confidence(f.confidence, what);
      if (f.person_id && frame_.find_person(*f.person_id) == nullptr) {
        report("{} person_id '{}' does not name a person in the frame", what, *f.person_id);
      }
    }
    return std::move(findings_);
  }

 private:
  template <typename... Args>
  void report(fmt::format_string<Args...> format, Args&&... args) {
    findings_.push_back(fmt::format(format, std::forward<Args>(args)...));
  }

  void check_id(const SubjectId& id, const std::string& what) {
    if (id.empty()) report("{}: empty id", what);
    if (!ids_.insert(id).second) report("duplicate subject id '{}'", id);
  }

  void check_confidence(double c, const std::string& what) {
    if (!(c >= 0.0 && c <= 1.0)) report("{}: confidence {} outside [0,1]", what, c);
  }

  void check_box(const BoundingBox& b, const std::string& what) {
    const bool finite = std::isfinite(b.x_min) && std::isfinite(b.y_min) &&
                        std::isfinite(b.x_max) && std::isfinite(b.y_max);
    if (!finite) {
      report("{}: non-finite box coordinate", what);
      return;
    }
    if (b.x_min > b.x_max) report("x_min>x_max for {} ({} > {})", what, b.x_min, b.x_max);
    if (b.y_min > b.y_max) report("y_min>y_max for {} ({} > {})", what, b.y_min, b.y_max);
    const auto& g = frame_.geometry;
    if (b.x_min < 0.0 || b.y_min < 0.0 || b.x_max > g.width || b.y_max > g.height) {
      report("{}: box outside image {}x{}", what, g.width, g.height);
    }
  }

  void check_point(const Point2D& p, const std::string& what) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      report("{}: non-finite coordinate", what);
      return;
    }
    const auto& g = frame_.geometry;
    if (p.x < 0.0 || p.y < 0.0 || p.x > g.width || p.y > g.height) {
      report("{}: point ({}, {}) outside image {}x{}", what, p.x, p.y, g.width, g.height);
    }
  }

  const Frame& frame_;
  std::unordered_set<std::string> ids_;
  std::vector<std::string> findings_;
};

}  // namespace

std::vector<std::string> validate_frame(const Frame& frame) { return FrameChecker(frame).run(); }

}  // namespace safeguard
