#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <mutex>
#include <string>
#include <vector>

#include <opencv2/core/mat.hpp>

#include "safeguard/recorded_scores.hpp"
#include "safeguard/types.hpp"

namespace safeguard {

struct CropConfig {
  double margin_fraction{0.20};  // per side, relative to the box's own dimension
  bool clamp_to_image{true};

  void validate() const;
};

/// Moves left/right sides out by margin*width and top/bottom by margin*height,
/// then optionally intersects with the image rectangle.
BoundingBox expand_crop(const BoundingBox& box, const ImageGeometry& geometry,
                        const CropConfig& config);

/// Integer pixel rectangle covering `box` (floor of mins, ceil of maxes),
/// clipped to the image.
cv::Rect rasterize_crop(const BoundingBox& box, const ImageGeometry& geometry);

enum class BackendKind { Recorded, InterchangeModel };
enum class ClassifierTask { Mask, Hand };
enum class Normalization { Unit, ImageNet };

inline constexpr std::array<int, 6> kSupportedInputEdges{224, 240, 256, 260, 299, 300};

struct ClassifierBackendDescriptor {
  BackendKind kind{BackendKind::Recorded};
  int input_edge{224};
  /// Label names in model output order; also the argmax tie-break priority.
  std::vector<std::string> class_order;
  std::filesystem::path model_path;  // InterchangeModel only
  Normalization normalization{Normalization::Unit};

  /// Canonical label order for the task: (no_mask, mask, improper_mask) or
  /// (interaction, no_interaction).
  static ClassifierBackendDescriptor defaults(ClassifierTask task);

  /// Throws Error(Config) on unsupported input edge or a class order that is
  /// not a permutation of the task's labels.
  void validate(ClassifierTask task) const;
};

struct FaceCrop {
  FrameId frame_id{0};
  SubjectId face_id;
  BoundingBox crop_box;
  cv::Mat pixels;  // BGR8 view of the crop; may be empty for the Recorded backend
};

class ClassifierBackend {
 public:
  ClassifierBackend(ClassifierTask task, ClassifierBackendDescriptor descriptor);
  virtual ~ClassifierBackend() = default;

  ClassifierBackend(const ClassifierBackend&) = delete;
  ClassifierBackend& operator=(const ClassifierBackend&) = delete;

  /// Probability vector in canonical label order for the task.
  [[nodiscard]] virtual std::vector<double> scores(const FaceCrop& crop) const = 0;
  [[nodiscard]] virtual bool supports_concurrency() const noexcept = 0;

  [[nodiscard]] ClassifierTask task() const noexcept { return task_; }
  [[nodiscard]] const ClassifierBackendDescriptor& descriptor() const noexcept {
    return descriptor_;
  }

 private:
  ClassifierTask task_;
  ClassifierBackendDescriptor descriptor_;
};

/// Replays score vectors keyed by (frame_id, face_id).
class RecordedBackend final : public ClassifierBackend {
 public:
  RecordedBackend(ClassifierTask task, ClassifierBackendDescriptor descriptor,
                  std::shared_ptr<const ScoreTable> table);

  [[nodiscard]] std::vector<double> scores(const FaceCrop& crop) const override;
  [[nodiscard]] bool supports_concurrency() const noexcept override { return true; }

 private:
  std::shared_ptr<const ScoreTable> table_;
};

/// Runs an ONNX classifier through OpenCV's dnn module. Inference is
/// serialised internally.
class InterchangeModelBackend final : public ClassifierBackend {
 public:
  InterchangeModelBackend(ClassifierTask task, ClassifierBackendDescriptor descriptor);
  ~InterchangeModelBackend() override;

  [[nodiscard]] std::vector<double> scores(const FaceCrop& crop) const override;
  [[nodiscard]] bool supports_concurrency() const noexcept override { return false; }

  /// The network input tensor for a crop (1x3xEdgexEdge, RGB, normalised).
  [[nodiscard]] cv::Mat preprocess(const cv::Mat& bgr_crop) const;

 private:
  struct Network;
  std::unique_ptr<Network> net_;
  mutable std::mutex mutex_;
};

std::unique_ptr<ClassifierBackend> make_backend(ClassifierTask task,
                                                const ClassifierBackendDescriptor& descriptor,
                                                std::shared_ptr<const ScoreTable> table);

struct MaskClassification {
  MaskLabel label{MaskLabel::NoMask};
  std::array<double, 3> scores{};
};

struct HandClassification {
  HandLabel label{HandLabel::NoInteraction};
  std::array<double, 2> scores{};
};

MaskClassification classify_mask(const FaceCrop& crop, const ClassifierBackend& backend);
HandClassification classify_hand(const FaceCrop& crop, const ClassifierBackend& backend);

/// Index of the maximum score; equal maxima resolve to the label that comes
/// first in `priority` (indices into `scores`).
std::size_t argmax_with_priority(std::span<const double> scores,
                                 std::span<const std::size_t> priority);

struct FaceAssessment {
  SubjectId face_id;
  std::optional<SubjectId> person_id;
  BoundingBox face_box;
  BoundingBox crop_box;
  MaskLabel mask_label{MaskLabel::NoMask};
  std::array<double, 3> mask_scores{};
  HandLabel hand_label{HandLabel::NoInteraction};
  std::array<double, 2> hand_scores{};

  bool operator==(const FaceAssessment&) const = default;
};

struct FaceError {
  SubjectId face_id;
  std::string message;
};

struct FaceBranchResult {
  std::vector<FaceAssessment> assessments;
  std::vector<FaceError> errors;
};

/// Crops and classifies every face in the frame independently of persons.
/// Per-face failures are collected in `errors`.
FaceBranchResult assess_faces(const Frame& frame, const CropConfig& crop_config,
                              const ClassifierBackend& mask_backend,
                              const ClassifierBackend& hand_backend);

}  // namespace safeguard
