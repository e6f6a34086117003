#include "safeguard/face_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>
#include <opencv2/dnn.hpp>
#include <opencv2/imgproc.hpp>

#include "safeguard/error.hpp"

namespace safeguard {

void CropConfig::validate() const {
  if (!(margin_fraction >= 0.0) || !std::isfinite(margin_fraction)) {
    throw Error(ErrorCode::Config, fmt::format("margin must be >= 0, got {}", margin_fraction));
  }
}

BoundingBox expand_crop(const BoundingBox& box, const ImageGeometry& geometry,
                        const CropConfig& config) {
  const double dx = config.margin_fraction * box.width();
  const double dy = config.margin_fraction * box.height();
  BoundingBox out{box.x_min - dx, box.y_min - dy, box.x_max + dx, box.y_max + dy};
  if (config.clamp_to_image) {
    out.x_min = std::clamp(out.x_min, 0.0, static_cast<double>(geometry.width));
    out.y_min = std::clamp(out.y_min, 0.0, static_cast<double>(geometry.height));
    out.x_max = std::clamp(out.x_max, 0.0, static_cast<double>(geometry.width));
    out.y_max = std::clamp(out.y_max, 0.0, static_cast<double>(geometry.height));
  }
  return out;
}

cv::Rect rasterize_crop(const BoundingBox& box, const ImageGeometry& geometry) {
  const int x0 = std::clamp(static_cast<int>(std::floor(box.x_min)), 0, geometry.width);
  const int y0 = std::clamp(static_cast<int>(std::floor(box.y_min)), 0, geometry.height);
  const int x1 = std::clamp(static_cast<int>(std::ceil(box.x_max)), 0, geometry.width);
  const int y1 = std::clamp(static_cast<int>(std::ceil(box.y_max)), 0, geometry.height);
  return {x0, y0, std::max(0, x1 - x0), std::max(0, y1 - y0)};
}

namespace {

std::vector<std::string> canonical_names(ClassifierTask task) {
  std::vector<std::string> names;
  if (task == ClassifierTask::Mask) {
    for (auto l : kAllMaskLabels) names.emplace_back(to_string(l));
  } else {
    for (auto l : kAllHandLabels) names.emplace_back(to_string(l));
  }
  return names;
}

std::string_view task_name(ClassifierTask task) {
  return task == ClassifierTask::Mask ? "mask" : "hand";
}

/// class_order position -> canonical index.
std::vector<std::size_t> canonical_indices(ClassifierTask task,
                                           const std::vector<std::string>& class_order) {
  const auto names = canonical_names(task);
  std::vector<std::size_t> out;
  out.reserve(class_order.size());
  for (const auto& name : class_order) {
    auto it = std::find(names.begin(), names.end(), name);
    out.push_back(static_cast<std::size_t>(it - names.begin()));
  }
  return out;
}

}  // namespace

ClassifierBackendDescriptor ClassifierBackendDescriptor::defaults(ClassifierTask task) {
  ClassifierBackendDescriptor d;
  d.class_order = canonical_names(task);
  return d;
}

void ClassifierBackendDescriptor::validate(ClassifierTask task) const {
  if (std::find(kSupportedInputEdges.begin(), kSupportedInputEdges.end(), input_edge) ==
      kSupportedInputEdges.end()) {
    throw Error(ErrorCode::Config, fmt::format("unsupported input edge {}", input_edge));
  }
  auto expected = canonical_names(task);
  auto given = class_order;
  std::sort(expected.begin(), expected.end());
  std::sort(given.begin(), given.end());
  if (expected != given) {
    throw Error(ErrorCode::Config,
                fmt::format("{} class order [{}] is not a permutation of [{}]", task_name(task),
                            fmt::join(class_order, ","), fmt::join(canonical_names(task), ",")));
  }
  if (kind == BackendKind::InterchangeModel && model_path.empty()) {
    throw Error(ErrorCode::Config, fmt::format("{} model path not set", task_name(task)));
  }
}

ClassifierBackend::ClassifierBackend(ClassifierTask task, ClassifierBackendDescriptor descriptor)
    : task_(task), descriptor_(std::move(descriptor)) {
  descriptor_.validate(task_);
}

RecordedBackend::RecordedBackend(ClassifierTask task, ClassifierBackendDescriptor descriptor,
                                 std::shared_ptr<const ScoreTable> table)
    : ClassifierBackend(task, std::move(descriptor)), table_(std::move(table)) {
  if (!table_) {
    throw Error(ErrorCode::BackendUnavailable, "recorded backend has no score table");
  }
}

std::vector<double> RecordedBackend::scores(const FaceCrop& crop) const {
  const auto* entry = table_->find(crop.frame_id, crop.face_id);
  if (entry == nullptr) {
    throw Error(ErrorCode::RecordedEntryMissing,
                fmt::format("no recorded scores for frame {} face '{}'", crop.frame_id,
                            crop.face_id));
  }
  if (task() == ClassifierTask::Mask) {
    return {entry->mask_scores.begin(), entry->mask_scores.end()};
  }
  return {entry->hand_scores.begin(), entry->hand_scores.end()};
}

struct InterchangeModelBackend::Network {
  cv::dnn::Net net;
};

InterchangeModelBackend::InterchangeModelBackend(ClassifierTask task,
                                                 ClassifierBackendDescriptor descriptor)
    : ClassifierBackend(task, std::move(descriptor)), net_(std::make_unique<Network>()) {
  const auto& path = this->descriptor().model_path;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::BackendUnavailable,
                fmt::format("{} model file not found: {}", task_name(task), path.string()));
  }
  try {
    net_->net = cv::dnn::readNetFromONNX(path.string());
  } catch (const cv::Exception& e) {
    throw Error(ErrorCode::BackendUnavailable,
                fmt::format("cannot load {} model {}: {}", task_name(task), path.string(), e.what()));
  }
  if (net_->net.empty()) {
    throw Error(ErrorCode::BackendUnavailable,
                fmt::format("{} model {} is empty", task_name(task), path.string()));
  }
}

InterchangeModelBackend::~InterchangeModelBackend() = default;

cv::Mat InterchangeModelBackend::preprocess(const cv::Mat& bgr_crop) const {
  const int edge = descriptor().input_edge;
  cv::Mat resized;
  cv::resize(bgr_crop, resized, cv::Size(edge, edge), 0.0, 0.0, cv::INTER_LINEAR);
  cv::Mat blob = cv::dnn::blobFromImage(resized, 1.0 / 255.0, cv::Size(), cv::Scalar(),
                                        /*swapRB=*/true, /*crop=*/false, CV_32F);
  if (descriptor().normalization == Normalization::ImageNet) {
    constexpr std::array<float, 3> mean{0.485f, 0.456f, 0.406f};
    constexpr std::array<float, 3> stddev{0.229f, 0.224f, 0.225f};
    const int plane = edge * edge;
    auto* data = blob.ptr<float>();
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < plane; ++i) {
        data[c * plane + i] = (data[c * plane + i] - mean[c]) / stddev[c];
      }
    }
  }
  return blob;
}

std::vector<double> InterchangeModelBackend::scores(const FaceCrop& crop) const {
  if (crop.pixels.empty()) {
    throw Error(ErrorCode::BackendUnavailable,
                fmt::format("face '{}' in frame {} has no pixels to classify", crop.face_id,
                            crop.frame_id));
  }
  cv::Mat bgr = crop.pixels;
  if (bgr.channels() == 1) {
    cv::cvtColor(crop.pixels, bgr, cv::COLOR_GRAY2BGR);
  } else if (bgr.channels() == 4) {
    cv::cvtColor(crop.pixels, bgr, cv::COLOR_BGRA2BGR);
  }
  const cv::Mat blob = preprocess(bgr);

  cv::Mat output;
  {
    std::lock_guard lock(mutex_);
    net_->net.setInput(blob);
    output = net_->net.forward().clone();
  }

  const auto& order = descriptor().class_order;
  if (output.total() != order.size()) {
    throw Error(ErrorCode::BackendUnavailable,
                fmt::format("{} model produced {} outputs, expected {}", task_name(task()),
                            output.total(), order.size()));
  }
  output = output.reshape(1, 1);
  output.convertTo(output, CV_64F);
  std::vector<double> raw(output.begin<double>(), output.end<double>());

  if (!distribution_problem(raw).empty()) {
    const double peak = *std::max_element(raw.begin(), raw.end());
    double sum = 0.0;
    for (auto& v : raw) {
      v = std::exp(v - peak);
      sum += v;
    }
    for (auto& v : raw) v /= sum;
  }

  const auto mapping = canonical_indices(task(), order);
  std::vector<double> canonical(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) canonical[mapping[i]] = raw[i];
  return canonical;
}

std::unique_ptr<ClassifierBackend> make_backend(ClassifierTask task,
                                                const ClassifierBackendDescriptor& descriptor,
                                                std::shared_ptr<const ScoreTable> table) {
  if (descriptor.kind == BackendKind::Recorded) {
    return std::make_unique<RecordedBackend>(task, descriptor, std::move(table));
  }
  return std::make_unique<InterchangeModelBackend>(task, descriptor);
}

std::size_t argmax_with_priority(std::span<const double> scores,
                                 std::span<const std::size_t> priority) {
  std::size_t best = priority.front();
  for (std::size_t idx : priority.subspan(1)) {
    if (scores[idx] > scores[best]) best = idx;
  }
  return best;
}

namespace {

template <std::size_t N>
std::pair<std::size_t, std::array<double, N>> run_classifier(const FaceCrop& crop,
                                                             const ClassifierBackend& backend) {
  const auto raw = backend.scores(crop);
  if (raw.size() != N) {
    throw Error(ErrorCode::InvalidDistribution,
                fmt::format("face '{}': {} scores, expected {}", crop.face_id, raw.size(), N));
  }
  if (auto problem = distribution_problem(raw); !problem.empty()) {
    throw Error(ErrorCode::InvalidDistribution,
                fmt::format("face '{}' {} scores: {}", crop.face_id, task_name(backend.task()),
                            problem));
  }
  std::array<double, N> scores{};
  std::copy(raw.begin(), raw.end(), scores.begin());
  const auto priority = canonical_indices(backend.task(), backend.descriptor().class_order);
  return {argmax_with_priority(scores, priority), scores};
}

}  // namespace

MaskClassification classify_mask(const FaceCrop& crop, const ClassifierBackend& backend) {
  if (backend.task() != ClassifierTask::Mask) {
    throw Error(ErrorCode::Config, "classify_mask called with a hand backend");
  }
  auto [index, scores] = run_classifier<3>(crop, backend);
  return {kAllMaskLabels[index], scores};
}

HandClassification classify_hand(const FaceCrop& crop, const ClassifierBackend& backend) {
  if (backend.task() != ClassifierTask::Hand) {
    throw Error(ErrorCode::Config, "classify_hand called with a mask backend");
  }
  auto [index, scores] = run_classifier<2>(crop, backend);
  return {kAllHandLabels[index], scores};
}

FaceBranchResult assess_faces(const Frame& frame, const CropConfig& crop_config,
                              const ClassifierBackend& mask_backend,
                              const ClassifierBackend& hand_backend) {
  FaceBranchResult result;
  result.assessments.reserve(frame.faces.size());
  for (const auto& face : frame.faces) {
    FaceCrop crop{frame.frame_id, face.id, expand_crop(face.box, frame.geometry, crop_config), {}};
    if (!frame.pixels.empty()) {
      const cv::Rect roi = rasterize_crop(crop.crop_box, frame.geometry) &
                           cv::Rect(0, 0, frame.pixels.cols, frame.pixels.rows);
      if (roi.area() > 0) crop.pixels = frame.pixels(roi);
    }
    try {
      const auto mask = classify_mask(crop, mask_backend);
      const auto hand = classify_hand(crop, hand_backend);
      result.assessments.push_back({face.id, face.person_id, face.box, crop.crop_box, mask.label,
                                    mask.scores, hand.label, hand.scores});
    } catch (const Error& e) {
      result.errors.push_back({face.id, e.what()});
    }
  }
  return result;
}

}  // namespace safeguard
