#pragma once

// Engine configuration, read from a `key = value` text file. `#` starts a
// comment. Recognised keys:
//
//   lambda, min_shoulder_width           distancing
//   margin, clamp_crops                  face crops
//   iou, match_mode (id|iou)             evaluation matching
//   backend (recorded|model)             both classifiers
//   input_edge, normalize (unit|imagenet)
//   mask_model, hand_model               ONNX files for backend=model
//   mask_input_edge, hand_input_edge     per-classifier overrides
//   mask_class_order, hand_class_order   comma-separated label names

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "safeguard/distancing.hpp"
#include "safeguard/evaluation.hpp"
#include "safeguard/face_pipeline.hpp"

namespace safeguard {

inline constexpr const char* kConfigEnvVar = "SAFEGUARD_CONFIG";

struct EngineConfig {
  DistancingConfig distancing;
  CropConfig crop;
  MatchingConfig matching;
  ClassifierBackendDescriptor mask_backend =
      ClassifierBackendDescriptor::defaults(ClassifierTask::Mask);
  ClassifierBackendDescriptor hand_backend =
      ClassifierBackendDescriptor::defaults(ClassifierTask::Hand);

  /// Applies one setting. Throws Error(Config) on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  void validate() const;
};

EngineConfig parse_config(std::istream& in, const std::string& source_name = "<config>");
EngineConfig load_config_file(const std::filesystem::path& path);

}  // namespace safeguard
