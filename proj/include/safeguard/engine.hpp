#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "safeguard/config.hpp"
#include "safeguard/face_pipeline.hpp"
#include "safeguard/report.hpp"

namespace safeguard {

/// Runs the face branch and the person branch on each frame and fuses the
/// results into a FrameReport.
class Engine {
 public:
  Engine(EngineConfig config, std::unique_ptr<ClassifierBackend> mask_backend,
         std::unique_ptr<ClassifierBackend> hand_backend);

  [[nodiscard]] FrameReport process(const Frame& frame, const std::string& video_id) const;

  /// Reports in input order. Uses up to `jobs` threads when both backends
  /// allow concurrent calls.
  [[nodiscard]] std::vector<FrameReport> process_all(std::span<const Frame> frames,
                                                     const std::string& video_id,
                                                     unsigned jobs = 1) const;

  [[nodiscard]] const EngineConfig& config() const noexcept { return config_; }

 private:
  EngineConfig config_;
  std::unique_ptr<ClassifierBackend> mask_backend_;
  std::unique_ptr<ClassifierBackend> hand_backend_;
};

}  // namespace safeguard
