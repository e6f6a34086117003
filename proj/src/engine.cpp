#include "safeguard/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "safeguard/distancing.hpp"
#include "safeguard/error.hpp"

namespace safeguard {

Engine::Engine(EngineConfig config, std::unique_ptr<ClassifierBackend> mask_backend,
               std::unique_ptr<ClassifierBackend> hand_backend)
    : config_(std::move(config)),
      mask_backend_(std::move(mask_backend)),
      hand_backend_(std::move(hand_backend)) {
  config_.distancing.validate();
  config_.crop.validate();
  if (!mask_backend_ || mask_backend_->task() != ClassifierTask::Mask) {
    throw Error(ErrorCode::Config, "engine needs a mask classifier backend");
  }
  if (!hand_backend_ || hand_backend_->task() != ClassifierTask::Hand) {
    throw Error(ErrorCode::Config, "engine needs a hand classifier backend");
  }
}

FrameReport Engine::process(const Frame& frame, const std::string& video_id) const {
  auto faces = assess_faces(frame, config_.crop, *mask_backend_, *hand_backend_);
  auto distancing = assess_frame(frame, config_.distancing);
  return build_frame_report(frame, video_id, faces, distancing);
}

std::vector<FrameReport> Engine::process_all(std::span<const Frame> frames,
                                             const std::string& video_id, unsigned jobs) const {
  std::vector<FrameReport> reports(frames.size());
  const bool parallel = jobs > 1 && frames.size() > 1 && mask_backend_->supports_concurrency() &&
                        hand_backend_->supports_concurrency();
  if (!parallel) {
    for (std::size_t i = 0; i < frames.size(); ++i) reports[i] = process(frames[i], video_id);
    return reports;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < frames.size(); i = next++) {
      try {
        reports[i] = process(frames[i], video_id);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = frames.size();
      }
    }
  };
  const unsigned count = std::min<std::size_t>(jobs, frames.size());
  std::vector<std::jthread> threads;
  threads.reserve(count);
  for (unsigned t = 0; t < count; ++t) threads.emplace_back(worker);
  threads.clear();
  if (failure) std::rethrow_exception(failure);
  return reports;
}

}  // namespace safeguard
