#include <doctest.h>

#include <chrono>
#include <random>
#include <stdexcept>

#include "safeguard/engine.hpp"
#include "safeguard/error.hpp"
#include "support/synthetic.hpp"

using namespace safeguard;

namespace {

Engine recorded_engine(const std::shared_ptr<ScoreTable>& scores, EngineConfig config = {}) {
  return Engine(config, make_backend(ClassifierTask::Mask, config.mask_backend, scores),
                make_backend(ClassifierTask::Hand, config.hand_backend, scores));
}

/// Recorded mask scores, except that one frame raises a non-library error.
class Exploding final : public ClassifierBackend {
 public:
  Exploding(FrameId bad_frame, bool concurrent, std::shared_ptr<const ScoreTable> table)
      : ClassifierBackend(ClassifierTask::Mask,
                          ClassifierBackendDescriptor::defaults(ClassifierTask::Mask)),
        inner_(ClassifierTask::Mask, ClassifierBackendDescriptor::defaults(ClassifierTask::Mask),
               std::move(table)),
        bad_frame_(bad_frame),
        concurrent_(concurrent) {}

  [[nodiscard]] std::vector<double> scores(const FaceCrop& crop) const override {
    if (crop.frame_id == bad_frame_) throw std::logic_error("backend crashed");
    return inner_.scores(crop);
  }
  [[nodiscard]] bool supports_concurrency() const noexcept override { return concurrent_; }

 private:
  RecordedBackend inner_;
  FrameId bad_frame_;
  bool concurrent_;
};

}  // namespace

TEST_CASE("process fuses both branches") {
  std::mt19937_64 rng(1);
  const auto w = fixtures::recorded_workload(rng, 20);
  const auto engine = recorded_engine(w.scores);
  const RecordedBackend mask(ClassifierTask::Mask,
                             ClassifierBackendDescriptor::defaults(ClassifierTask::Mask), w.scores);
  const RecordedBackend hand(ClassifierTask::Hand,
                             ClassifierBackendDescriptor::defaults(ClassifierTask::Hand), w.scores);
  for (const auto& frame : w.frames) {
    const auto expected = build_frame_report(frame, "v", assess_faces(frame, {}, mask, hand),
                                             assess_frame(frame, {}));
    CHECK(engine.process(frame, "v") == expected);
  }
}

TEST_CASE("branches do not influence each other") {
  std::mt19937_64 rng(2);
  const auto w = fixtures::recorded_workload(rng, 30);
  const auto engine = recorded_engine(w.scores);
  for (const auto& frame : w.frames) {
    const auto full = engine.process(frame, "v");
    auto no_persons = frame;
    no_persons.persons.clear();
    for (auto& f : no_persons.faces) f.person_id.reset();
    auto no_faces = frame;
    no_faces.faces.clear();
    const auto faces_only = engine.process(no_persons, "v");
    const auto persons_only = engine.process(no_faces, "v");
    REQUIRE(faces_only.face_assessments.size() == full.face_assessments.size());
    for (std::size_t i = 0; i < full.face_assessments.size(); ++i) {
      CHECK(faces_only.face_assessments[i].mask_label == full.face_assessments[i].mask_label);
      CHECK(faces_only.face_assessments[i].hand_label == full.face_assessments[i].hand_label);
      CHECK(faces_only.face_assessments[i].crop_box == full.face_assessments[i].crop_box);
    }
    CHECK(persons_only.pair_assessments == full.pair_assessments);
    CHECK(persons_only.subject_statuses == full.subject_statuses);
  }
}

TEST_CASE("parallel processing keeps input order and results") {
  std::mt19937_64 rng(3);
  const auto w = fixtures::recorded_workload(rng, 500);
  const auto engine = recorded_engine(w.scores);
  const auto serial = engine.process_all(w.frames, "v", 1);
  for (unsigned jobs : {2u, 4u, 16u}) CHECK(engine.process_all(w.frames, "v", jobs) == serial);
  REQUIRE(serial.size() == w.frames.size());
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].frame_id == w.frames[i].frame_id);
}

TEST_CASE("missing recorded scores become per-face warnings") {
  std::mt19937_64 rng(4);
  auto w = fixtures::recorded_workload(rng, 1, 0);
  w.frames[0].faces.push_back({"lost", {10, 10, 50, 50}, 0.9, std::nullopt});
  const auto report = recorded_engine(w.scores).process(w.frames[0], "v");
  CHECK(report.face_assessments.empty());
  REQUIRE(report.warnings.size() == 1);
  CHECK(report.warnings[0].rfind("face lost:", 0) == 0);
}

TEST_CASE("failures in workers propagate") {
  std::mt19937_64 rng(5);
  const auto w = fixtures::recorded_workload(rng, 200);
  const EngineConfig config;
  const Engine engine(config, std::make_unique<Exploding>(31, true, w.scores),
                      make_backend(ClassifierTask::Hand, config.hand_backend, w.scores));
  CHECK_THROWS_WITH_AS((void)engine.process_all(w.frames, "v", 4), "backend crashed",
                       std::logic_error);
}

TEST_CASE("non-concurrent backends run serially") {
  std::mt19937_64 rng(8);
  const auto w = fixtures::recorded_workload(rng, 100);
  const EngineConfig config;
  const Engine engine(config, std::make_unique<Exploding>(-1, false, w.scores),
                      make_backend(ClassifierTask::Hand, config.hand_backend, w.scores));
  const auto reference = recorded_engine(w.scores).process_all(w.frames, "v", 1);
  CHECK(engine.process_all(w.frames, "v", 8) == reference);
}

TEST_CASE("engine configuration is applied") {
  std::mt19937_64 rng(6);
  const auto w = fixtures::recorded_workload(rng, 50);
  EngineConfig config;
  config.distancing.lambda_coefficient = 0.5;
  const auto engine = recorded_engine(w.scores, config);
  for (const auto& frame : w.frames) {
    const auto report = engine.process(frame, "v");
    for (const auto& p : report.pair_assessments) {
      CHECK(p.violation == (p.distance < p.threshold));
    }
    for (const auto& p : assess_frame(frame, config.distancing).pairs) {
      CHECK(std::count(report.pair_assessments.begin(), report.pair_assessments.end(), p) == 1);
    }
  }
}

TEST_CASE("engine requires matching backends") {
  auto scores = std::make_shared<ScoreTable>();
  const EngineConfig config;
  CHECK_THROWS_AS(Engine(config, make_backend(ClassifierTask::Hand, config.hand_backend, scores),
                         make_backend(ClassifierTask::Hand, config.hand_backend, scores)),
                  Error);
  CHECK_THROWS_AS(Engine(config, nullptr, make_backend(ClassifierTask::Hand, config.hand_backend, scores)),
                  Error);
}

TEST_CASE("recorded backend throughput smoke check") {
  std::mt19937_64 rng(7);
  const auto w = fixtures::recorded_workload(rng, 2000);
  const auto engine = recorded_engine(w.scores);
  const auto start = std::chrono::steady_clock::now();
  const auto reports = engine.process_all(w.frames, "v", 1);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  CHECK(reports.size() == 2000);
  MESSAGE("frames per second: " << 2000.0 / elapsed.count());
  CHECK(elapsed.count() < 5.0);
}
