#include <doctest.h>

#include <random>
#include <sstream>

#include "safeguard/error.hpp"
#include "safeguard/report.hpp"
#include "support/fixtures.hpp"

using namespace safeguard;
using fixtures::person_at;

namespace {

std::shared_ptr<ScoreTable> table_for(const Frame& frame) {
  auto table = std::make_shared<ScoreTable>();
  for (std::size_t i = 0; i < frame.faces.size(); ++i) {
    RecordedScoresEntry e{frame.frame_id, frame.faces[i].id, {0.1, 0.8, 0.1}, {0.3, 0.7}};
    if (i % 2 == 1) e = {frame.frame_id, frame.faces[i].id, {0.7, 0.2, 0.1}, {0.9, 0.1}};
    table->insert(e);
  }
  return table;
}

FaceBranchResult faces_of(const Frame& frame) {
  auto table = table_for(frame);
  RecordedBackend mask(ClassifierTask::Mask, ClassifierBackendDescriptor::defaults(ClassifierTask::Mask),
                       table);
  RecordedBackend hand(ClassifierTask::Hand, ClassifierBackendDescriptor::defaults(ClassifierTask::Hand),
                       table);
  return assess_faces(frame, {}, mask, hand);
}

Frame two_people_two_faces() {
  Frame f;
  f.frame_id = 4;
  f.geometry = {1920, 1080};
  f.persons = {person_at("p1", 400, 400, 40), person_at("p2", 480, 400, 40)};
  f.faces = {{"f1", {380, 330, 420, 380}, 0.9, SubjectId("p1")},
             {"f2", {460, 330, 500, 380}, 0.9, SubjectId("p2")}};
  return f;
}

FrameReport report_for(const Frame& frame) {
  return build_frame_report(frame, "vid", faces_of(frame), assess_frame(frame, {}));
}

/// Random report with consistent labels, used by the summary and
/// serialization properties.
FrameReport random_report(std::mt19937_64& rng, FrameId id) {
  std::uniform_int_distribution<int> count(0, 5);
  auto frame = fixtures::random_frame(rng, count(rng));
  frame.frame_id = id;
  for (std::size_t k = 0; k < frame.persons.size(); ++k) {
    if (k == 2) {
      frame.persons[k].left_shoulder.reset();
      frame.persons[k].right_shoulder.reset();
    }
    const auto& b = frame.persons[k].box;
    frame.faces.push_back({"f" + std::to_string(k),
                           {b.x_min, b.y_min, b.x_min + 0.4 * b.width(), b.y_min + 0.3 * b.height()},
                           0.5, frame.persons[k].id});
  }
  return build_frame_report(frame, "rand", faces_of(frame), assess_frame(frame, {}));
}

}  // namespace

TEST_CASE("frame report with two faces and one pair") {
  const auto r = report_for(two_people_two_faces());
  CHECK(r.video_id == "vid");
  CHECK(r.frame_id == 4);
  REQUIRE(r.face_assessments.size() == 2);
  CHECK(r.face_assessments[0].mask_label == MaskLabel::Mask);
  CHECK(r.face_assessments[0].hand_label == HandLabel::NoInteraction);
  CHECK(r.face_assessments[1].mask_label == MaskLabel::NoMask);
  CHECK(r.face_assessments[1].hand_label == HandLabel::Interaction);
  REQUIRE(r.pair_assessments.size() == 1);
  CHECK(r.pair_assessments[0].violation);
  REQUIRE(r.subject_statuses.size() == 2);
  CHECK(r.warnings.empty());
}

TEST_CASE("assessments naming unknown entities are rejected") {
  const auto frame = two_people_two_faces();
  auto faces = faces_of(frame);
  auto distancing = assess_frame(frame, {});

  SUBCASE("face") {
    faces.assessments[1].face_id = "f9";
    try {
      (void)build_frame_report(frame, "vid", faces, distancing);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IdMismatch);
      CHECK(std::string(e.what()).find("'f9'") != std::string::npos);
    }
  }
  SUBCASE("person") {
    distancing.pairs[0].person_b = "ghost";
    CHECK_THROWS_AS((void)build_frame_report(frame, "vid", faces, distancing), Error);
  }
}

TEST_CASE("unassessed persons and face errors become warnings") {
  auto frame = two_people_two_faces();
  frame.persons[1].left_shoulder.reset();
  frame.persons[1].right_shoulder.reset();
  frame.faces.push_back({"f3", {10, 10, 40, 40}, 0.5, std::nullopt});
  auto faces = faces_of(two_people_two_faces());
  faces.errors.push_back({"f3", "no recorded scores"});
  const auto r = build_frame_report(frame, "vid", faces, assess_frame(frame, {}));
  CHECK(r.pair_assessments.empty());
  REQUIRE(r.warnings.size() == 3);
  CHECK(r.warnings[0] == "face f3: no recorded scores");
  CHECK(r.warnings[1] == "unassessed: no other assessable person (person p1)");
  CHECK(r.warnings[2] == "unassessed: missing shoulders (person p2)");
}

TEST_CASE("summaries") {
  SUBCASE("violations across frames") {
    // one violating pair in frames 0 and 1, two in frame 2
    std::vector<FrameReport> reports;
    for (int i = 0; i < 3; ++i) {
      Frame f;
      f.frame_id = i;
      f.geometry = {2000, 2000};
      f.persons = {person_at("a", 100, 100, 40), person_at("b", 150, 100, 40)};
      if (i == 2) f.persons.push_back(person_at("c", 250, 100, 40));
      reports.push_back(report_for(f));
    }
    const auto s = summarize_video(reports);
    CHECK(s.video_id == "vid");
    CHECK(s.frame_count == 3);
    CHECK(s.pair_count == 5);
    CHECK(s.violation_pairs == 4);
    CHECK(s.distance_counts == std::array<std::size_t, 3>{0, 7, 0});
  }
  SUBCASE("empty") {
    const auto s = summarize_video({});
    CHECK(s.frame_count == 0);
    CHECK(s.face_count == 0);
    CHECK_FALSE(s.frames_per_second.has_value());
  }
  SUBCASE("hand tallies") {
    std::vector<FrameReport> reports;
    for (int i = 0; i < 5; ++i) {
      auto f = two_people_two_faces();
      f.frame_id = i;
      reports.push_back(report_for(f));
    }
    const auto s = summarize_video(reports);
    CHECK(s.face_count == 10);
    CHECK(s.hand_counts == std::array<std::size_t, 2>{5, 5});
    CHECK(s.mask_counts == std::array<std::size_t, 3>{5, 5, 0});
  }
}

TEST_CASE("summaries are additive over any split") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<FrameReport> reports;
    for (int i = 0; i < 12; ++i) reports.push_back(random_report(rng, i));
    const std::span<const FrameReport> all(reports);
    const auto whole = summarize_video(all);
    const std::size_t cut = static_cast<std::size_t>(trial) % (reports.size() + 1);
    auto parts = summarize_video(all.first(cut));
    parts.merge(summarize_video(all.subspan(cut)));
    parts.video_id = whole.video_id;
    CHECK(parts == whole);
  }
}

TEST_CASE("report files round-trip") {
  std::mt19937_64 rng(77);
  std::vector<FrameReport> reports;
  for (int i = 0; i < 20; ++i) reports.push_back(random_report(rng, i * 2));
  auto summary = summarize_video(reports);
  summary.frames_per_second = 123.25;

  std::ostringstream out;
  write_report_header(out, "rand", {1920, 1080});
  for (const auto& r : reports) write_frame_report(out, r);
  write_summary(out, summary);

  std::istringstream in(out.str());
  const auto file = read_report(in);
  CHECK(file.video_id == "rand");
  CHECK(file.geometry == ImageGeometry{1920, 1080});
  CHECK(file.frames == reports);
  REQUIRE(file.summary.has_value());
  CHECK(*file.summary == summary);

  std::ostringstream again;
  write_report_header(again, file.video_id, file.geometry);
  for (const auto& r : file.frames) write_frame_report(again, r);
  write_summary(again, *file.summary);
  CHECK(again.str() == out.str());
}

TEST_CASE("malformed report files") {
  const std::string header =
      R"({"format":"safeguard.report","format_version":1,"video_id":"v","width":10,"height":10})";
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return read_report(in, "r");
  };
  const std::string frame0 = R"({"type":"frame","frame_id":0,"faces":[],"pairs":[],"subjects":[],"warnings":[]})";
  CHECK(read(header + "\n" + frame0).frames.size() == 1);
  CHECK_THROWS_AS(read(header + "\n" + frame0 + "\n" + frame0), Error);
  CHECK_THROWS_AS(read(header + "\n" + R"({"type":"bogus"})"), Error);
  CHECK_THROWS_AS(read(header + "\n" + R"({"type":"frame","frame_id":0})"), Error);
  CHECK_THROWS_AS(read(R"({"format":"safeguard.report","format_version":9})"), Error);
}
