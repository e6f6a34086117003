#include "safeguard/report.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "safeguard/error.hpp"
#include "safeguard/ingestion.hpp"

namespace safeguard {

using nlohmann::json;

namespace {

std::string_view describe(UnassessedReason reason) {
  switch (reason) {
    case UnassessedReason::MissingShoulders: return "missing shoulders";
    case UnassessedReason::DegenerateWidth: return "degenerate shoulder width";
    case UnassessedReason::NoPeer: return "no other assessable person";
    case UnassessedReason::None: break;
  }
  return "unknown reason";
}

[[noreturn]] void mismatch(FrameId frame, std::string_view what, const SubjectId& id) {
  throw Error(ErrorCode::IdMismatch,
              fmt::format("frame {}: {} '{}' is not in the source frame", frame, what, id));
}

}  // namespace

FrameReport build_frame_report(const Frame& frame, const std::string& video_id,
                               const FaceBranchResult& faces, const DistancingResult& distancing) {
  FrameReport report;
  report.video_id = video_id;
  report.frame_id = frame.frame_id;
  report.geometry = frame.geometry;

  for (const auto& a : faces.assessments) {
    if (frame.find_face(a.face_id) == nullptr) mismatch(frame.frame_id, "face", a.face_id);
  }
  for (const auto& e : faces.errors) {
    if (frame.find_face(e.face_id) == nullptr) mismatch(frame.frame_id, "face", e.face_id);
  }
  for (const auto& p : distancing.pairs) {
    if (frame.find_person(p.person_a) == nullptr) mismatch(frame.frame_id, "person", p.person_a);
    if (frame.find_person(p.person_b) == nullptr) mismatch(frame.frame_id, "person", p.person_b);
  }
  for (const auto& s : distancing.statuses) {
    if (frame.find_person(s.person_id) == nullptr) {
      mismatch(frame.frame_id, "person", s.person_id);
    }
  }

  report.face_assessments = faces.assessments;
  report.pair_assessments = distancing.pairs;
  report.subject_statuses = distancing.statuses;
  for (const auto& e : faces.errors) {
    report.warnings.push_back(fmt::format("face {}: {}", e.face_id, e.message));
  }
  for (const auto& s : distancing.statuses) {
    if (s.status == DistanceStatus::Unassessed) {
      report.warnings.push_back(
          fmt::format("unassessed: {} (person {})", describe(s.reason), s.person_id));
    }
  }
  return report;
}

VideoSummary& VideoSummary::merge(const VideoSummary& other) {
  frame_count += other.frame_count;
  face_count += other.face_count;
  person_count += other.person_count;
  for (std::size_t i = 0; i < mask_counts.size(); ++i) mask_counts[i] += other.mask_counts[i];
  for (std::size_t i = 0; i < hand_counts.size(); ++i) hand_counts[i] += other.hand_counts[i];
  for (std::size_t i = 0; i < distance_counts.size(); ++i) {
    distance_counts[i] += other.distance_counts[i];
  }
  pair_count += other.pair_count;
  violation_pairs += other.violation_pairs;
  warning_count += other.warning_count;
  return *this;
}

VideoSummary summarize_video(std::span<const FrameReport> reports) {
  VideoSummary summary;
  if (!reports.empty()) summary.video_id = reports.front().video_id;
  for (const auto& r : reports) {
    ++summary.frame_count;
    summary.face_count += r.face_assessments.size();
    summary.person_count += r.subject_statuses.size();
    for (const auto& f : r.face_assessments) {
      ++summary.mask_counts[static_cast<std::size_t>(f.mask_label)];
      ++summary.hand_counts[static_cast<std::size_t>(f.hand_label)];
    }
    for (const auto& s : r.subject_statuses) {
      ++summary.distance_counts[static_cast<std::size_t>(s.status)];
    }
    summary.pair_count += r.pair_assessments.size();
    for (const auto& p : r.pair_assessments) summary.violation_pairs += p.violation ? 1 : 0;
    summary.warning_count += r.warnings.size();
  }
  return summary;
}

// -- serialization ------------------------------------------------------------

void write_report_header(std::ostream& out, const std::string& video_id,
                         const ImageGeometry& geometry) {
  out << json{{"format", kReportFormat},
              {"format_version", kFormatVersion},
              {"video_id", video_id},
              {"width", geometry.width},
              {"height", geometry.height}}
             .dump()
      << '\n';
}

void write_frame_report(std::ostream& out, const FrameReport& report) {
  json faces = json::array();
  for (const auto& f : report.face_assessments) {
    json fj = {{"face_id", f.face_id},
               {"face_box", box_to_json(f.face_box)},
               {"crop_box", box_to_json(f.crop_box)},
               {"mask", to_string(f.mask_label)},
               {"mask_scores", f.mask_scores},
               {"hand", to_string(f.hand_label)},
               {"hand_scores", f.hand_scores}};
    if (f.person_id) fj["person_id"] = *f.person_id;
    faces.push_back(std::move(fj));
  }
  json pairs = json::array();
  for (const auto& p : report.pair_assessments) {
    pairs.push_back({{"person_a", p.person_a},
                     {"person_b", p.person_b},
                     {"distance", p.distance},
                     {"threshold", p.threshold},
                     {"violation", p.violation}});
  }
  json subjects = json::array();
  for (const auto& s : report.subject_statuses) {
    json sj = {{"person_id", s.person_id},
               {"status", to_string(s.status)},
               {"box", box_to_json(s.box)}};
    if (s.reason != UnassessedReason::None) sj["reason"] = to_string(s.reason);
    subjects.push_back(std::move(sj));
  }
  out << json{{"type", "frame"},
              {"frame_id", report.frame_id},
              {"faces", faces},
              {"pairs", pairs},
              {"subjects", subjects},
              {"warnings", report.warnings}}
             .dump()
      << '\n';
}

void write_summary(std::ostream& out, const VideoSummary& s) {
  json record = {{"type", "summary"},
                 {"video_id", s.video_id},
                 {"frame_count", s.frame_count},
                 {"face_count", s.face_count},
                 {"person_count", s.person_count},
                 {"mask_counts",
                  {{"no_mask", s.mask_counts[0]},
                   {"mask", s.mask_counts[1]},
                   {"improper_mask", s.mask_counts[2]}}},
                 {"hand_counts",
                  {{"interaction", s.hand_counts[0]}, {"no_interaction", s.hand_counts[1]}}},
                 {"distance_counts",
                  {{"keeps", s.distance_counts[0]},
                   {"violates", s.distance_counts[1]},
                   {"unassessed", s.distance_counts[2]}}},
                 {"pair_count", s.pair_count},
                 {"violation_pairs", s.violation_pairs},
                 {"warning_count", s.warning_count}};
  if (s.frames_per_second) record["frames_per_second"] = *s.frames_per_second;
  out << record.dump() << '\n';
}

namespace {

// Reports are produced by this library, so field access goes through
// nlohmann's own checks; any type error is rethrown as a parse error at the
// current line.
BoundingBox box_from(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
          j.at(3).get<double>()};
}

template <typename T, typename Parse>
T label_from(const json& j, Parse parse, std::string_view field) {
  const auto text = j.get<std::string>();
  auto label = parse(text);
  if (!label) throw Error(ErrorCode::UnknownLabel, fmt::format("unknown {} '{}'", field, text));
  return *label;
}

FrameReport frame_from(const json& j, const ReportFile& file) {
  FrameReport r;
  r.video_id = file.video_id;
  r.geometry = file.geometry;
  r.frame_id = j.at("frame_id").get<FrameId>();
  for (const auto& fj : j.at("faces")) {
    FaceAssessment f;
    f.face_id = fj.at("face_id").get<std::string>();
    if (auto it = fj.find("person_id"); it != fj.end()) f.person_id = it->get<std::string>();
    f.face_box = box_from(fj.at("face_box"));
    f.crop_box = box_from(fj.at("crop_box"));
    f.mask_label = label_from<MaskLabel>(fj.at("mask"), parse_mask_label, "mask label");
    f.mask_scores = fj.at("mask_scores").get<std::array<double, 3>>();
    f.hand_label = label_from<HandLabel>(fj.at("hand"), parse_hand_label, "hand label");
    f.hand_scores = fj.at("hand_scores").get<std::array<double, 2>>();
    r.face_assessments.push_back(std::move(f));
  }
  for (const auto& pj : j.at("pairs")) {
    r.pair_assessments.push_back({pj.at("person_a").get<std::string>(),
                                  pj.at("person_b").get<std::string>(),
                                  pj.at("distance").get<double>(), pj.at("threshold").get<double>(),
                                  pj.at("violation").get<bool>()});
  }
  for (const auto& sj : j.at("subjects")) {
    SubjectDistanceStatus s;
    s.person_id = sj.at("person_id").get<std::string>();
    s.status = label_from<DistanceStatus>(sj.at("status"), parse_distance_status, "status");
    if (auto it = sj.find("reason"); it != sj.end()) {
      s.reason = label_from<UnassessedReason>(*it, parse_unassessed_reason, "reason");
    }
    s.box = box_from(sj.at("box"));
    r.subject_statuses.push_back(std::move(s));
  }
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

VideoSummary summary_from(const json& j) {
  VideoSummary s;
  s.video_id = j.at("video_id").get<std::string>();
  s.frame_count = j.at("frame_count").get<std::size_t>();
  s.face_count = j.at("face_count").get<std::size_t>();
  s.person_count = j.at("person_count").get<std::size_t>();
  const auto& m = j.at("mask_counts");
  s.mask_counts = {m.at("no_mask").get<std::size_t>(), m.at("mask").get<std::size_t>(),
                   m.at("improper_mask").get<std::size_t>()};
  const auto& h = j.at("hand_counts");
  s.hand_counts = {h.at("interaction").get<std::size_t>(),
                   h.at("no_interaction").get<std::size_t>()};
  const auto& d = j.at("distance_counts");
  s.distance_counts = {d.at("keeps").get<std::size_t>(), d.at("violates").get<std::size_t>(),
                       d.at("unassessed").get<std::size_t>()};
  s.pair_count = j.at("pair_count").get<std::size_t>();
  s.violation_pairs = j.at("violation_pairs").get<std::size_t>();
  s.warning_count = j.at("warning_count").get<std::size_t>();
  if (auto it = j.find("frames_per_second"); it != j.end()) {
    s.frames_per_second = it->get<double>();
  }
  return s;
}

}  // namespace

ReportFile read_report(std::istream& in, std::string source_name) {
  RecordReader reader(in, std::move(source_name));
  const auto header = read_header(reader, kReportFormat);
  ReportFile file;
  try {
    file.video_id = header.value("video_id", std::string{});
    file.geometry = {header.at("width").get<int>(), header.at("height").get<int>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, reader.where(e.what()));
  }

  std::optional<FrameId> last;
  while (auto record = reader.next()) {
    try {
      const auto type = record->at("type").get<std::string>();
      if (type == "frame") {
        if (file.summary) {
          throw Error(ErrorCode::Parse, "frame record after summary record");
        }
        auto frame = frame_from(*record, file);
        if (last && frame.frame_id <= *last) {
          throw Error(ErrorCode::Ordering,
                      fmt::format("frame_id {} does not increase (previous {})", frame.frame_id,
                                  *last));
        }
        last = frame.frame_id;
        file.frames.push_back(std::move(frame));
      } else if (type == "summary") {
        if (file.summary) throw Error(ErrorCode::Parse, "more than one summary record");
        file.summary = summary_from(*record);
      } else {
        throw Error(ErrorCode::Parse, fmt::format("unknown record type '{}'", type));
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Parse, reader.where(e.what()));
    } catch (const Error& e) {
      throw Error(e.code(), reader.where(e.what()));
    }
  }
  return file;
}

ReportFile read_report_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
  return read_report(in, path.string());
}

}  // namespace safeguard
