#include "safeguard/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "safeguard/error.hpp"

namespace safeguard {

using nlohmann::json;

RecordReader::RecordReader(std::istream& in, std::string source_name)
    : in_(in), source_(std::move(source_name)) {}

std::optional<json> RecordReader::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    try {
      auto record = json::parse(text);
      if (!record.is_object()) {
        throw Error(ErrorCode::Parse, where("record is not a JSON object"));
      }
      return record;
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Parse, where(fmt::format("malformed JSON: {}", e.what())));
    }
  }
  return std::nullopt;
}

std::string RecordReader::where(std::string_view message) const {
  return fmt::format("{}:{}: {}", source_, line_, message);
}

namespace {

/// Typed field access that turns every mismatch into Error(Parse) at the
/// current line.
class Fields {
 public:
  Fields(const json& record, const RecordReader& reader) : record_(record), reader_(reader) {}

  [[noreturn]] void fail(std::string_view message) const {
    throw Error(ErrorCode::Parse, reader_.where(message));
  }

  const json& require(const char* key) const {
    auto it = record_.find(key);
    if (it == record_.end() || it->is_null()) fail(fmt::format("missing field '{}'", key));
    return *it;
  }

  const json* optional(const char* key) const {
    auto it = record_.find(key);
    return it == record_.end() || it->is_null() ? nullptr : &*it;
  }

  double number(const json& value, std::string_view what) const {
    if (!value.is_number()) fail(fmt::format("'{}' must be a number", what));
    const double v = value.get<double>();
    if (!std::isfinite(v)) fail(fmt::format("'{}' must be finite", what));
    return v;
  }

  std::int64_t integer(const json& value, std::string_view what) const {
    if (!value.is_number_integer()) fail(fmt::format("'{}' must be an integer", what));
    return value.get<std::int64_t>();
  }

  std::string string(const json& value, std::string_view what) const {
    if (!value.is_string()) fail(fmt::format("'{}' must be a string", what));
    return value.get<std::string>();
  }

  template <std::size_t N>
  std::array<double, N> vector(const json& value, std::string_view what) const {
    if (!value.is_array() || value.size() != N) {
      fail(fmt::format("'{}' must be an array of {} numbers", what, N));
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = number(value[i], what);
    return out;
  }

  BoundingBox box(const json& value, std::string_view what) const {
    auto v = vector<4>(value, what);
    BoundingBox b{v[0], v[1], v[2], v[3]};
    if (b.x_min > b.x_max) {
      fail(fmt::format("x_min>x_max for {} ({} > {})", what, b.x_min, b.x_max));
    }
    if (b.y_min > b.y_max) {
      fail(fmt::format("y_min>y_max for {} ({} > {})", what, b.y_min, b.y_max));
    }
    return b;
  }

  Point2D point(const json& value, std::string_view what) const {
    auto v = vector<2>(value, what);
    return {v[0], v[1]};
  }

  double confidence(const json* value, std::string_view what) const {
    if (value == nullptr) return 1.0;
    const double c = number(*value, what);
    if (c < 0.0 || c > 1.0) fail(fmt::format("{} outside [0,1]: {}", what, c));
    return c;
  }

 private:
  const json& record_;
  const RecordReader& reader_;
};

/// Clamps a value into [0, limit]; returns true if it moved.
bool clamp_coordinate(double& v, int limit) {
  const double clamped = std::clamp(v, 0.0, static_cast<double>(limit));
  const bool moved = clamped != v;
  v = clamped;
  return moved;
}

bool clamp_box(BoundingBox& b, const ImageGeometry& g) {
  bool moved = clamp_coordinate(b.x_min, g.width);
  moved |= clamp_coordinate(b.y_min, g.height);
  moved |= clamp_coordinate(b.x_max, g.width);
  moved |= clamp_coordinate(b.y_max, g.height);
  return moved;
}

bool clamp_point(Point2D& p, const ImageGeometry& g) {
  bool moved = clamp_coordinate(p.x, g.width);
  moved |= clamp_coordinate(p.y, g.height);
  return moved;
}

}  // namespace

json read_header(RecordReader& reader, std::string_view expected_format) {
  auto header = reader.next();
  if (!header) {
    throw Error(ErrorCode::Parse, fmt::format("{}: empty file, expected a '{}' header",
                                              reader.source(), expected_format));
  }
  Fields f(*header, reader);
  const auto format = f.string(f.require("format"), "format");
  if (format != expected_format) {
    f.fail(fmt::format("expected format '{}', found '{}'", expected_format, format));
  }
  const auto version = f.integer(f.require("format_version"), "format_version");
  if (version != kFormatVersion) {
    throw Error(ErrorCode::Version,
                reader.where(fmt::format("unsupported format_version {} (supported: {})", version,
                                         kFormatVersion)));
  }
  return *header;
}

// -- detections ---------------------------------------------------------------

DetectionReader::DetectionReader(std::istream& in, std::string source_name)
    : records_(in, std::move(source_name)) {
  const auto record = read_header(records_, kDetectionsFormat);
  Fields f(record, records_);
  header_.format_version = kFormatVersion;
  if (const auto* v = f.optional("video_id")) header_.video_id = f.string(*v, "video_id");
  if (const auto* v = f.optional("frame_rate")) {
    header_.frame_rate = f.number(*v, "frame_rate");
    if (!(*header_.frame_rate > 0.0)) f.fail("frame_rate must be positive");
  }
  const auto width = f.integer(f.require("width"), "width");
  const auto height = f.integer(f.require("height"), "height");
  if (width < 1 || height < 1) {
    f.fail(fmt::format("image geometry {}x{} must be at least 1x1", width, height));
  }
  header_.geometry = {static_cast<int>(width), static_cast<int>(height)};
}

std::optional<Frame> DetectionReader::next() {
  auto record = records_.next();
  if (!record) return std::nullopt;
  Fields f(*record, records_);
  const auto& g = header_.geometry;

  Frame frame;
  frame.geometry = g;
  frame.frame_id = f.integer(f.require("frame_id"), "frame_id");
  if (last_frame_id_ && frame.frame_id <= *last_frame_id_) {
    throw Error(ErrorCode::Ordering,
                records_.where(fmt::format("frame_id {} does not increase (previous {})",
                                           frame.frame_id, *last_frame_id_)));
  }

  auto warn = [&](std::string message) {
    warnings_.push_back({records_.line(), records_.where(message)});
  };

  if (const auto* persons = f.optional("persons")) {
    if (!persons->is_array()) f.fail("'persons' must be an array");
    for (const auto& p : *persons) {
      if (!p.is_object()) f.fail("person entry must be an object");
      Fields pf(p, records_);
      PersonDetection person;
      person.id = pf.string(pf.require("id"), "person id");
      const auto what = fmt::format("person {}", person.id);
      person.box = pf.box(pf.require("box"), what);
      person.confidence = pf.confidence(pf.optional("confidence"), what + " confidence");
      if (const auto* v = pf.optional("left_shoulder")) {
        person.left_shoulder = pf.point(*v, what + " left_shoulder");
      }
      if (const auto* v = pf.optional("right_shoulder")) {
        person.right_shoulder = pf.point(*v, what + " right_shoulder");
      }
      if (person.left_shoulder.has_value() != person.right_shoulder.has_value()) {
        f.fail(fmt::format("unpaired shoulder for {}", what));
      }
      if (clamp_box(person.box, g)) warn(fmt::format("clamped {} box to image bounds", what));
      if (person.left_shoulder && clamp_point(*person.left_shoulder, g)) {
        warn(fmt::format("clamped {} left_shoulder to image bounds", what));
      }
      if (person.right_shoulder && clamp_point(*person.right_shoulder, g)) {
        warn(fmt::format("clamped {} right_shoulder to image bounds", what));
      }
      frame.persons.push_back(std::move(person));
    }
  }

  if (const auto* faces = f.optional("faces")) {
    if (!faces->is_array()) f.fail("'faces' must be an array");
    for (const auto& fj : *faces) {
      if (!fj.is_object()) f.fail("face entry must be an object");
      Fields ff(fj, records_);
      FaceDetection face;
      face.id = ff.string(ff.require("id"), "face id");
      const auto what = fmt::format("face {}", face.id);
      face.box = ff.box(ff.require("box"), what);
      face.confidence = ff.confidence(ff.optional("confidence"), what + " confidence");
      if (const auto* v = ff.optional("person_id")) face.person_id = ff.string(*v, "person_id");
      if (clamp_box(face.box, g)) warn(fmt::format("clamped {} box to image bounds", what));
      frame.faces.push_back(std::move(face));
    }
  }

  if (auto findings = validate_frame(frame); !findings.empty()) {
    f.fail(fmt::format("invalid frame {}: {}", frame.frame_id, fmt::join(findings, "; ")));
  }
  last_frame_id_ = frame.frame_id;
  return frame;
}

DetectionStream read_detection_stream(std::istream& in, std::string source_name) {
  DetectionReader reader(in, std::move(source_name));
  DetectionStream stream;
  stream.header = reader.header();
  while (auto frame = reader.next()) stream.frames.push_back(std::move(*frame));
  stream.warnings = reader.warnings();
  return stream;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open {}", path.string()));
  return in;
}

}  // namespace

DetectionStream read_detection_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_detection_stream(in, path.string());
}

json box_to_json(const BoundingBox& box) {
  return json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

json point_to_json(const Point2D& point) { return json::array({point.x, point.y}); }

void write_detection_header(std::ostream& out, const DetectionStreamHeader& header) {
  json record = {{"format", kDetectionsFormat},
                 {"format_version", header.format_version},
                 {"video_id", header.video_id},
                 {"width", header.geometry.width},
                 {"height", header.geometry.height}};
  if (header.frame_rate) record["frame_rate"] = *header.frame_rate;
  out << record.dump() << '\n';
}

void write_frame(std::ostream& out, const Frame& frame) {
  json persons = json::array();
  for (const auto& p : frame.persons) {
    json pj = {{"id", p.id}, {"box", box_to_json(p.box)}, {"confidence", p.confidence}};
    if (p.left_shoulder) pj["left_shoulder"] = point_to_json(*p.left_shoulder);
    if (p.right_shoulder) pj["right_shoulder"] = point_to_json(*p.right_shoulder);
    persons.push_back(std::move(pj));
  }
  json faces = json::array();
  for (const auto& face : frame.faces) {
    json fj = {{"id", face.id}, {"box", box_to_json(face.box)}, {"confidence", face.confidence}};
    if (face.person_id) fj["person_id"] = *face.person_id;
    faces.push_back(std::move(fj));
  }
  json record = {{"frame_id", frame.frame_id}, {"persons", persons}, {"faces", faces}};
  out << record.dump() << '\n';
}

// -- recorded scores ----------------------------------------------------------

ScoreTable read_recorded_scores(std::istream& in, std::string source_name) {
  RecordReader reader(in, std::move(source_name));
  read_header(reader, kScoresFormat);
  ScoreTable table;
  while (auto record = reader.next()) {
    Fields f(*record, reader);
    RecordedScoresEntry entry;
    entry.frame_id = f.integer(f.require("frame_id"), "frame_id");
    entry.face_id = f.string(f.require("face_id"), "face_id");
    entry.mask_scores = f.vector<3>(f.require("mask_scores"), "mask_scores");
    entry.hand_scores = f.vector<2>(f.require("hand_scores"), "hand_scores");
    for (auto [name, problem] :
         {std::pair{"mask_scores", distribution_problem(entry.mask_scores)},
          std::pair{"hand_scores", distribution_problem(entry.hand_scores)}}) {
      if (!problem.empty()) {
        throw Error(ErrorCode::InvalidDistribution, reader.where(fmt::format(
                                                        "{} for frame {} face '{}': {}", name,
                                                        entry.frame_id, entry.face_id, problem)));
      }
    }
    try {
      table.insert(std::move(entry));
    } catch (const Error& e) {
      throw Error(e.code(), reader.where(e.what()));
    }
  }
  return table;
}

ScoreTable read_recorded_scores_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_recorded_scores(in, path.string());
}

void write_recorded_scores(std::ostream& out, const ScoreTable& table) {
  out << json{{"format", kScoresFormat}, {"format_version", kFormatVersion}}.dump() << '\n';
  for (const auto& [key, entry] : table) {
    out << json{{"frame_id", entry.frame_id},
                {"face_id", entry.face_id},
                {"mask_scores", entry.mask_scores},
                {"hand_scores", entry.hand_scores}}
               .dump()
        << '\n';
  }
}

// -- ground truth -------------------------------------------------------------

GroundTruthSet read_ground_truth(std::istream& in, std::string source_name) {
  RecordReader reader(in, std::move(source_name));
  const auto header = read_header(reader, kGroundTruthFormat);
  GroundTruthSet set;
  {
    Fields f(header, reader);
    if (const auto* v = f.optional("video_id")) set.video_id = f.string(*v, "video_id");
  }

  auto unknown = [&](std::string_view field, const std::string& value) {
    throw Error(ErrorCode::UnknownLabel,
                reader.where(fmt::format("unknown {} label '{}'", field, value)));
  };

  std::optional<FrameId> last;
  while (auto record = reader.next()) {
    Fields f(*record, reader);
    GroundTruthFrame frame;
    frame.frame_id = f.integer(f.require("frame_id"), "frame_id");
    if (last && frame.frame_id <= *last) {
      throw Error(ErrorCode::Ordering,
                  reader.where(fmt::format("frame_id {} does not increase (previous {})",
                                           frame.frame_id, *last)));
    }
    last = frame.frame_id;

    std::set<SubjectId> seen;
    if (const auto* subjects = f.optional("subjects")) {
      if (!subjects->is_array()) f.fail("'subjects' must be an array");
      for (const auto& sj : *subjects) {
        if (!sj.is_object()) f.fail("subject entry must be an object");
        Fields sf(sj, reader);
        GroundTruthSubject s;
        s.id = sf.string(sf.require("id"), "subject id");
        if (!seen.insert(s.id).second) f.fail(fmt::format("duplicate subject id '{}'", s.id));
        const auto what = fmt::format("subject {}", s.id);
        if (const auto* v = sf.optional("face_id")) s.face_id = sf.string(*v, "face_id");
        if (const auto* v = sf.optional("person_id")) s.person_id = sf.string(*v, "person_id");
        if (const auto* v = sf.optional("face_box")) s.face_box = sf.box(*v, what + " face_box");
        if (const auto* v = sf.optional("person_box")) {
          s.person_box = sf.box(*v, what + " person_box");
        }
        if (const auto* v = sf.optional("mask")) {
          const auto text = sf.string(*v, "mask");
          s.mask = parse_mask_label(text);
          if (!s.mask) unknown("mask", text);
        }
        if (const auto* v = sf.optional("hand")) {
          const auto text = sf.string(*v, "hand");
          s.hand = parse_hand_label(text);
          if (!s.hand) unknown("hand", text);
        }
        if (const auto* v = sf.optional("distance")) {
          const auto text = sf.string(*v, "distance");
          s.distance = parse_distance_status(text);
          if (!s.distance || *s.distance == DistanceStatus::Unassessed) unknown("distance", text);
        }
        frame.subjects.push_back(std::move(s));
      }
    }
    set.frames.push_back(std::move(frame));
  }
  return set;
}

GroundTruthSet read_ground_truth_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_ground_truth(in, path.string());
}

void write_ground_truth(std::ostream& out, const GroundTruthSet& set) {
  out << json{{"format", kGroundTruthFormat},
              {"format_version", kFormatVersion},
              {"video_id", set.video_id}}
             .dump()
      << '\n';
  for (const auto& frame : set.frames) {
    json subjects = json::array();
    for (const auto& s : frame.subjects) {
      json sj = {{"id", s.id}};
      if (s.face_id) sj["face_id"] = *s.face_id;
      if (s.person_id) sj["person_id"] = *s.person_id;
      if (s.face_box) sj["face_box"] = box_to_json(*s.face_box);
      if (s.person_box) sj["person_box"] = box_to_json(*s.person_box);
      if (s.mask) sj["mask"] = to_string(*s.mask);
      if (s.hand) sj["hand"] = to_string(*s.hand);
      if (s.distance) sj["distance"] = to_string(*s.distance);
      subjects.push_back(std::move(sj));
    }
    out << json{{"frame_id", frame.frame_id}, {"subjects", subjects}}.dump() << '\n';
  }
}

std::string detect_format(const std::filesystem::path& path) {
  auto in = open_input(path);
  RecordReader reader(in, path.string());
  auto header = reader.next();
  if (!header) throw Error(ErrorCode::Parse, fmt::format("{}: empty file", path.string()));
  auto it = header->find("format");
  if (it == header->end() || !it->is_string()) {
    throw Error(ErrorCode::Parse, reader.where("header has no 'format' field"));
  }
  return it->get<std::string>();
}

}  // namespace safeguard
