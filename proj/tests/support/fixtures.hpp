#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "safeguard/face_pipeline.hpp"
#include "safeguard/types.hpp"

namespace fixtures {

using namespace safeguard;

/// Person whose shoulders sit `width` apart around (cx, cy), rotated by
/// `angle` radians; the box is a loose body rectangle around the shoulders.
inline PersonDetection person_at(std::string id, double cx, double cy, double width,
                                 double angle = 0.0) {
  const double hx = std::cos(angle) * width / 2.0;
  const double hy = std::sin(angle) * width / 2.0;
  PersonDetection p;
  p.id = std::move(id);
  p.left_shoulder = Point2D{cx - hx, cy - hy};
  p.right_shoulder = Point2D{cx + hx, cy + hy};
  p.box = {cx - width, cy - width / 2.0, cx + width, cy + 3.0 * width};
  p.confidence = 0.9;
  return p;
}

inline PersonDetection person_with(std::string id, Point2D left, Point2D right) {
  PersonDetection p;
  p.id = std::move(id);
  p.left_shoulder = left;
  p.right_shoulder = right;
  const double x0 = std::min(left.x, right.x);
  const double x1 = std::max(left.x, right.x);
  const double y0 = std::min(left.y, right.y);
  const double y1 = std::max(left.y, right.y);
  p.box = {x0, y0, x1, y1};
  p.confidence = 0.9;
  return p;
}

/// Random frame with `count` persons, shoulder widths in [20, 120] px,
/// arbitrary shoulder orientation, all inside the image.
inline Frame random_frame(std::mt19937_64& rng, int count, ImageGeometry geometry = {1920, 1080}) {
  std::uniform_real_distribution<double> width(20.0, 120.0);
  std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
  Frame frame;
  frame.geometry = geometry;
  for (int i = 0; i < count; ++i) {
    const double w = width(rng);
    std::uniform_real_distribution<double> x(w, geometry.width - w);
    std::uniform_real_distribution<double> y(w, geometry.height - 3.0 * w);
    frame.persons.push_back(person_at("p" + std::to_string(i), x(rng), y(rng), w, angle(rng)));
  }
  return frame;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("safeguard-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixtures
