#include "safeguard/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>

#include <fmt/format.h>

#include "safeguard/error.hpp"

namespace safeguard {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view value) {
  // std::from_chars for double is not available in every libstdc++ we target.
  std::string text(value);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw Error(ErrorCode::Config, fmt::format("{}: '{}' is not a number", key, value));
  }
  return out;
}

int to_int(std::string_view key, std::string_view value) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::Config, fmt::format("{}: '{}' is not an integer", key, value));
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error(ErrorCode::Config, fmt::format("{}: '{}' is not a boolean", key, value));
}

std::vector<std::string> to_list(std::string_view value) {
  std::vector<std::string> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    out.emplace_back(trim(value.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

void EngineConfig::set(std::string_view key, std::string_view value) {
  if (key == "lambda") {
    distancing.lambda_coefficient = to_double(key, value);
  } else if (key == "min_shoulder_width") {
    distancing.min_shoulder_width = to_double(key, value);
  } else if (key == "margin") {
    crop.margin_fraction = to_double(key, value);
  } else if (key == "clamp_crops") {
    crop.clamp_to_image = to_bool(key, value);
  } else if (key == "iou") {
    matching.iou_threshold = to_double(key, value);
  } else if (key == "match_mode") {
    auto mode = parse_matching_mode(value);
    if (!mode) throw Error(ErrorCode::Config, fmt::format("match_mode: unknown '{}'", value));
    matching.matching = *mode;
  } else if (key == "backend") {
    BackendKind kind{};
    if (value == "recorded") {
      kind = BackendKind::Recorded;
    } else if (value == "model") {
      kind = BackendKind::InterchangeModel;
    } else {
      throw Error(ErrorCode::Config, fmt::format("backend: unknown '{}'", value));
    }
    mask_backend.kind = hand_backend.kind = kind;
  } else if (key == "input_edge") {
    mask_backend.input_edge = hand_backend.input_edge = to_int(key, value);
  } else if (key == "mask_input_edge") {
    mask_backend.input_edge = to_int(key, value);
  } else if (key == "hand_input_edge") {
    hand_backend.input_edge = to_int(key, value);
  } else if (key == "normalize") {
    Normalization n{};
    if (value == "unit") {
      n = Normalization::Unit;
    } else if (value == "imagenet") {
      n = Normalization::ImageNet;
    } else {
      throw Error(ErrorCode::Config, fmt::format("normalize: unknown '{}'", value));
    }
    mask_backend.normalization = hand_backend.normalization = n;
  } else if (key == "mask_model") {
    mask_backend.model_path = std::string(value);
  } else if (key == "hand_model") {
    hand_backend.model_path = std::string(value);
  } else if (key == "mask_class_order") {
    mask_backend.class_order = to_list(value);
  } else if (key == "hand_class_order") {
    hand_backend.class_order = to_list(value);
  } else {
    throw Error(ErrorCode::Config, fmt::format("unknown configuration key '{}'", key));
  }
}

void EngineConfig::validate() const {
  distancing.validate();
  crop.validate();
  matching.validate();
  mask_backend.validate(ClassifierTask::Mask);
  hand_backend.validate(ClassifierTask::Hand);
}

EngineConfig parse_config(std::istream& in, const std::string& source_name) {
  EngineConfig config;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view text(line);
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::Config,
                  fmt::format("{}:{}: expected 'key = value'", source_name, number));
    }
    try {
      config.set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::Config, fmt::format("{}:{}: {}", source_name, number, e.what()));
    }
  }
  return config;
}

EngineConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open config {}", path.string()));
  return parse_config(in, path.string());
}

}  // namespace safeguard
