#include "common.hpp"

#include <cmath>
#include <cstdlib>

#include "circlereg/io.hpp"

namespace circlereg::cli {
namespace {

double parse_number(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidConfig, "sigma: '" + s + "' is not a number");
  }
  return v;
}

}  // namespace

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::SchemaError:
      return kIo;
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidArgument:
      return kConfig;
    case ErrorCode::InsufficientEvidence:
    case ErrorCode::MissingCenter:
    case ErrorCode::MissingLine:
    case ErrorCode::ClassAbsent:
    case ErrorCode::TooFewCandidates:
      return kInsufficientEvidence;
    default:
      return kEstimation;
  }
}

std::vector<double> parse_sigma_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ':') {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.size() == 1) return {parse_number(parts[0])};
  if (parts.size() != 3) {
    throw Error(ErrorCode::InvalidConfig, "sigma: expected a:b:s or a single value");
  }
  const double a = parse_number(parts[0]);
  const double b = parse_number(parts[1]);
  const double s = parse_number(parts[2]);
  if (!(s > 0.0) || b < a) {
    throw Error(ErrorCode::InvalidConfig, "sigma: need a <= b and a positive step");
  }
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double v = a + k * s;
    if (v > b + 1e-9 * s) break;
    grid.push_back(v);
  }
  return grid;
}

TemplateConfig load_template_config(const std::string& path) {
  if (path.empty()) return TemplateConfig{};
  return template_config_from_json(read_json_file(path));
}

}  // namespace circlereg::cli
