#include "circlereg/io.hpp"

#include <fstream>
#include <sstream>

#include "circlereg/error.hpp"

namespace circlereg {
namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& why) {
  throw Error(ErrorCode::SchemaError, path + ": " + why);
}

json vec3(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec3_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) schema_error(path, "expected 3 numbers");
  Eigen::Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) schema_error(path, "expected 3 numbers");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

template <typename T>
T wrap(const std::string& path, const Eigen::Vector3d& v) {
  try {
    return T(v);
  } catch (const Error& e) {
    schema_error(path, e.what());
  }
}

const json& member(const json& j, const char* key, const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) schema_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

DerivationCase parse_case(const std::string& s) {
  if (s == "case1") return DerivationCase::Case1;
  if (s == "case2") return DerivationCase::Case2;
  if (s == "case3") return DerivationCase::Case3;
  schema_error("case", "unknown case '" + s + "'");
}

MarkingEdge parse_edge(const std::string& s) {
  if (s == "nominal") return MarkingEdge::Nominal;
  if (s == "inner") return MarkingEdge::Inner;
  if (s == "outer") return MarkingEdge::Outer;
  schema_error("edge", "unknown edge '" + s + "'");
}

// Reads j[key] into out when present, reporting type errors as config errors.
template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& prefix = "") {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidConfig, prefix + key + ": wrong type");
  }
}

}  // namespace

json to_json(const TemplateConfig& c) {
  return {{"length", c.length},
          {"width", c.width},
          {"circle_radius", c.circle_radius},
          {"thickness", c.thickness}};
}

TemplateConfig template_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "template: expected an object");
  TemplateConfig c;
  read_opt(j, "length", c.length, "template.");
  read_opt(j, "width", c.width, "template.");
  read_opt(j, "circle_radius", c.circle_radius, "template.");
  read_opt(j, "thickness", c.thickness, "template.");
  standard_template(c);  // validates
  return c;
}

json to_json(const Homography& h) {
  json arr = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) arr.push_back(h.matrix()(r, c));
  }
  return {{"h", arr}, {"convention", "image_from_world"}};
}

Homography homography_from_json(const json& j) {
  if (!j.is_object()) schema_error("$", "expected an object");
  const json& arr = member(j, "h", "");
  if (!arr.is_array() || arr.size() != 9) schema_error("h", "expected 9 numbers");
  if (const auto it = j.find("convention");
      it != j.end() && (!it->is_string() || it->get<std::string>() != "image_from_world")) {
    schema_error("convention", "only image_from_world is supported");
  }
  Eigen::Matrix3d m;
  for (int i = 0; i < 9; ++i) {
    const json& v = arr[static_cast<std::size_t>(i)];
    if (!v.is_number()) schema_error("h[" + std::to_string(i) + "]", "expected a number");
    m(i / 3, i % 3) = v.get<double>();
  }
  try {
    return Homography(m);
  } catch (const Error& e) {
    schema_error("h", e.what());
  }
}

json to_json(const CorrespondenceSet& corr) {
  json j;
  j["case"] = to_string(corr.derivation);
  j["edge"] = to_string(corr.edge);
  j["low_confidence"] = corr.low_confidence;
  j["notes"] = corr.notes;
  j["points"] = json::array();
  for (const auto& p : corr.points) {
    j["points"].push_back(
        {{"name", p.name}, {"image", vec3(p.image.coords())}, {"world", vec3(p.world.coords())}});
  }
  j["lines"] = json::array();
  for (const auto& l : corr.lines) {
    j["lines"].push_back(
        {{"name", l.name}, {"image", vec3(l.image.coords())}, {"world", vec3(l.world.coords())}});
  }
  if (corr.vanishing_line) j["vanishing_line"] = vec3(corr.vanishing_line->coords());
  if (corr.imaged_center) j["imaged_center"] = vec3(corr.imaged_center->coords());
  return j;
}

CorrespondenceSet correspondences_from_json(const json& j) {
  if (!j.is_object()) schema_error("$", "expected an object");
  CorrespondenceSet corr;
  const json& c = member(j, "case", "");
  if (!c.is_string()) schema_error("case", "expected a string");
  corr.derivation = parse_case(c.get<std::string>());
  if (const auto it = j.find("edge"); it != j.end()) {
    if (!it->is_string()) schema_error("edge", "expected a string");
    corr.edge = parse_edge(it->get<std::string>());
  }
  if (const auto it = j.find("low_confidence"); it != j.end()) {
    if (!it->is_boolean()) schema_error("low_confidence", "expected a boolean");
    corr.low_confidence = it->get<bool>();
  }
  if (const auto it = j.find("notes"); it != j.end()) {
    if (!it->is_array()) schema_error("notes", "expected an array");
    for (const auto& n : *it) {
      if (!n.is_string()) schema_error("notes", "expected strings");
      corr.notes.push_back(n.get<std::string>());
    }
  }
  const json& pts = member(j, "points", "");
  if (!pts.is_array()) schema_error("points", "expected an array");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string path = "points[" + std::to_string(i) + "]";
    const json& p = pts[i];
    if (!p.is_object()) schema_error(path, "expected an object");
    const json& name = member(p, "name", path);
    if (!name.is_string()) schema_error(path + ".name", "expected a string");
    corr.points.push_back(
        {name.get<std::string>(),
         wrap<HomPoint2>(path + ".image", vec3_at(member(p, "image", path), path + ".image")),
         wrap<HomPoint2>(path + ".world", vec3_at(member(p, "world", path), path + ".world"))});
  }
  const json& lines = member(j, "lines", "");
  if (!lines.is_array()) schema_error("lines", "expected an array");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string path = "lines[" + std::to_string(i) + "]";
    const json& l = lines[i];
    if (!l.is_object()) schema_error(path, "expected an object");
    const json& name = member(l, "name", path);
    if (!name.is_string()) schema_error(path + ".name", "expected a string");
    corr.lines.push_back(
        {name.get<std::string>(),
         wrap<HomLine2>(path + ".image", vec3_at(member(l, "image", path), path + ".image")),
         wrap<HomLine2>(path + ".world", vec3_at(member(l, "world", path), path + ".world"))});
  }
  if (const auto it = j.find("vanishing_line"); it != j.end()) {
    corr.vanishing_line = wrap<HomLine2>("vanishing_line", vec3_at(*it, "vanishing_line"));
  }
  if (const auto it = j.find("imaged_center"); it != j.end()) {
    corr.imaged_center = wrap<HomPoint2>("imaged_center", vec3_at(*it, "imaged_center"));
  }
  return corr;
}

json to_json(const CameraSample& cam) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) r.push_back(cam.rotation(i, k));
  }
  return {{"position", vec3(cam.position)},
          {"rotation", r},
          {"focal", cam.focal},
          {"principal_point", {cam.principal_point.x(), cam.principal_point.y()}},
          {"image_size", {cam.image_width, cam.image_height}}};
}

json to_json(const SweepConfig& c) {
  const CameraRanges& r = c.ranges;
  return {{"sigmas", c.sigmas},
          {"cameras", c.cameras},
          {"target", to_string(c.target)},
          {"variant", to_string(c.variant)},
          {"seed", c.seed},
          {"points", c.n_points},
          {"grid_spacing", c.grid_spacing},
          {"threads", c.threads},
          {"template", to_json(c.field)},
          {"ranges",
           {{"x", {r.x_min, r.x_max}},
            {"y", {r.y_min, r.y_max}},
            {"height", {r.height_min, r.height_max}},
            {"focal", {r.focal_min, r.focal_max}},
            {"roll_max_deg", r.roll_max_deg},
            {"image_size", {r.image_width, r.image_height}},
            {"min_arc_fraction", r.min_arc_fraction},
            {"max_retries", r.max_retries}}}};
}

SweepConfig sweep_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config: expected an object");
  SweepConfig c;
  read_opt(j, "sigmas", c.sigmas);
  read_opt(j, "cameras", c.cameras);
  read_opt(j, "seed", c.seed);
  read_opt(j, "points", c.n_points);
  read_opt(j, "grid_spacing", c.grid_spacing);
  read_opt(j, "threads", c.threads);
  std::string s;
  if (j.contains("target")) {
    read_opt(j, "target", s);
    c.target = parse_noise_target(s);
  }
  if (j.contains("variant")) {
    read_opt(j, "variant", s);
    c.variant = parse_pipeline_variant(s);
  }
  if (const auto it = j.find("template"); it != j.end()) {
    c.field = template_config_from_json(*it);
  }
  if (const auto it = j.find("ranges"); it != j.end()) {
    if (!it->is_object()) throw Error(ErrorCode::InvalidConfig, "ranges: expected an object");
    CameraRanges& r = c.ranges;
    auto pair = [&](const char* key, double& lo, double& hi) {
      std::vector<double> v{lo, hi};
      read_opt(*it, key, v, "ranges.");
      if (v.size() != 2) {
        throw Error(ErrorCode::InvalidConfig, std::string("ranges.") + key + ": expected [min, max]");
      }
      lo = v[0];
      hi = v[1];
    };
    pair("x", r.x_min, r.x_max);
    pair("y", r.y_min, r.y_max);
    pair("height", r.height_min, r.height_max);
    pair("focal", r.focal_min, r.focal_max);
    read_opt(*it, "roll_max_deg", r.roll_max_deg, "ranges.");
    read_opt(*it, "min_arc_fraction", r.min_arc_fraction, "ranges.");
    read_opt(*it, "max_retries", r.max_retries, "ranges.");
    std::vector<int> size{r.image_width, r.image_height};
    read_opt(*it, "image_size", size, "ranges.");
    if (size.size() != 2) {
      throw Error(ErrorCode::InvalidConfig, "ranges.image_size: expected [width, height]");
    }
    r.image_width = size[0];
    r.image_height = size[1];
  }
  validate(c);
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace circlereg
