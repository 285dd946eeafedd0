#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string_view>

#include "circlereg/conic.hpp"
#include "circlereg/homography.hpp"
#include "circlereg/image.hpp"
#include "circlereg/io.hpp"
#include "common.hpp"

namespace circlereg::cli {
namespace {

struct Rgb {
  std::uint8_t r, g, b;
  std::string hex() const {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
  }
};

constexpr Rgb kWhite{255, 255, 255};
constexpr Rgb kRed{230, 40, 40};
constexpr Rgb kGreen{40, 200, 80};
constexpr Rgb kOrange{255, 160, 0};
constexpr Rgb kCyan{0, 200, 230};
constexpr Rgb kMagenta{220, 0, 220};

struct Polyline {
  std::string cls;
  Rgb color;
  std::vector<Eigen::Vector2d> pts;
};

struct Dot {
  std::string name;
  Rgb color;
  Eigen::Vector2d xy;
};

struct Segment2 {
  std::string name;
  Rgb color;
  Eigen::Vector2d p, q;
};

struct Overlay {
  int width = 0;
  int height = 0;
  std::vector<Polyline> polylines;
  std::optional<EllipseGeom> circle;
  std::vector<Segment2> lines;
  std::vector<Dot> dots;
};

// Part of an infinite image line inside the canvas.
std::optional<std::pair<Eigen::Vector2d, Eigen::Vector2d>> clip_line(const HomLine2& l,
                                                                     int w, int h) {
  const Eigen::Vector3d c = l.coords();
  std::vector<Eigen::Vector2d> hits;
  auto add = [&](const Eigen::Vector2d& p) {
    if (p.x() < -1e-9 || p.y() < -1e-9 || p.x() > w + 1e-9 || p.y() > h + 1e-9) return;
    for (const auto& q : hits) {
      if ((q - p).norm() < 1e-9) return;
    }
    hits.push_back(p);
  };
  if (std::abs(c.y()) > 1e-12) {
    add({0.0, -c.z() / c.y()});
    add({double(w), -(c.z() + c.x() * w) / c.y()});
  }
  if (std::abs(c.x()) > 1e-12) {
    add({-c.z() / c.x(), 0.0});
    add({-(c.z() + c.y() * h) / c.x(), double(h)});
  }
  if (hits.size() < 2) return std::nullopt;
  return std::make_pair(hits[0], hits[1]);
}

Overlay build_overlay(const std::optional<Homography>& h_in,
                      const std::optional<CorrespondenceSet>& corr, const FieldTemplate& tpl,
                      int width, int height) {
  Overlay ov;
  ov.width = width;
  ov.height = height;
  if (h_in) {
    // Orient the homography so the field center lies in front of the camera.
    Eigen::Matrix3d m = h_in->matrix();
    if ((m * Eigen::Vector3d(0, 0, 1)).z() < 0.0) m = -m;
    const Homography h(m);
    auto project_front = [&](const Eigen::Vector2d& w) -> std::optional<Eigen::Vector2d> {
      const Eigen::Vector3d x = m * w.homogeneous();
      if (x.z() <= 1e-12 * x.norm()) return std::nullopt;
      const Eigen::Vector2d p = x.head<2>() / x.z();
      if (p.cwiseAbs().maxCoeff() > 1e6) return std::nullopt;
      return p;
    };
    for (const auto& s : tpl.markings()) {
      Polyline pl{s.name, kWhite, {}};
      constexpr int kSteps = 64;
      for (int i = 0; i <= kSteps; ++i) {
        const auto p = project_front(s.from + (s.to - s.from) * (double(i) / kSteps));
        if (!p) {
          if (pl.pts.size() >= 2) ov.polylines.push_back(pl);
          pl.pts.clear();
          continue;
        }
        pl.pts.push_back(*p);
      }
      if (pl.pts.size() >= 2) ov.polylines.push_back(pl);
    }
    const Conic imaged = transform(h, tpl.center_circle().conic());
    try {
      ov.circle = geom_from_conic(imaged);
    } catch (const Error&) {
      Polyline pl{"center_circle", kWhite, {}};
      for (int i = 0; i <= 360; ++i) {
        const double t = i * std::numbers::pi / 180.0;
        const auto p = project_front(tpl.center_circle().radius *
                                     Eigen::Vector2d(std::cos(t), std::sin(t)));
        if (p) pl.pts.push_back(*p);
      }
      if (pl.pts.size() >= 2) ov.polylines.push_back(pl);
    }
  }
  if (corr) {
    for (const auto& lp : corr->lines) {
      if (lp.name == "halfway") continue;
      const Rgb color = lp.name.rfind("tangent", 0) == 0    ? kOrange
                        : lp.name.rfind("diagonal", 0) == 0 ? kGreen
                                                            : kCyan;
      if (const auto seg = clip_line(lp.image, width, height)) {
        ov.lines.push_back({lp.name, color, seg->first, seg->second});
      }
    }
    if (corr->vanishing_line) {
      if (const auto seg = clip_line(*corr->vanishing_line, width, height)) {
        ov.lines.push_back({"vanishing_line", kMagenta, seg->first, seg->second});
      }
    }
    for (const auto& pp : corr->points) {
      if (pp.image.is_at_infinity()) continue;
      const Rgb color = pp.name.rfind("g_", 0) == 0 ? kGreen : kRed;
      ov.dots.push_back({pp.name, color, pp.image.euclidean()});
    }
    if (corr->imaged_center && !corr->imaged_center->is_at_infinity()) {
      ov.dots.push_back({"center", kRed, corr->imaged_center->euclidean()});
    }
  }
  return ov;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  // No "-0.0000" for values that round to zero.
  if (std::string_view(buf) == "-0.0000") return "0.0000";
  return buf;
}

std::string to_svg(const Overlay& ov, const std::string& background) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << ov.width << "\" height=\""
    << ov.height << "\" viewBox=\"0 0 " << ov.width << ' ' << ov.height << "\">\n";
  if (!background.empty()) {
    s << "<image href=\"" << background << "\" x=\"0\" y=\"0\" width=\"" << ov.width
      << "\" height=\"" << ov.height << "\"/>\n";
  } else {
    s << "<rect width=\"100%\" height=\"100%\" fill=\"#2e6b30\"/>\n";
  }
  for (const auto& pl : ov.polylines) {
    s << "<polyline class=\"" << pl.cls << "\" fill=\"none\" stroke=\"" << pl.color.hex()
      << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pl.pts.size(); ++i) {
      s << (i ? " " : "") << fmt(pl.pts[i].x()) << ',' << fmt(pl.pts[i].y());
    }
    s << "\"/>\n";
  }
  if (ov.circle) {
    const EllipseGeom& g = *ov.circle;
    s << "<ellipse class=\"center_circle\" cx=\"" << fmt(g.center.x()) << "\" cy=\""
      << fmt(g.center.y()) << "\" rx=\"" << fmt(g.semi_major) << "\" ry=\""
      << fmt(g.semi_minor) << "\" transform=\"rotate(" << fmt(g.angle * 180.0 / std::numbers::pi)
      << ' ' << fmt(g.center.x()) << ' ' << fmt(g.center.y())
      << ")\" fill=\"none\" stroke=\"#ffffff\" stroke-width=\"2\"/>\n";
  }
  for (const auto& l : ov.lines) {
    s << "<line class=\"" << l.name << "\" x1=\"" << fmt(l.p.x()) << "\" y1=\"" << fmt(l.p.y())
      << "\" x2=\"" << fmt(l.q.x()) << "\" y2=\"" << fmt(l.q.y()) << "\" stroke=\""
      << l.color.hex() << "\" stroke-width=\"1.5\"/>\n";
  }
  for (const auto& d : ov.dots) {
    s << "<circle class=\"point\" data-name=\"" << d.name << "\" cx=\"" << fmt(d.xy.x())
      << "\" cy=\"" << fmt(d.xy.y()) << "\" r=\"5\" fill=\"" << d.color.hex() << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void plot(RgbImage& img, const Eigen::Vector2d& p, const Rgb& c, int radius = 0) {
  const int cx = static_cast<int>(std::floor(p.x()));
  const int cy = static_cast<int>(std::floor(p.y()));
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > radius * radius) continue;
      const int x = cx + dx;
      const int y = cy + dy;
      if (x < 0 || y < 0 || x >= img.width || y >= img.height) continue;
      const std::size_t i = (static_cast<std::size_t>(y) * img.width + x) * 3;
      img.rgb[i] = c.r;
      img.rgb[i + 1] = c.g;
      img.rgb[i + 2] = c.b;
    }
  }
}

void draw_segment(RgbImage& img, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                  const Rgb& c) {
  const double len = (b - a).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len * 2.0)));
  if (n > 100000) return;
  for (int i = 0; i <= n; ++i) plot(img, a + (b - a) * (double(i) / n), c, 1);
}

RgbImage to_raster(const Overlay& ov, std::optional<RgbImage> background) {
  RgbImage img = background ? std::move(*background) : RgbImage(ov.width, ov.height, 0);
  if (!background) {
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
      img.rgb[i] = 46;
      img.rgb[i + 1] = 107;
      img.rgb[i + 2] = 48;
    }
  }
  for (const auto& pl : ov.polylines) {
    for (std::size_t i = 1; i < pl.pts.size(); ++i) {
      draw_segment(img, pl.pts[i - 1], pl.pts[i], pl.color);
    }
  }
  if (ov.circle) {
    const auto pts = sample_ellipse(*ov.circle, 720);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      draw_segment(img, pts[i], pts[(i + 1) % pts.size()], kWhite);
    }
  }
  for (const auto& l : ov.lines) draw_segment(img, l.p, l.q, l.color);
  for (const auto& d : ov.dots) plot(img, d.xy, d.color, 4);
  return img;
}

struct RenderArgs {
  std::string homography;
  std::string correspondences;
  std::string image;
  std::string out;
  std::string template_path;
  int width = 1920;
  int height = 1080;
};

int run_render(const RenderArgs& a) {
  if (a.homography.empty() && a.correspondences.empty()) {
    throw Error(ErrorCode::InvalidConfig, "render: give --homography or --correspondences");
  }
  const std::string ext = std::filesystem::path(a.out).extension().string();
  if (ext != ".svg" && ext != ".png") {
    throw Error(ErrorCode::InvalidConfig, "out: extension must be .svg or .png");
  }
  const FieldTemplate tpl = standard_template(load_template_config(a.template_path));

  std::optional<CorrespondenceSet> corr;
  std::optional<Homography> h;
  try {
    if (!a.correspondences.empty()) {
      corr = correspondences_from_json(read_json_file(a.correspondences));
    }
    if (!a.homography.empty()) h = homography_from_json(read_json_file(a.homography));
  } catch (const Error& e) {
    throw Error(ErrorCode::IoError, e.what());
  }
  if (!h && corr) {
    try {
      h = estimate_homography_dlt(DltProblem::from(*corr));
    } catch (const Error&) {
    }
  }

  int width = a.width;
  int height = a.height;
  std::optional<RgbImage> background;
  if (!a.image.empty()) {
    background = read_rgb_png(a.image);
    width = background->width;
    height = background->height;
  }
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidConfig, "width/height: must be positive");

  const Overlay ov = build_overlay(h, corr, tpl, width, height);
  if (ext == ".svg") {
    write_text_file(a.out, to_svg(ov, a.image));
  } else {
    write_rgb_png(to_raster(ov, std::move(background)), a.out);
  }
  return kOk;
}

}  // namespace

void add_render(CLI::App& app, int& status) {
  auto args = std::make_shared<RenderArgs>();
  CLI::App* sub = app.add_subcommand("render", "Overlay of the projected template");
  sub->add_option("--homography", args->homography, "Homography JSON");
  sub->add_option("--correspondences", args->correspondences, "Correspondence JSON");
  sub->add_option("--image", args->image, "Background PNG");
  sub->add_option("--out", args->out, "Output .svg or .png")->required();
  sub->add_option("--template", args->template_path, "Template config JSON");
  sub->add_option("--width", args->width, "Canvas width without --image");
  sub->add_option("--height", args->height, "Canvas height without --image");
  sub->callback([args, &status] { status = run_render(*args); });
}

}  // namespace circlereg::cli
