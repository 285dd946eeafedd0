#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "circlereg/homography.hpp"
#include "circlereg/io.hpp"
#include "circlereg/synthcam.hpp"
#include "fixtures.hpp"

namespace circlereg {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;  // stdout and stderr together
};

CliRun run(const std::string& args) {
  const std::string cmd = std::string(CIRCLEREG_CLI_PATH) + " " + args + " 2>&1";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("circlereg_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// A sampled central view and its exact detections.
struct Scene {
  FieldTemplate tpl = standard_template();
  CameraSample cam;
  Homography h = Homography::identity();

  explicit Scene(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    cam = sample_camera(rng, {}, tpl);
    h = camera_to_homography(cam);
  }

  json detection(bool ellipse, bool center, bool halfway) const {
    json j = {{"image_size", {1920, 1080}}, {"keypoints", json::array()}, {"lines", json::array()}};
    if (center) {
      const Eigen::Vector2d c = project(h, {0, 0});
      j["keypoints"].push_back({{"name", "center"}, {"xy", {c.x(), c.y()}}, {"confidence", 0.9}});
    }
    if (ellipse) {
      json pts = json::array();
      for (const auto& p : testing::project_circle_points(h, tpl.center_circle(), 90)) {
        if (cam.in_image(p)) pts.push_back({p.x(), p.y()});
      }
      j["lines"].push_back({{"name", "center_circle"}, {"points", pts}});
    }
    if (halfway) {
      json pts = json::array();
      for (double y = -34; y <= 34; y += 0.5) {
        const Eigen::Vector3d x = h.matrix() * Eigen::Vector3d(0, y, 1);
        if (x.z() <= 0) continue;
        const Eigen::Vector2d p = x.head<2>() / x.z();
        if (cam.in_image(p)) pts.push_back({p.x(), p.y()});
      }
      j["lines"].push_back({{"name", "halfway"}, {"points", pts}});
    }
    return j;
  }
};

TEST(Cli, SimulateWritesOneRowPerTrial) {
  const fs::path dir = scratch("sim");
  const CliRun r = run("simulate --cameras 100 --sigma 0:25:5 --target ellipse --seed 7 --out " +
                    q(dir / "a"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string csv = slurp(dir / "a" / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 601);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sigma,target,camera_id,seed,case,mre_px,status");
  EXPECT_TRUE(fs::exists(dir / "a" / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "trials" / "sigma25_cam099.json"));

  const json cfg = read_json_file(dir / "a" / "run_config.json");
  EXPECT_EQ(cfg["cameras"], 100);
  EXPECT_EQ(cfg["seed"], 7);

  const json trial = read_json_file(dir / "a" / "trials" / "sigma0_cam000.json");
  EXPECT_EQ(trial["status"], "ok");
  EXPECT_LT(trial["mre_px"].get<double>(), 1e-6);
  EXPECT_EQ(trial["ground_truth"]["convention"], "image_from_world");
  EXPECT_EQ(trial["estimate"]["h"].size(), 9u);
  EXPECT_TRUE(trial.contains("config"));
}

TEST(Cli, SimulateIsDeterministic) {
  const fs::path dir = scratch("simdet");
  const std::string args = "simulate --cameras 15 --sigma 0:10:5 --target center --seed 3 ";
  ASSERT_EQ(run(args + "--threads 1 --out " + q(dir / "a")).code, 0);
  ASSERT_EQ(run(args + "--threads 4 --out " + q(dir / "b")).code, 0);
  for (const char* f : {"sweep.csv", "summary.csv"}) {
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  // Trial dumps record the thread count but are otherwise identical.
  json ta = read_json_file(dir / "a" / "trials" / "sigma5_cam007.json");
  json tb = read_json_file(dir / "b" / "trials" / "sigma5_cam007.json");
  EXPECT_EQ(ta["config"]["threads"], 1);
  ta["config"].erase("threads");
  tb["config"].erase("threads");
  EXPECT_EQ(ta.dump(), tb.dump());
}

TEST(Cli, SimulateRejectsZeroCameras) {
  const CliRun r = run("simulate --cameras 0 --out " + q(scratch("zero")));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("cameras"), std::string::npos) << r.out;
}

TEST(Cli, SimulateConfigErrors) {
  const fs::path dir = scratch("simcfg");
  EXPECT_EQ(run("simulate --sigma 5:1:1 --out " + q(dir)).code, 2);
  EXPECT_EQ(run("simulate --target sideways --out " + q(dir)).code, 2);
  EXPECT_EQ(run("simulate --config " + q(dir / "missing.json") + " --out " + q(dir)).code, 1);
  EXPECT_EQ(run("simulate --bogus").code, 2);
  EXPECT_EQ(run("").code, 2);
}

TEST(Cli, DeriveCase1GivesEightPointsAndEightLines) {
  const fs::path dir = scratch("derive1");
  const Scene s(11);
  write_json_file(dir / "det.json", s.detection(true, true, true));
  const CliRun r = run("derive --detections " + q(dir / "det.json") + " --out " + q(dir / "corr.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = read_json_file(dir / "corr.json");
  EXPECT_EQ(j["case"], "case1");
  EXPECT_EQ(j["points"].size(), 8u);
  EXPECT_EQ(j["lines"].size(), 8u);
  EXPECT_LT(j["collinearity_max_px"].get<double>(), 1e-6);
  const CorrespondenceSet corr = correspondences_from_json(j);
  for (const auto& p : corr.points) {
    EXPECT_LT(testing::pixel_distance(p.image, transform(s.h, p.world)), 1e-6) << p.name;
  }
}

TEST(Cli, DeriveMaskRoutesToCase3) {
  const fs::path dir = scratch("derive3");
  const Scene s(12);
  // Thick marking so the rasterized ring gives clean edges.
  const FieldTemplate thick = standard_template({.thickness = 0.6});
  write_mask_png(rasterize_ring_mask(s.h, thick, 1920, 1080, 4), dir / "mask.png");
  json det = s.detection(false, false, true);
  det["mask_path"] = "mask.png";
  det["mask_class_map"] = {{"center_circle", 4}};
  write_json_file(dir / "det.json", det);
  write_json_file(dir / "tpl.json", to_json(thick.config()));
  const CliRun r = run("derive --detections " + q(dir / "det.json") + " --template " +
                    q(dir / "tpl.json") + " --out " + q(dir / "corr.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = read_json_file(dir / "corr.json");
  EXPECT_EQ(j["case"], "case3");
  EXPECT_EQ(j["edge"], "inner");
  EXPECT_GE(j["attempts"].size(), 2u);
  EXPECT_GT(j["concentric"]["inner_inliers"].get<int>(), 6);
}

TEST(Cli, DeriveWithNothingUsableExits3) {
  const fs::path dir = scratch("derive0");
  write_json_file(dir / "det.json", Scene(13).detection(false, false, false));
  const CliRun r = run("derive --detections " + q(dir / "det.json") + " --out " + q(dir / "c.json"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("case1"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("case3"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(dir / "c.json"));
}

TEST(Cli, DeriveInputErrors) {
  const fs::path dir = scratch("derive_err");
  EXPECT_EQ(run("derive --detections " + q(dir / "none.json") + " --out " + q(dir / "c.json")).code, 1);
  write_json_file(dir / "det.json", json{{"image_size", {10, 10}}, {"keypoints", 3}, {"lines", json::array()}});
  EXPECT_EQ(run("derive --detections " + q(dir / "det.json") + " --out " + q(dir / "c.json")).code, 1);
  write_json_file(dir / "ok.json", Scene(14).detection(true, true, true));
  EXPECT_EQ(run("derive --case 7 --detections " + q(dir / "ok.json") + " --out " + q(dir / "c.json")).code, 2);
}

TEST(Cli, CalibrateNoiseFreeCorrespondences) {
  const fs::path dir = scratch("calib");
  const Scene s(15);
  write_json_file(dir / "det.json", s.detection(true, true, true));
  write_json_file(dir / "gt.json", to_json(s.h));
  ASSERT_EQ(run("derive --detections " + q(dir / "det.json") + " --out " + q(dir / "corr.json")).code, 0);
  const CliRun r = run("calibrate --correspondences " + q(dir / "corr.json") + " --gt " +
                    q(dir / "gt.json") + " --out " + q(dir / "h.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = read_json_file(dir / "h.json");
  EXPECT_LT(j["metrics"]["mre_px"].get<double>(), 1e-6);
  EXPECT_GT(j["metrics"]["n_scored_points"].get<int>(), 0);
  EXPECT_EQ(j["refine"], false);
  EXPECT_EQ(j["n_points"], 8);
  EXPECT_NE(r.out.find("mre_px="), std::string::npos);

  ASSERT_EQ(run("calibrate --refine --correspondences " + q(dir / "corr.json") + " --gt " +
                q(dir / "gt.json") + " --out " + q(dir / "h2.json")).code, 0);
  const json k = read_json_file(dir / "h2.json");
  EXPECT_EQ(k["refine"], true);
  EXPECT_EQ(k["config"]["refine"], true);
  EXPECT_LT(k["metrics"]["mre_px"].get<double>(), 1e-6);

  const CliRun e = run("evaluate --gt " + q(dir / "gt.json") + " --estimate " + q(dir / "h.json") +
                    " --out " + q(dir / "m.json"));
  ASSERT_EQ(e.code, 0) << e.out;
  EXPECT_LT(read_json_file(dir / "m.json")["mre_px"].get<double>(), 1e-6);
}

TEST(Cli, CalibrateCollinearPointsExit4) {
  const fs::path dir = scratch("calib_bad");
  json corr = {{"case", "case1"}, {"points", json::array()}, {"lines", json::array()}};
  for (int i = 0; i < 3; ++i) {
    corr["points"].push_back(
        {{"name", "p" + std::to_string(i)}, {"image", {10.0 * i, 5.0, 1}}, {"world", {i, 0, 1}}});
  }
  write_json_file(dir / "corr.json", corr);
  const CliRun r = run("calibrate --correspondences " + q(dir / "corr.json") + " --out " + q(dir / "h.json"));
  EXPECT_EQ(r.code, 4) << r.out;
}

TEST(Cli, EvaluateKnownShift) {
  const fs::path dir = scratch("eval");
  const Scene s(16);
  Eigen::Matrix3d t = Eigen::Matrix3d::Identity();
  t(1, 2) = 3.0;
  write_json_file(dir / "gt.json", to_json(s.h));
  write_json_file(dir / "est.json", to_json(Homography(t * s.h.matrix())));
  const CliRun r = run("evaluate --gt " + q(dir / "gt.json") + " --estimate " + q(dir / "est.json"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex("mre_px=([0-9.e+-]+)")));
  EXPECT_NEAR(std::stod(m[1]), 3.0, 1e-9);
  EXPECT_EQ(run("evaluate --gt " + q(dir / "gt.json") + " --estimate " + q(dir / "x.json")).code, 1);
}

TEST(Cli, RenderIdentityCircle) {
  const fs::path dir = scratch("render_id");
  write_json_file(dir / "h.json", to_json(Homography::identity()));
  const CliRun r = run("render --homography " + q(dir / "h.json") + " --width 200 --height 200 --out " +
                    q(dir / "o.svg"));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string svg = slurp(dir / "o.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("<ellipse class=\"center_circle\" cx=\"0.0000\" cy=\"0.0000\" rx=\"9.1500\" ry=\"9.1500\""),
            std::string::npos)
      << svg.substr(0, 2000);
}

TEST(Cli, RenderDerivedPointsMatchProjectedKeypoints) {
  const fs::path dir = scratch("render_pts");
  const Scene s(17);
  write_json_file(dir / "det.json", s.detection(true, true, true));
  ASSERT_EQ(run("derive --detections " + q(dir / "det.json") + " --out " + q(dir / "corr.json")).code, 0);
  const std::string args = "render --correspondences " + q(dir / "corr.json") + " --width 1920 --height 1080 --out ";
  ASSERT_EQ(run(args + q(dir / "a.svg")).code, 0);
  ASSERT_EQ(run(args + q(dir / "b.svg")).code, 0);
  const std::string svg = slurp(dir / "a.svg");
  EXPECT_EQ(svg, slurp(dir / "b.svg"));

  // Every overlaid derived point sits on the projection of its template point.
  const CorrespondenceSet corr = correspondences_from_json(read_json_file(dir / "corr.json"));
  const std::regex re("data-name=\"([a-z_]+)\" cx=\"([-0-9.]+)\" cy=\"([-0-9.]+)\"");
  int seen = 0;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    const std::string name = (*it)[1];
    const PointPair* p = corr.point(name);
    if (!p) continue;
    const Eigen::Vector2d drawn(std::stod((*it)[2]), std::stod((*it)[3]));
    EXPECT_LT((drawn - project(s.h, p->world.euclidean())).norm(), 1e-3) << name;
    ++seen;
  }
  EXPECT_EQ(seen, 8);

  ASSERT_EQ(run(args + q(dir / "o.png")).code, 0);
  const RgbImage png = read_rgb_png(dir / "o.png");
  EXPECT_EQ(png.width, 1920);
  EXPECT_EQ(png.height, 1080);
}

TEST(Cli, RenderUnreadableInputExit1) {
  const fs::path dir = scratch("render_bad");
  EXPECT_EQ(run("render --homography " + q(dir / "none.json") + " --out " + q(dir / "o.svg")).code, 1);
}

}  // namespace
}  // namespace circlereg
