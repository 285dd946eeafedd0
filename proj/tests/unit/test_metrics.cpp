#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "circlereg/metrics.hpp"
#include "fixtures.hpp"

namespace circlereg {
namespace {

namespace kn = keypoint_names;

std::map<std::string, Eigen::Vector2d> square_keypoints() {
  const double d = 100 / std::sqrt(2.0);
  return {{"center", {500, 500}},
          {kn::kLeft, {400, 500}},
          {kn::kRight, {600, 500}},
          {kn::kFarLeft, {500 - d, 500 - d}},
          {kn::kNearRight, {500 + d, 500 + d}},
          {kn::kFarRight, {500 + d, 500 - d}},
          {kn::kNearLeft, {500 - d, 500 + d}},
          {kn::kHalfwayFar, {500, 400}},
          {kn::kHalfwayNear, {530, 600}}};  // off, but never audited
}

CorrespondenceSet derived_set(const testing::CircleFixture& f, const FieldTemplate& tpl) {
  return extend_green_points(derive_case1(testing::case1_observation(f), tpl,
                                          CameraPrior::from_homography(f.h, {0, 0})),
                             f.ellipse, tpl);
}

TEST(Metrics, CollinearKeypointsScoreZero) {
  const CollinearityAudit a = collinearity_audit(square_keypoints());
  ASSERT_EQ(a.pairs.size(), 3u);
  EXPECT_TRUE(a.skipped.empty());
  EXPECT_LT(a.max, 1e-12);
}

TEST(Metrics, DisplacedCenterDistance) {
  auto kp = square_keypoints();
  kp["center"] += Eigen::Vector2d(0, 5);  // perpendicular to the left-right pair
  const CollinearityAudit a = collinearity_audit(kp);
  EXPECT_NEAR(a.pairs[0].distance_px, 5.0, 1e-12);
  EXPECT_EQ(a.pairs[0].name, "circle_left-circle_right");
  EXPECT_NEAR(a.max, 5.0, 1e-12);
  EXPECT_NEAR(a.pairs[1].distance_px, 5.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(a.median, 5.0 / std::sqrt(2.0), 1e-12);
}

TEST(Metrics, MissingKeypointSkipsPair) {
  auto kp = square_keypoints();
  kp.erase(kn::kNearRight);
  const CollinearityAudit a = collinearity_audit(kp);
  EXPECT_EQ(a.pairs.size(), 2u);
  ASSERT_EQ(a.skipped.size(), 1u);
  EXPECT_EQ(a.skipped[0], "circle_far_left-circle_near_right");
  EXPECT_NE(audit_csv(a).find("summary_skipped,1"), std::string::npos);
}

TEST(Metrics, AuditErrors) {
  auto kp = square_keypoints();
  kp.erase("center");
  try {
    collinearity_audit(kp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingCenter);
  }
  try {
    collinearity_audit({{"center", {0, 0}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoCompletePairs);
  }
}

TEST(Metrics, AuditCsvLayout) {
  auto kp = square_keypoints();
  kp["center"] += Eigen::Vector2d(0, 5);
  const std::string csv = audit_csv(collinearity_audit(kp));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "pair_name,distance_px");
  EXPECT_NE(csv.find("circle_left-circle_right,5.000000000e+00\n"), std::string::npos);
  EXPECT_NE(csv.find("summary_max,5.000000000e+00\n"), std::string::npos);
}

TEST(Metrics, DerivedPairsAreCollinear) {
  const FieldTemplate tpl = standard_template();
  std::mt19937_64 rng(81);
  for (int i = 0; i < 100; ++i) {
    const CollinearityAudit a = collinearity_audit(derived_set(testing::make_fixture(rng, tpl), tpl));
    EXPECT_EQ(a.pairs.size(), 4u);
    EXPECT_LT(a.max, 1e-7);
  }
}

TEST(Metrics, DerivedTangentsMeetOnVanishingLine) {
  const FieldTemplate tpl = standard_template();
  std::mt19937_64 rng(82);
  for (int i = 0; i < 100; ++i) {
    const testing::CircleFixture f = testing::make_fixture(rng, tpl);
    const CorrespondenceSet s = derived_set(f, tpl);
    const TangentReport r = tangent_consistency(f.ellipse, derived_pairs(s), *s.vanishing_line);
    EXPECT_EQ(r.pairs.size(), 4u);
    EXPECT_LT(r.max, 1e-6);
  }
}

TEST(Metrics, GreatAxisPairsAreInconsistentUnderPerspective) {
  const FieldTemplate tpl = standard_template();
  std::mt19937_64 rng(83);
  int inconsistent = 0;
  for (int i = 0; i < 100; ++i) {
    const testing::CircleFixture f = testing::make_fixture(rng, tpl);
    const HomLine2 l = vanishing_line_from_center(f.ellipse, f.center);
    const TangentReport r = tangent_consistency(f.ellipse, great_axis_pairs(f.ellipse), l);
    inconsistent += r.max > 1e-6 ? 1 : 0;
  }
  EXPECT_GE(inconsistent, 95);
}

TEST(Metrics, FrontoParallelViewMakesBothConsistent) {
  const Conic e = circle_conic({960, 540}, 300);
  const HomLine2 l = vanishing_line_from_center(e, HomPoint2(960, 540, 1));
  EXPECT_LT(tangent_consistency(e, great_axis_pairs(e), l).max, 1e-12);
  const FieldTemplate tpl = standard_template();
  CircleObservation obs(e);
  obs.set_imaged_center(HomPoint2(960, 540, 1));
  obs.set_support_line({"halfway", HomLine2(1, 0, -960)});
  const CorrespondenceSet s = extend_green_points(derive_case1(obs, tpl), e, tpl);
  EXPECT_LT(tangent_consistency(e, derived_pairs(s), l).max, 1e-12);
}

TEST(Metrics, TangentCheckNeedsPointsOnConic) {
  const Conic e = circle_conic({0, 0}, 1);
  try {
    tangent_consistency(e, {{HomPoint2(0.5, 0, 1), HomPoint2(-1, 0, 1)}}, HomLine2::at_infinity());
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::PointNotOnConic);
  }
}

}  // namespace
}  // namespace circlereg
