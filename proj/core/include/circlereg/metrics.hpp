#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "circlereg/correspondence.hpp"
#include "circlereg/projective.hpp"

namespace circlereg {

using NamePair = std::pair<std::string, std::string>;

/// Opposed circle keypoints through the center, leaving out the two points
/// on the halfway line.
std::vector<NamePair> default_audit_pairs();

struct PairDistance {
  std::string name;  // "first-second"
  double distance_px;
};

struct CollinearityAudit {
  std::vector<PairDistance> pairs;
  /// Pairs whose keypoints were not all present.
  std::vector<std::string> skipped;
  double mean = 0.0;
  double max = 0.0;
  double median = 0.0;
};

/// Distance in pixels from the center to the line through each opposed
/// pair. Throws MissingCenter or NoCompletePairs.
CollinearityAudit collinearity_audit(const std::map<std::string, Eigen::Vector2d>& keypoints,
                                     const std::vector<NamePair>& pairs = default_audit_pairs(),
                                     const std::string& center_name = "center");

/// Same audit on the image side of a derived set, with its opposed pairs.
CollinearityAudit collinearity_audit(const CorrespondenceSet& corr);

/// pair_name,distance_px rows followed by summary rows.
std::string audit_csv(const CollinearityAudit& audit);

struct TangentCheck {
  std::string name;
  /// |<l, m>| with l the unit vanishing line and m the unit meet of the two
  /// tangents; 0 when the meet lies on the line.
  double inconsistency;
};

struct TangentReport {
  std::vector<TangentCheck> pairs;
  double max = 0.0;
};

/// Tangents at the two points of a pair are images of parallel lines only
/// when the pair is a true diameter, so their meet must lie on the
/// vanishing line. Throws PointNotOnConic.
TangentReport tangent_consistency(const Conic& ellipse,
                                  const std::vector<std::pair<HomPoint2, HomPoint2>>& pairs,
                                  const HomLine2& vanishing_line);

/// Opposed pairs of a derived set as image points.
std::vector<std::pair<HomPoint2, HomPoint2>> derived_pairs(const CorrespondenceSet& corr);

/// Major- and minor-axis endpoints of the ellipse, the usual annotation
/// when the perspective is ignored.
std::vector<std::pair<HomPoint2, HomPoint2>> great_axis_pairs(const Conic& ellipse);

}  // namespace circlereg
