#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace circlereg {

enum class ErrorCode {
  // projective core
  InvalidArgument,
  DegenerateJoin,
  DegenerateMeet,
  ZeroPolar,
  SingularConic,
  SingularHomography,
  // conic
  NonPositiveRadius,
  PointNotOnConic,
  InsufficientPoints,
  DegenerateConfiguration,
  NotAnEllipse,
  // field template
  InvalidConfig,
  // correspondence
  CenterOnConic,
  NoIntersection,
  MissingCenter,
  MissingLine,
  NotNested,
  NoValidEigenvector,
  AmbiguousPrior,
  // homography
  RankDeficient,
  IllConditioned,
  DegeneratePose,
  PointAtInfinity,
  // synthcam
  ExhaustedRetries,
  CircleNotVisible,
  // detect_ingest
  SchemaError,
  ClassAbsent,
  TooFewCandidates,
  ConsensusFailure,
  InsufficientEvidence,
  // metrics
  NoCompletePairs,
  // io
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace circlereg
