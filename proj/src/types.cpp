#include "fairplay/types.hpp"

#include <cmath>
#include <string>

namespace fairplay {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput:
      return "invalid-input";
    case ErrorKind::kDomain:
      return "domain";
    case ErrorKind::kDegenerateContext:
      return "degenerate-context";
    case ErrorKind::kUnsupportedMethod:
      return "unsupported-method";
    case ErrorKind::kInsufficientData:
      return "insufficient-data";
    case ErrorKind::kParse:
      return "parse";
    case ErrorKind::kIo:
      return "io";
  }
  return "unknown";
}

EloRating::EloRating(double value) : value_(value) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw Error(ErrorKind::kInvalidInput,
                "rating must be finite and positive, got " +
                    std::to_string(value));
  }
}

GameScore::GameScore(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorKind::kInvalidInput,
                "game score must lie in [0, 1], got " + std::to_string(value));
  }
}

GameScore GameScore::played(double value) {
  GameScore s(value);
  if (!s.is_result()) {
    throw Error(ErrorKind::kInvalidInput,
                "played game score must be 0, 0.5 or 1, got " +
                    std::to_string(value));
  }
  return s;
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kForfeit:
      return "forfeit";
    case Method::kAnnulment:
      return "annul";
    case Method::kPureElo:
      return "elo";
    case Method::kPurePerformance:
      return "performance";
    case Method::kBayesBlup:
      return "bayes";
  }
  return "unknown";
}

Method parse_method(std::string_view label) {
  for (Method m : kAllMethods) {
    if (to_string(m) == label) return m;
  }
  throw Error(ErrorKind::kUnsupportedMethod,
              "unknown method '" + std::string(label) +
                  "' (expected forfeit|annul|elo|performance|bayes)");
}

}  // namespace fairplay
