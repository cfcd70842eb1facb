#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairplay {

enum class ErrorKind {
  kInvalidInput,
  kDomain,
  kDegenerateContext,
  kUnsupportedMethod,
  kInsufficientData,
  kParse,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library. The kind drives CLI exit codes and
// HTTP status mapping.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Elo points. Finite and strictly positive.
class EloRating {
 public:
  EloRating() = default;
  explicit EloRating(double value);

  double value() const noexcept { return value_; }

  friend auto operator<=>(const EloRating&, const EloRating&) = default;

 private:
  double value_ = 1500.0;
};

struct PlayerRecord {
  std::string id;
  std::string name;
  EloRating rating;

  friend bool operator==(const PlayerRecord&, const PlayerRecord&) = default;
};

// Points from one game, in [0, 1]. Played games are restricted to
// {0, 0.5, 1}; imputed games may take any value in the unit interval.
class GameScore {
 public:
  GameScore() = default;
  explicit GameScore(double value);

  static GameScore played(double value);

  double value() const noexcept { return value_; }
  bool is_result() const noexcept {
    return value_ == 0.0 || value_ == 0.5 || value_ == 1.0;
  }

  friend auto operator<=>(const GameScore&, const GameScore&) = default;

 private:
  double value_ = 0.0;
};

enum class Method {
  kForfeit,
  kAnnulment,
  kPureElo,
  kPurePerformance,
  kBayesBlup,
};

inline constexpr Method kAllMethods[] = {
    Method::kForfeit, Method::kAnnulment, Method::kPureElo,
    Method::kPurePerformance, Method::kBayesBlup};

// Labels: "forfeit", "annul", "elo", "performance", "bayes".
std::string_view to_string(Method method);
Method parse_method(std::string_view label);

}  // namespace fairplay
