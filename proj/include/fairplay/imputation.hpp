#pragma once

// Estimators and imputation policies for games left unplayed when a player
// withdraws from a round-robin.
//
// Conventions: "opponent score" means the points the remaining player i
// receives against the withdrawn player W. All scores live on [0, 1].
//
// The opponent-specific predictor follows the random-effects model
//
//   Y_i = E_{i,W} + beta + eps_i,   Var(beta) = tau2, Var(eps_i) = sigma2,
//
// whose BLUP for an unplayed opponent i is
//
//   I_{i,W} = E_{i,W} + n/(n+k) * (1 - sbar_W - Ebar),   k = sigma2/tau2,
//
// with sbar_W the withdrawn player's mean score over the n played games and
// Ebar the mean Elo expectation of the opponents actually faced.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fairplay/crosstable.hpp"
#include "fairplay/types.hpp"

namespace fairplay {

inline constexpr double kDefaultPriorStrength = 3.0;
inline constexpr double kDefaultGameVariance = 0.25;
inline constexpr double kDefaultCredibleLevel = 0.95;

struct PlayedGame {
  PlayerRecord opponent;
  GameScore withdrawn_score;  // W's score in that game
};

// Everything the estimators need to know about the withdrawn player's
// completed games. Derived statistics are computed once at construction.
class WithdrawalContext {
 public:
  // Throws kDegenerateContext when `played` is empty and kInvalidInput when a
  // played score is not 0, 0.5 or 1 or W appears among its own opponents.
  WithdrawalContext(PlayerRecord withdrawn, std::vector<PlayedGame> played);

  const PlayerRecord& withdrawn() const noexcept { return withdrawn_; }
  const std::vector<PlayedGame>& played() const noexcept { return played_; }
  int n() const noexcept { return static_cast<int>(played_.size()); }
  double total_points() const noexcept { return total_points_; }
  double mean_score() const noexcept { return mean_score_; }
  double mean_played_expectation() const noexcept { return mean_expectation_; }
  // Mean rating of the opponents W actually faced; reference for theta0.
  EloRating mean_opponent_rating() const noexcept { return mean_rating_; }

  bool has_played(const PlayerRecord& opponent) const;

 private:
  PlayerRecord withdrawn_;
  std::vector<PlayedGame> played_;
  double total_points_ = 0.0;
  double mean_score_ = 0.0;
  double mean_expectation_ = 0.0;
  EloRating mean_rating_;
};

struct PriorSpec {
  double k = kDefaultPriorStrength;
  double theta0 = 0.5;

  // Throws kInvalidInput unless k is finite and positive and theta0 in (0,1).
  void validate() const;
};

struct BetaPosterior {
  double alpha = 1.0;
  double beta = 1.0;

  double mean() const noexcept { return alpha / (alpha + beta); }
  double variance() const noexcept {
    const double s = alpha + beta;
    return alpha * beta / (s * s * (s + 1.0));
  }
};

struct VarianceComponents {
  double sigma2 = kDefaultGameVariance;
  double tau2 = kDefaultGameVariance / kDefaultPriorStrength;

  static VarianceComponents from_prior(double k, double sigma2);
  double k() const noexcept { return sigma2 / tau2; }
};

struct CredibleInterval {
  double lo = 0.0;
  double hi = 1.0;
};

struct ImputationResult {
  PlayerRecord opponent;
  Method method = Method::kBayesBlup;
  GameScore score;
  double elo_expectation = 0.5;
  // w(n) * (1 - sbar_W - Ebar) for Bayes BLUP, zero otherwise.
  double adjustment = 0.0;
  // Score before clamping to [0, 1]; equals score.value() unless clamped.
  double unclamped = 0.0;
  std::optional<CredibleInterval> interval;
};

// Expected score of the player rated `player` against `withdrawn`:
// 1 / (1 + 10^((withdrawn - player) / 400)).
double elo_expectation(EloRating player, EloRating withdrawn);

// Prior scoring rate of W against a typical opponent rated `reference`.
double prior_theta0(EloRating withdrawn, EloRating reference);

// Conjugate update Beta(k theta0 + P, k (1 - theta0) + n - P). Draws enter as
// fractional points.
BetaPosterior beta_posterior(const PriorSpec& prior, double total_points,
                             int n);

// n / (n + k).
double blup_weight(int n, double k);

ImputationResult impute_bayes_blup(const WithdrawalContext& ctx,
                                   const PlayerRecord& opponent, double k);
ImputationResult impute_forfeit(const PlayerRecord& opponent);
ImputationResult impute_pure_elo(const PlayerRecord& withdrawn,
                                 const PlayerRecord& opponent);
ImputationResult impute_pure_performance(const WithdrawalContext& ctx,
                                         const PlayerRecord& opponent);
// Scoring rate of `opponent` over its played games not involving
// `withdrawn`; this is what annulment implicitly awards it.
ImputationResult impute_annulment_equivalent(const Crosstable& table,
                                             std::size_t withdrawn,
                                             std::size_t opponent);
// W's own imputed score against `opponent`: the complement of the BLUP.
ImputationResult impute_for_withdrawn(const WithdrawalContext& ctx,
                                      const PlayerRecord& opponent, double k);

// Var(beta | Y) = tau2 / (1 + n/k) with tau2 = sigma2 / k.
double posterior_variance(int n, double k, double sigma2);

// Two-sided normal quantile for a central credible level in [0, 1).
double normal_quantile_two_sided(double level);

CredibleInterval credible_interval(const ImputationResult& result, int n,
                                   double k, double sigma2, double level);

struct SensitivityRow {
  double k = 0.0;
  double weight = 0.0;
  std::vector<double> scores;  // aligned with the opponents argument
  double spread = 0.0;         // max - min over opponents
};

std::vector<SensitivityRow> sensitivity_sweep(
    const WithdrawalContext& ctx, std::span<const PlayerRecord> opponents,
    std::span<const double> k_values);

}  // namespace fairplay
