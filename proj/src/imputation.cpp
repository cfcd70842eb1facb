#include "fairplay/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace fairplay {
namespace {

void require_positive_k(double k) {
  if (!std::isfinite(k) || k <= 0.0) {
    throw Error(ErrorKind::kInvalidInput,
                "prior strength k must be finite and positive, got " + std::to_string(k));
  }
}

void require_unplayed(const WithdrawalContext& ctx, const PlayerRecord& opponent) {
  if (opponent.id == ctx.withdrawn().id) {
    throw Error(ErrorKind::kDomain, "cannot impute the withdrawn player's game against itself");
  }
  if (ctx.has_played(opponent)) {
    throw Error(ErrorKind::kDomain,
                "'" + opponent.id + "' already played the withdrawn player");
  }
}

}  // namespace

WithdrawalContext::WithdrawalContext(PlayerRecord withdrawn, std::vector<PlayedGame> played)
    : withdrawn_(std::move(withdrawn)), played_(std::move(played)) {
  if (played_.empty()) {
    throw Error(ErrorKind::kDegenerateContext,
                "withdrawn player '" + withdrawn_.id + "' completed no games");
  }
  double rating_sum = 0.0;
  double expectation_sum = 0.0;
  for (const auto& g : played_) {
    if (!g.withdrawn_score.is_result()) {
      throw Error(ErrorKind::kInvalidInput, "played score vs '" + g.opponent.id +
                                                "' must be 0, 0.5 or 1");
    }
    if (g.opponent.id == withdrawn_.id) {
      throw Error(ErrorKind::kInvalidInput, "withdrawn player listed as its own opponent");
    }
    total_points_ += g.withdrawn_score.value();
    rating_sum += g.opponent.rating.value();
    expectation_sum += elo_expectation(g.opponent.rating, withdrawn_.rating);
  }
  const double n = static_cast<double>(played_.size());
  mean_score_ = total_points_ / n;
  mean_expectation_ = expectation_sum / n;
  mean_rating_ = EloRating(rating_sum / n);
}

bool WithdrawalContext::has_played(const PlayerRecord& opponent) const {
  return std::any_of(played_.begin(), played_.end(),
                     [&](const PlayedGame& g) { return g.opponent.id == opponent.id; });
}

void PriorSpec::validate() const {
  require_positive_k(k);
  if (!(theta0 > 0.0 && theta0 < 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "theta0 must lie in (0, 1)");
  }
}

VarianceComponents VarianceComponents::from_prior(double k, double sigma2) {
  require_positive_k(k);
  if (!std::isfinite(sigma2) || sigma2 <= 0.0) {
    throw Error(ErrorKind::kInvalidInput, "sigma2 must be finite and positive");
  }
  return {sigma2, sigma2 / k};
}

double elo_expectation(EloRating player, EloRating withdrawn) {
  return 1.0 / (1.0 + std::pow(10.0, (withdrawn.value() - player.value()) / 400.0));
}

double prior_theta0(EloRating withdrawn, EloRating reference) {
  return elo_expectation(withdrawn, reference);
}

BetaPosterior beta_posterior(const PriorSpec& prior, double total_points, int n) {
  prior.validate();
  if (n < 1) {
    throw Error(ErrorKind::kInvalidInput, "posterior needs at least one game");
  }
  if (!(total_points >= 0.0 && total_points <= n)) {
    throw Error(ErrorKind::kInvalidInput, "total points must lie in [0, n]");
  }
  return {prior.k * prior.theta0 + total_points,
          prior.k * (1.0 - prior.theta0) + n - total_points};
}

double blup_weight(int n, double k) {
  require_positive_k(k);
  if (n < 0) throw Error(ErrorKind::kInvalidInput, "game count must be non-negative");
  return n / (n + k);
}

ImputationResult impute_bayes_blup(const WithdrawalContext& ctx,
                                   const PlayerRecord& opponent, double k) {
  require_unplayed(ctx, opponent);
  const double w = blup_weight(ctx.n(), k);
  ImputationResult r;
  r.opponent = opponent;
  r.method = Method::kBayesBlup;
  r.elo_expectation = elo_expectation(opponent.rating, ctx.withdrawn().rating);
  r.adjustment = w * (1.0 - ctx.mean_score() - ctx.mean_played_expectation());
  r.unclamped = r.elo_expectation + r.adjustment;
  r.score = GameScore(std::clamp(r.unclamped, 0.0, 1.0));
  return r;
}

ImputationResult impute_forfeit(const PlayerRecord& opponent) {
  ImputationResult r;
  r.opponent = opponent;
  r.method = Method::kForfeit;
  r.score = GameScore(1.0);
  r.unclamped = 1.0;
  return r;
}

ImputationResult impute_pure_elo(const PlayerRecord& withdrawn, const PlayerRecord& opponent) {
  ImputationResult r;
  r.opponent = opponent;
  r.method = Method::kPureElo;
  r.elo_expectation = elo_expectation(opponent.rating, withdrawn.rating);
  r.unclamped = r.elo_expectation;
  r.score = GameScore(r.elo_expectation);
  return r;
}

ImputationResult impute_pure_performance(const WithdrawalContext& ctx,
                                         const PlayerRecord& opponent) {
  ImputationResult r;
  r.opponent = opponent;
  r.method = Method::kPurePerformance;
  r.elo_expectation = elo_expectation(opponent.rating, ctx.withdrawn().rating);
  r.unclamped = 1.0 - ctx.mean_score();
  r.score = GameScore(r.unclamped);
  return r;
}

ImputationResult impute_annulment_equivalent(const Crosstable& table, std::size_t withdrawn,
                                             std::size_t opponent) {
  const int games = table.games_played(opponent, withdrawn);
  if (games == 0) {
    throw Error(ErrorKind::kDegenerateContext,
                "'" + table.player(opponent).id +
                    "' has no games outside the withdrawn player's");
  }
  ImputationResult r;
  r.opponent = table.player(opponent);
  r.method = Method::kAnnulment;
  r.elo_expectation =
      elo_expectation(table.player(opponent).rating, table.player(withdrawn).rating);
  r.unclamped = table.points(opponent, withdrawn) / games;
  r.score = GameScore(r.unclamped);
  return r;
}

ImputationResult impute_for_withdrawn(const WithdrawalContext& ctx,
                                      const PlayerRecord& opponent, double k) {
  ImputationResult r = impute_bayes_blup(ctx, opponent, k);
  r.elo_expectation = 1.0 - r.elo_expectation;
  r.adjustment = -r.adjustment;
  r.unclamped = 1.0 - r.unclamped;
  r.score = GameScore(1.0 - r.score.value());
  return r;
}

double posterior_variance(int n, double k, double sigma2) {
  require_positive_k(k);
  if (n < 0) throw Error(ErrorKind::kInvalidInput, "game count must be non-negative");
  if (!std::isfinite(sigma2) || sigma2 <= 0.0) {
    throw Error(ErrorKind::kInvalidInput, "sigma2 must be finite and positive");
  }
  const double tau2 = sigma2 / k;
  return tau2 / (1.0 + n / k);
}

double normal_quantile_two_sided(double level) {
  if (!(level >= 0.0 && level < 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "credible level must lie in [0, 1)");
  }
  if (level == 0.0) return 0.0;
  return boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
}

CredibleInterval credible_interval(const ImputationResult& result, int n, double k,
                                   double sigma2, double level) {
  if (result.method != Method::kBayesBlup) {
    throw Error(ErrorKind::kUnsupportedMethod,
                "credible intervals exist only for Bayes BLUP imputations");
  }
  const double half = normal_quantile_two_sided(level) * std::sqrt(posterior_variance(n, k, sigma2));
  const double s = result.score.value();
  return {std::clamp(s - half, 0.0, 1.0), std::clamp(s + half, 0.0, 1.0)};
}

std::vector<SensitivityRow> sensitivity_sweep(const WithdrawalContext& ctx,
                                              std::span<const PlayerRecord> opponents,
                                              std::span<const double> k_values) {
  for (double k : k_values) require_positive_k(k);
  std::vector<SensitivityRow> rows;
  rows.reserve(k_values.size());
  for (double k : k_values) {
    SensitivityRow row;
    row.k = k;
    row.weight = blup_weight(ctx.n(), k);
    for (const auto& opp : opponents) {
      row.scores.push_back(impute_bayes_blup(ctx, opp, k).score.value());
    }
    if (!row.scores.empty()) {
      const auto [lo, hi] = std::minmax_element(row.scores.begin(), row.scores.end());
      row.spread = *hi - *lo;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace fairplay
