#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairplay/crosstable.hpp"
#include "fairplay/imputation.hpp"
#include "fairplay/types.hpp"

namespace fairplay {

struct ImputedGame {
  std::string opponent_id;
  double score = 0.0;

  friend bool operator==(const ImputedGame&, const ImputedGame&) = default;
};

struct StandingsRow {
  PlayerRecord player;
  double played_points = 0.0;
  double imputed_points = 0.0;
  double total = 0.0;
  int rank = 0;
  double sonneborn_berger = 0.0;
  bool withdrawn = false;
  std::vector<ImputedGame> imputed_games;

  friend bool operator==(const StandingsRow&, const StandingsRow&) = default;
};

enum class ReportingPolicy {
  kEarnedOnlyFootnoted,
  kRoundHalfPoint,
  kOneDecimalTotal,
};

// Labels: "earned", "half", "decimal".
std::string_view to_string(ReportingPolicy policy);
ReportingPolicy parse_reporting_policy(std::string_view label);

// Per-opponent imputations for the withdrawn player's unplayed games, with
// the statistics that produced them. Withdrawal before any game leaves
// `context` empty; Bayes BLUP then falls back to pure Elo and says so in
// `warnings`.
struct WithdrawalRuling {
  std::size_t withdrawn = 0;
  Method method = Method::kBayesBlup;
  double k = kDefaultPriorStrength;
  double sigma2 = kDefaultGameVariance;
  std::optional<WithdrawalContext> context;
  std::vector<std::size_t> unplayed;  // indices of unplayed opponents
  std::vector<ImputationResult> imputations;  // aligned with `unplayed`
  std::vector<std::string> warnings;
};

WithdrawalRuling rule_withdrawal(const Crosstable& table,
                                 std::string_view withdrawn_id, Method method,
                                 double k = kDefaultPriorStrength,
                                 double sigma2 = kDefaultGameVariance,
                                 double level = kDefaultCredibleLevel);

// Sonneborn-Berger over games not involving `exclude`. Opponent totals are
// likewise counted without `exclude`'s games.
std::vector<double> sonneborn_berger(
    const Crosstable& table, std::optional<std::size_t> exclude = std::nullopt);

// Ranked standings after scoring the withdrawn player's unplayed games with
// `method`. Annulment drops W's row and games; every other method keeps W's
// row (flagged) and credits W with the complement of each imputed score.
// Ordering: total, then Sonneborn-Berger, then rating, then id.
std::vector<StandingsRow> apply_policy(const Crosstable& table,
                                       std::string_view withdrawn_id,
                                       Method method,
                                       double k = kDefaultPriorStrength);
std::vector<StandingsRow> standings_from_ruling(const Crosstable& table,
                                                const WithdrawalRuling& ruling);

// Plain standings with no withdrawal handling.
std::vector<StandingsRow> rank_standings(const Crosstable& table);

// Half-point rounding for imputed per-game scores; exact quarter points round
// to 0.5.
double round_half_point(double score);

std::string render_standings(const std::vector<StandingsRow>& rows,
                             ReportingPolicy policy);

// CSV: player,rating,<one column per player id>,played,imputed,total,sb,rank.
// Cells hold the row player's score; imputed cells carry a "*" suffix.
std::string export_crosstable(const Crosstable& table,
                              const std::vector<StandingsRow>& rows);

struct ParsedCrosstable {
  Crosstable table;
  std::vector<StandingsRow> rows;  // in rank order, as exported
};

// Inverse of export_crosstable. Throws kParse with the row/column on error.
ParsedCrosstable parse_crosstable_csv(std::string_view csv);

}  // namespace fairplay
