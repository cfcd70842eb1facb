#pragma once

// Seeded Monte Carlo evaluation of the imputation policies by leave-one-out
// cross-validation over simulated round-robins.
//
// Two drivers produce the same report: run_grid() parallelises tournaments
// with OpenMP; run_grid_serial() is the single-threaded reference used by
// the tests. Per-tournament partial sums are reduced in tournament order, so
// both are bit-identical for any thread count.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fairplay/crosstable.hpp"
#include "fairplay/imputation.hpp"

namespace fairplay::mc {

enum class FieldShape { kNarrow, kWide };
enum class FideRule { kAnnul, kForfeit };

std::string_view to_string(FieldShape shape);
std::string_view to_string(FideRule rule);

inline constexpr int kFieldSize = 10;
inline constexpr int kRounds = kFieldSize - 1;
inline constexpr double kWithdrawnRating = 2750.0;

struct ScenarioSpec {
  FieldShape field = FieldShape::kNarrow;
  int timing = 5;        // games W completes before withdrawing
  double form_delta = 0; // Elo offset of W's true strength
  int tournaments = 1000;
  std::uint64_t seed = 0;

  // Annul below 50% of the schedule, forfeit at or above.
  FideRule fide_rule() const noexcept {
    return 2 * timing < kRounds ? FideRule::kAnnul : FideRule::kForfeit;
  }
};

struct GameModelParams {
  double base_draw_rate = 0.5;
  // Exponent on the closeness term 1 - 2|E - 0.5|.
  double draw_decay = 1.0;
};

struct OutcomeProbabilities {
  double win = 0.0;
  double draw = 0.0;
  double loss = 0.0;
};

// Win/draw/loss for A with E[score] equal to the Elo expectation.
OutcomeProbabilities outcome_probabilities(double rating_a, double rating_b,
                                           const GameModelParams& params);

// Counter-based stream: one engine per (seed, scenario, tournament).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t scenario,
            std::uint64_t tournament);

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Fixed 10-player rating vectors, ascending.
std::vector<EloRating> make_field(FieldShape shape);
// Index of the withdrawn player (rated kWithdrawnRating) in make_field().
std::size_t withdrawn_index(FieldShape shape);

double sample_game(double rating_a, double rating_b,
                   const GameModelParams& params, RngStream& rng);

// Circle-method round-robin for an even field. Entry r holds the pairings of
// round r+1. `fixed` keeps its slot; in round r it meets the r-th of the
// remaining players in field order.
std::vector<std::vector<std::pair<int, int>>> circle_schedule(int players,
                                                              int fixed);

struct SimulatedTournament {
  Crosstable table;
  std::size_t withdrawn = 0;
  // W's opponents in round order; the first spec.timing were played.
  std::vector<std::size_t> schedule;
};

SimulatedTournament simulate_tournament(const ScenarioSpec& spec,
                                        const GameModelParams& params,
                                        RngStream& rng);

enum class EvalMethod { kAnnul, kForfeit, kElo, kPerf, kBayes };
inline constexpr int kEvalMethods = 5;
std::string_view to_string(EvalMethod m);

struct HeldOutPrediction {
  std::size_t opponent = 0;
  double actual = 0.0;  // opponent's score vs W
  std::array<double, kEvalMethods> predicted{};
  std::array<double, kEvalMethods> error() const;
};

// One prediction per played game of W, each made from the other n-1 games.
// Throws kInsufficientData when W played fewer than two games.
std::vector<HeldOutPrediction> loocv_evaluate(const Crosstable& table,
                                              std::size_t withdrawn,
                                              double k = kDefaultPriorStrength);

struct MethodError {
  double sum_sq = 0.0;
  double sum = 0.0;
  long long count = 0;

  void add(double err) {
    sum_sq += err * err;
    sum += err;
    ++count;
  }
  void merge(const MethodError& o) {
    sum_sq += o.sum_sq;
    sum += o.sum;
    count += o.count;
  }
  double rmse() const;
  double bias() const;
};

struct ScenarioReport {
  ScenarioSpec spec;
  std::array<MethodError, kEvalMethods> errors;

  const MethodError& fide() const {
    return errors[static_cast<int>(spec.fide_rule() == FideRule::kAnnul
                                       ? EvalMethod::kAnnul
                                       : EvalMethod::kForfeit)];
  }
  const MethodError& of(EvalMethod m) const {
    return errors[static_cast<int>(m)];
  }
  // Minimal RMSE among FIDE (applied rule), Elo, Perf and Bayes.
  std::string winner() const;
};

struct GridConfig {
  std::uint64_t seed = 20260515;
  int tournaments = 1000;
  double k = kDefaultPriorStrength;
  GameModelParams game;
  std::vector<FieldShape> fields{FieldShape::kNarrow, FieldShape::kWide};
  std::vector<int> timings{3, 4, 5};
  std::vector<double> forms{-150.0, 0.0, 100.0};
};

struct Improvement {
  std::string label;
  double fide_rmse = 0.0;
  double bayes_rmse = 0.0;
  double elo_rmse = 0.0;
  double vs_fide = 0.0;  // 1 - bayes / fide
  double vs_elo = 0.0;   // 1 - bayes / elo
};

// Means of per-scenario RMSE and bias, as in the paper-style summary.
struct GridSummary {
  std::array<double, 4> overall_rmse{};  // FIDE, Elo, Perf, Bayes
  std::array<double, 4> overall_bias{};
  std::vector<Improvement> by_rule;
  std::vector<Improvement> by_form;
  double overall_improvement = 0.0;  // 1 - bayes / fide
};

struct GridReport {
  GridConfig config;
  std::vector<ScenarioReport> scenarios;
  GridSummary summary;
};

std::vector<ScenarioSpec> scenario_grid(const GridConfig& config);

ScenarioReport run_scenario(const ScenarioSpec& spec, std::uint64_t index,
                            const GridConfig& config);
ScenarioReport run_scenario_serial(const ScenarioSpec& spec,
                                   std::uint64_t index,
                                   const GridConfig& config);

GridReport run_grid(const GridConfig& config);
GridReport run_grid_serial(const GridConfig& config);
GridSummary summarize(const std::vector<ScenarioReport>& scenarios);

// Table layouts: RMSE by scenario, bias by scenario, summary panels, and the
// annulment-versus-forfeit comparison.
std::string rmse_table_csv(const GridReport& report);
std::string bias_table_csv(const GridReport& report);
std::string summary_csv(const GridReport& report);
std::string rule_comparison_csv(const GridReport& report);

std::string rmse_table_text(const GridReport& report);
std::string bias_table_text(const GridReport& report);
std::string summary_text(const GridReport& report);
std::string rule_comparison_text(const GridReport& report);

std::string summary_json(const GridReport& report);

}  // namespace fairplay::mc
