#include "fairplay/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fairplay::mc {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string form_label(double delta) {
  if (delta < 0) return "under";
  if (delta > 0) return "over";
  return "neutral";
}

std::string num(double v, int decimals = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  // Keep "-0.000000" out of reports.
  if (std::string(buf).find_first_not_of("-0.") == std::string::npos && buf[0] == '-') {
    return std::string(buf + 1);
  }
  return buf;
}

std::string signed_num(double v, int decimals) {
  std::string s = num(v, decimals);
  return s[0] == '-' ? s : "+" + s;
}

using Partial = std::array<MethodError, kEvalMethods>;

Partial evaluate_tournament(const ScenarioSpec& spec, std::uint64_t index, std::uint64_t t,
                            const GridConfig& config) {
  RngStream rng(spec.seed, index, t);
  const SimulatedTournament sim = simulate_tournament(spec, config.game, rng);
  Partial partial{};
  for (const auto& p : loocv_evaluate(sim.table, sim.withdrawn, config.k)) {
    const auto err = p.error();
    for (int m = 0; m < kEvalMethods; ++m) partial[m].add(err[m]);
  }
  return partial;
}

constexpr std::array<EvalMethod, 3> kSummaryMethods{EvalMethod::kElo, EvalMethod::kPerf,
                                                    EvalMethod::kBayes};

double mean_of(const std::vector<const ScenarioReport*>& rs, auto metric) {
  double s = 0.0;
  for (const auto* r : rs) s += metric(*r);
  return rs.empty() ? 0.0 : s / static_cast<double>(rs.size());
}

Improvement improvement(std::string label, const std::vector<const ScenarioReport*>& rs) {
  Improvement imp;
  imp.label = std::move(label);
  imp.fide_rmse = mean_of(rs, [](const ScenarioReport& r) { return r.fide().rmse(); });
  imp.bayes_rmse =
      mean_of(rs, [](const ScenarioReport& r) { return r.of(EvalMethod::kBayes).rmse(); });
  imp.elo_rmse = mean_of(rs, [](const ScenarioReport& r) { return r.of(EvalMethod::kElo).rmse(); });
  imp.vs_fide = imp.fide_rmse > 0 ? 1.0 - imp.bayes_rmse / imp.fide_rmse : 0.0;
  imp.vs_elo = imp.elo_rmse > 0 ? 1.0 - imp.bayes_rmse / imp.elo_rmse : 0.0;
  return imp;
}

}  // namespace

std::string_view to_string(FieldShape shape) {
  return shape == FieldShape::kNarrow ? "narrow" : "wide";
}

std::string_view to_string(FideRule rule) { return rule == FideRule::kAnnul ? "annul" : "forfeit"; }

std::string_view to_string(EvalMethod m) {
  switch (m) {
    case EvalMethod::kAnnul:
      return "annul";
    case EvalMethod::kForfeit:
      return "forfeit";
    case EvalMethod::kElo:
      return "elo";
    case EvalMethod::kPerf:
      return "perf";
    case EvalMethod::kBayes:
      return "bayes";
  }
  return "unknown";
}

OutcomeProbabilities outcome_probabilities(double rating_a, double rating_b,
                                           const GameModelParams& params) {
  const double e = elo_expectation(EloRating(rating_a), EloRating(rating_b));
  const double closeness = 1.0 - 2.0 * std::abs(e - 0.5);
  double draw = params.base_draw_rate * std::pow(closeness, params.draw_decay);
  draw = std::clamp(draw, 0.0, 2.0 * std::min(e, 1.0 - e));
  return {e - draw / 2.0, draw, 1.0 - e - draw / 2.0};
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t scenario, std::uint64_t tournament)
    : engine_(splitmix64(splitmix64(splitmix64(seed) ^ scenario) ^ tournament)) {}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::vector<EloRating> make_field(FieldShape shape) {
  static constexpr double kNarrow[kFieldSize] = {2725, 2738, 2742, 2745, 2748,
                                                 2750, 2753, 2757, 2762, 2790};
  static constexpr double kWide[kFieldSize] = {2540, 2640, 2680, 2700, 2720,
                                               2735, 2750, 2765, 2775, 2790};
  const double* src = shape == FieldShape::kNarrow ? kNarrow : kWide;
  std::vector<EloRating> field;
  field.reserve(kFieldSize);
  for (int i = 0; i < kFieldSize; ++i) field.emplace_back(src[i]);
  return field;
}

std::size_t withdrawn_index(FieldShape shape) {
  const auto field = make_field(shape);
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i].value() == kWithdrawnRating) return i;
  }
  throw Error(ErrorKind::kInvalidInput, "field has no withdrawn-player slot");
}

double sample_game(double rating_a, double rating_b, const GameModelParams& params,
                   RngStream& rng) {
  const auto p = outcome_probabilities(rating_a, rating_b, params);
  const double u = rng.uniform();
  if (u < p.win) return 1.0;
  if (u < p.win + p.draw) return 0.5;
  return 0.0;
}

std::vector<std::vector<std::pair<int, int>>> circle_schedule(int players, int fixed) {
  if (players < 2 || players % 2 != 0 || fixed < 0 || fixed >= players) {
    throw Error(ErrorKind::kInvalidInput, "circle method needs an even field");
  }
  std::vector<int> ring;
  for (int i = 0; i < players; ++i) {
    if (i != fixed) ring.push_back(i);
  }
  const int m = static_cast<int>(ring.size());
  std::vector<std::vector<std::pair<int, int>>> rounds(m);
  for (int r = 0; r < m; ++r) {
    rounds[r].emplace_back(fixed, ring[r]);
    for (int d = 1; d <= m / 2; ++d) {
      rounds[r].emplace_back(ring[(r + d) % m], ring[(r - d + m) % m]);
    }
  }
  return rounds;
}

SimulatedTournament simulate_tournament(const ScenarioSpec& spec, const GameModelParams& params,
                                        RngStream& rng) {
  const auto field = make_field(spec.field);
  const int w = static_cast<int>(withdrawn_index(spec.field));
  std::vector<PlayerRecord> players;
  players.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    players.push_back({"p" + std::to_string(i), "Player " + std::to_string(i + 1), field[i]});
  }

  SimulatedTournament sim{Crosstable(std::move(players)), static_cast<std::size_t>(w), {}};
  const auto rounds = circle_schedule(kFieldSize, w);
  for (int r = 0; r < static_cast<int>(rounds.size()); ++r) {
    for (auto [a, b] : rounds[r]) {
      if (a == w || b == w) {
        sim.schedule.push_back(static_cast<std::size_t>(a == w ? b : a));
        if (r >= spec.timing) continue;
      }
      const double ra = field[a].value() + (a == w ? spec.form_delta : 0.0);
      const double rb = field[b].value() + (b == w ? spec.form_delta : 0.0);
      sim.table.record(a, b, GameScore(sample_game(ra, rb, params, rng)), r + 1);
    }
  }
  return sim;
}

std::array<double, kEvalMethods> HeldOutPrediction::error() const {
  std::array<double, kEvalMethods> e{};
  for (int m = 0; m < kEvalMethods; ++m) e[m] = predicted[m] - actual;
  return e;
}

std::vector<HeldOutPrediction> loocv_evaluate(const Crosstable& table, std::size_t withdrawn,
                                              double k) {
  const PlayerRecord& w = table.player(withdrawn);
  std::vector<PlayedGame> played;
  std::vector<std::size_t> opponents;
  for (std::size_t j = 0; j < table.size(); ++j) {
    if (j == withdrawn) continue;
    if (auto r = table.result(withdrawn, j)) {
      played.push_back({table.player(j), GameScore(*r)});
      opponents.push_back(j);
    }
  }
  if (played.size() < 2) {
    throw Error(ErrorKind::kInsufficientData, "LOOCV needs at least two played games");
  }

  std::vector<HeldOutPrediction> out;
  out.reserve(played.size());
  std::vector<PlayedGame> training;
  training.reserve(played.size() - 1);
  for (std::size_t g = 0; g < played.size(); ++g) {
    training.clear();
    for (std::size_t h = 0; h < played.size(); ++h) {
      if (h != g) training.push_back(played[h]);
    }
    const WithdrawalContext ctx(w, training);
    const std::size_t j = opponents[g];
    const PlayerRecord& opp = table.player(j);

    HeldOutPrediction p;
    p.opponent = j;
    p.actual = 1.0 - played[g].withdrawn_score.value();
    p.predicted[static_cast<int>(EvalMethod::kAnnul)] =
        impute_annulment_equivalent(table, withdrawn, j).score.value();
    p.predicted[static_cast<int>(EvalMethod::kForfeit)] = impute_forfeit(opp).score.value();
    p.predicted[static_cast<int>(EvalMethod::kElo)] = impute_pure_elo(w, opp).score.value();
    p.predicted[static_cast<int>(EvalMethod::kPerf)] =
        impute_pure_performance(ctx, opp).score.value();
    p.predicted[static_cast<int>(EvalMethod::kBayes)] =
        impute_bayes_blup(ctx, opp, k).score.value();
    out.push_back(p);
  }
  return out;
}

double MethodError::rmse() const {
  return count > 0 ? std::sqrt(sum_sq / static_cast<double>(count)) : 0.0;
}

double MethodError::bias() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }

std::string ScenarioReport::winner() const {
  std::string best = "FIDE";
  double best_rmse = fide().rmse();
  for (auto m : kSummaryMethods) {
    if (of(m).rmse() < best_rmse) {
      best_rmse = of(m).rmse();
      best = m == EvalMethod::kElo ? "Elo" : m == EvalMethod::kPerf ? "Perf" : "Bayes";
    }
  }
  return best;
}

std::vector<ScenarioSpec> scenario_grid(const GridConfig& config) {
  if (config.tournaments < 1) {
    throw Error(ErrorKind::kInvalidInput, "tournaments per scenario must be positive");
  }
  std::vector<ScenarioSpec> specs;
  for (auto field : config.fields) {
    for (int timing : config.timings) {
      if (timing < 2 || timing > kRounds) {
        throw Error(ErrorKind::kInvalidInput, "timing must lie in [2, 9] for LOOCV");
      }
      for (double form : config.forms) {
        specs.push_back({field, timing, form, config.tournaments, config.seed});
      }
    }
  }
  return specs;
}

ScenarioReport run_scenario_serial(const ScenarioSpec& spec, std::uint64_t index,
                                   const GridConfig& config) {
  ScenarioReport report{spec, {}};
  for (int t = 0; t < spec.tournaments; ++t) {
    const Partial partial = evaluate_tournament(spec, index, static_cast<std::uint64_t>(t), config);
    for (int m = 0; m < kEvalMethods; ++m) report.errors[m].merge(partial[m]);
  }
  return report;
}

ScenarioReport run_scenario(const ScenarioSpec& spec, std::uint64_t index,
                            const GridConfig& config) {
  std::vector<Partial> partials(static_cast<std::size_t>(spec.tournaments));
#pragma omp parallel for schedule(static)
  for (int t = 0; t < spec.tournaments; ++t) {
    partials[static_cast<std::size_t>(t)] =
        evaluate_tournament(spec, index, static_cast<std::uint64_t>(t), config);
  }
  // Ordered reduction keeps the sums independent of the thread count.
  ScenarioReport report{spec, {}};
  for (const auto& partial : partials) {
    for (int m = 0; m < kEvalMethods; ++m) report.errors[m].merge(partial[m]);
  }
  return report;
}

GridSummary summarize(const std::vector<ScenarioReport>& scenarios) {
  GridSummary s;
  std::vector<const ScenarioReport*> all, annul, forfeit, under, neutral, over;
  for (const auto& r : scenarios) {
    all.push_back(&r);
    (r.spec.fide_rule() == FideRule::kAnnul ? annul : forfeit).push_back(&r);
    (r.spec.form_delta < 0 ? under : r.spec.form_delta > 0 ? over : neutral).push_back(&r);
  }
  s.overall_rmse[0] = mean_of(all, [](const ScenarioReport& r) { return r.fide().rmse(); });
  s.overall_bias[0] = mean_of(all, [](const ScenarioReport& r) { return r.fide().bias(); });
  for (std::size_t i = 0; i < kSummaryMethods.size(); ++i) {
    const EvalMethod m = kSummaryMethods[i];
    s.overall_rmse[i + 1] = mean_of(all, [m](const ScenarioReport& r) { return r.of(m).rmse(); });
    s.overall_bias[i + 1] = mean_of(all, [m](const ScenarioReport& r) { return r.of(m).bias(); });
  }
  s.overall_improvement = s.overall_rmse[0] > 0 ? 1.0 - s.overall_rmse[3] / s.overall_rmse[0] : 0.0;
  if (!annul.empty()) {
    s.by_rule.push_back(improvement("Annulment (" + std::to_string(annul.size()) + " scenarios)", annul));
  }
  if (!forfeit.empty()) {
    s.by_rule.push_back(improvement("Forfeit (" + std::to_string(forfeit.size()) + " scenarios)", forfeit));
  }
  if (!under.empty()) s.by_form.push_back(improvement("Underperforming", under));
  if (!neutral.empty()) s.by_form.push_back(improvement("Neutral", neutral));
  if (!over.empty()) s.by_form.push_back(improvement("Overperforming", over));
  return s;
}

GridReport run_grid(const GridConfig& config) {
  GridReport report{config, {}, {}};
  const auto specs = scenario_grid(config);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    report.scenarios.push_back(run_scenario(specs[i], i, config));
  }
  report.summary = summarize(report.scenarios);
  return report;
}

GridReport run_grid_serial(const GridConfig& config) {
  GridReport report{config, {}, {}};
  const auto specs = scenario_grid(config);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    report.scenarios.push_back(run_scenario_serial(specs[i], i, config));
  }
  report.summary = summarize(report.scenarios);
  return report;
}

std::string rmse_table_csv(const GridReport& report) {
  std::ostringstream out;
  out << "field,timing,fide_rule,form,fide,elo,perf,bayes,winner\n";
  for (const auto& r : report.scenarios) {
    out << to_string(r.spec.field) << ',' << r.spec.timing << ',' << to_string(r.spec.fide_rule())
        << ',' << form_label(r.spec.form_delta) << ',' << num(r.fide().rmse());
    for (auto m : kSummaryMethods) out << ',' << num(r.of(m).rmse());
    out << ',' << r.winner() << '\n';
  }
  return out.str();
}

std::string bias_table_csv(const GridReport& report) {
  std::ostringstream out;
  out << "field,timing,fide_rule,form,fide,elo,perf,bayes\n";
  for (const auto& r : report.scenarios) {
    out << to_string(r.spec.field) << ',' << r.spec.timing << ',' << to_string(r.spec.fide_rule())
        << ',' << form_label(r.spec.form_delta) << ',' << num(r.fide().bias());
    for (auto m : kSummaryMethods) out << ',' << num(r.of(m).bias());
    out << '\n';
  }
  return out.str();
}

std::string summary_csv(const GridReport& report) {
  const auto& s = report.summary;
  static constexpr const char* kNames[4] = {"FIDE", "Elo", "Perf", "Bayes"};
  std::ostringstream out;
  out << "panel,label,metric,value\n";
  for (int i = 0; i < 4; ++i) {
    out << "A," << kNames[i] << ",rmse," << num(s.overall_rmse[i]) << '\n';
    out << "A," << kNames[i] << ",bias," << num(s.overall_bias[i]) << '\n';
  }
  out << "A,Bayes,improvement_vs_fide," << num(s.overall_improvement) << '\n';
  for (const auto& imp : s.by_rule) {
    out << "B," << imp.label << ",fide_rmse," << num(imp.fide_rmse) << '\n';
    out << "B," << imp.label << ",bayes_rmse," << num(imp.bayes_rmse) << '\n';
    out << "B," << imp.label << ",improvement_vs_fide," << num(imp.vs_fide) << '\n';
  }
  for (const auto& imp : s.by_form) {
    out << "C," << imp.label << ",improvement_vs_fide," << num(imp.vs_fide) << '\n';
    out << "C," << imp.label << ",improvement_vs_elo," << num(imp.vs_elo) << '\n';
  }
  return out.str();
}

std::string rule_comparison_csv(const GridReport& report) {
  std::ostringstream out;
  out << "timing,fide_rule,field,form,annul,forfeit,bayes,best\n";
  for (int timing : report.config.timings) {
    for (const auto& r : report.scenarios) {
      if (r.spec.timing != timing) continue;
      const double a = r.of(EvalMethod::kAnnul).rmse();
      const double f = r.of(EvalMethod::kForfeit).rmse();
      const double b = r.of(EvalMethod::kBayes).rmse();
      const char* best = b <= a && b <= f ? "Bayes" : a <= f ? "Annul" : "Forfeit";
      out << timing << ',' << to_string(r.spec.fide_rule()) << ',' << to_string(r.spec.field)
          << ',' << form_label(r.spec.form_delta) << ',' << num(a) << ',' << num(f) << ','
          << num(b) << ',' << best << '\n';
    }
  }
  return out.str();
}

std::string rmse_table_text(const GridReport& report) {
  std::ostringstream out;
  char line[160];
  out << "LOOCV RMSE by scenario (lower is better)\n";
  std::snprintf(line, sizeof line, "%-7s %-6s %-8s %-8s %7s %7s %7s %7s  %s\n", "Field", "Timing",
                "Rule", "Form", "FIDE", "Elo", "Perf", "Bayes", "Winner");
  out << line;
  for (const auto& r : report.scenarios) {
    std::snprintf(line, sizeof line, "%-7s n=%-4d %-8s %-8s %7.3f %7.3f %7.3f %7.3f  %s\n",
                  std::string(to_string(r.spec.field)).c_str(), r.spec.timing,
                  std::string(to_string(r.spec.fide_rule())).c_str(),
                  form_label(r.spec.form_delta).c_str(), r.fide().rmse(),
                  r.of(EvalMethod::kElo).rmse(), r.of(EvalMethod::kPerf).rmse(),
                  r.of(EvalMethod::kBayes).rmse(), r.winner().c_str());
    out << line;
  }
  return out.str();
}

std::string bias_table_text(const GridReport& report) {
  std::ostringstream out;
  char line[160];
  out << "LOOCV average bias by scenario (closer to 0 is better)\n";
  std::snprintf(line, sizeof line, "%-7s %-6s %-8s %-8s %7s %7s %7s %7s\n", "Field", "Timing",
                "Rule", "Form", "FIDE", "Elo", "Perf", "Bayes");
  out << line;
  for (const auto& r : report.scenarios) {
    std::snprintf(line, sizeof line, "%-7s n=%-4d %-8s %-8s %7s %7s %7s %7s\n",
                  std::string(to_string(r.spec.field)).c_str(), r.spec.timing,
                  std::string(to_string(r.spec.fide_rule())).c_str(),
                  form_label(r.spec.form_delta).c_str(), signed_num(r.fide().bias(), 3).c_str(),
                  signed_num(r.of(EvalMethod::kElo).bias(), 3).c_str(),
                  signed_num(r.of(EvalMethod::kPerf).bias(), 3).c_str(),
                  signed_num(r.of(EvalMethod::kBayes).bias(), 3).c_str());
    out << line;
  }
  return out.str();
}

std::string summary_text(const GridReport& report) {
  const auto& s = report.summary;
  static constexpr const char* kNames[4] = {"FIDE (actual rule applied)", "Pure Elo",
                                            "Pure Performance", "Bayesian"};
  std::ostringstream out;
  char line[160];
  out << "Panel A: overall performance (mean over scenarios)\n";
  for (int i = 0; i < 4; ++i) {
    std::snprintf(line, sizeof line, "  %-28s RMSE %.3f  bias %s\n", kNames[i], s.overall_rmse[i],
                  signed_num(s.overall_bias[i], 3).c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "  Bayesian improvement over FIDE: %+.1f%%\n",
                100.0 * s.overall_improvement);
  out << line << "Panel B: Bayesian improvement by FIDE rule\n";
  for (const auto& imp : s.by_rule) {
    std::snprintf(line, sizeof line, "  %-26s FIDE RMSE %.3f  improvement %+.1f%%\n",
                  imp.label.c_str(), imp.fide_rmse, 100.0 * imp.vs_fide);
    out << line;
  }
  out << "Panel C: Bayesian improvement by player form\n";
  for (const auto& imp : s.by_form) {
    std::snprintf(line, sizeof line, "  %-16s vs FIDE %+.1f%%  vs Elo %+.1f%%\n", imp.label.c_str(),
                  100.0 * imp.vs_fide, 100.0 * imp.vs_elo);
    out << line;
  }
  return out.str();
}

std::string rule_comparison_text(const GridReport& report) {
  std::ostringstream out;
  char line[160];
  out << "RMSE of both FIDE rules and Bayes in every scenario (* = rule FIDE applies)\n";
  for (int timing : report.config.timings) {
    out << "n=" << timing << '\n';
    for (const auto& r : report.scenarios) {
      if (r.spec.timing != timing) continue;
      const bool annul = r.spec.fide_rule() == FideRule::kAnnul;
      const double a = r.of(EvalMethod::kAnnul).rmse();
      const double f = r.of(EvalMethod::kForfeit).rmse();
      const double b = r.of(EvalMethod::kBayes).rmse();
      std::snprintf(line, sizeof line, "  %-7s %-8s annul %.3f%s  forfeit %.3f%s  bayes %.3f\n",
                    std::string(to_string(r.spec.field)).c_str(),
                    form_label(r.spec.form_delta).c_str(), a, annul ? "*" : " ", f,
                    annul ? " " : "*", b);
      out << line;
    }
  }
  return out.str();
}

std::string summary_json(const GridReport& report) {
  nlohmann::json doc;
  doc["seed"] = report.config.seed;
  doc["tournamentsPerScenario"] = report.config.tournaments;
  doc["k"] = report.config.k;
  auto& scenarios = doc["scenarios"] = nlohmann::json::array();
  for (const auto& r : report.scenarios) {
    nlohmann::json row;
    row["field"] = to_string(r.spec.field);
    row["timing"] = r.spec.timing;
    row["formDelta"] = r.spec.form_delta;
    row["fideRule"] = to_string(r.spec.fide_rule());
    for (int m = 0; m < kEvalMethods; ++m) {
      row["rmse"][std::string(to_string(static_cast<EvalMethod>(m)))] = r.errors[m].rmse();
      row["bias"][std::string(to_string(static_cast<EvalMethod>(m)))] = r.errors[m].bias();
    }
    row["winner"] = r.winner();
    scenarios.push_back(std::move(row));
  }
  const auto& s = report.summary;
  static constexpr const char* kNames[4] = {"fide", "elo", "perf", "bayes"};
  for (int i = 0; i < 4; ++i) {
    doc["overall"][kNames[i]] = {{"rmse", s.overall_rmse[i]}, {"bias", s.overall_bias[i]}};
  }
  doc["overallImprovement"] = s.overall_improvement;
  for (const auto& imp : s.by_rule) {
    doc["byRule"].push_back({{"label", imp.label}, {"fideRmse", imp.fide_rmse},
                             {"bayesRmse", imp.bayes_rmse}, {"improvement", imp.vs_fide}});
  }
  for (const auto& imp : s.by_form) {
    doc["byForm"].push_back(
        {{"label", imp.label}, {"vsFide", imp.vs_fide}, {"vsElo", imp.vs_elo}});
  }
  return doc.dump(2);
}

}  // namespace fairplay::mc
