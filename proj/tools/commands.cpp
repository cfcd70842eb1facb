#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "fairplay/montecarlo.hpp"
#include "fairplay/service.hpp"
#include "fairplay/standings.hpp"
#include "fairplay/tournament_file.hpp"
#include "json.hpp"

namespace fairplay::cli {
namespace {

namespace fs = std::filesystem;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Writes every file to a hidden temporary first, then renames them into
// place, so an interrupted run leaves no half-written outputs.
void write_all(const fs::path& dir, const std::map<std::string, std::string>& files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::pair<fs::path, fs::path>> staged;
  for (const auto& [name, content] : files) {
    const fs::path tmp = dir / ("." + name + ".tmp");
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
      for (const auto& s : staged) fs::remove(s.first, ec);
      fs::remove(tmp, ec);
      throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    }
    staged.emplace_back(tmp, dir / name);
  }
  for (const auto& [tmp, final_path] : staged) {
    fs::rename(tmp, final_path, ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot rename into " + final_path.string());
  }
}

struct ImputeOptions {
  std::string file;
  std::string method = "bayes";
  std::optional<double> k;
  double level = kDefaultCredibleLevel;
  std::string report = "decimal";
  std::string format = "text";
  std::string out_dir;
};

void print_imputation_table(const TournamentFile& file, const WithdrawalRuling& ruling,
                            double level, std::ostream& out) {
  const auto& table = file.table;
  const PlayerRecord& w = table.player(ruling.withdrawn);
  const auto& ctx = ruling.context;
  const double k = ruling.k;

  out << (file.name.empty() ? std::string("Tournament") : file.name) << ": " << w.name << " ("
      << fmt("%.0f", w.rating.value()) << ") withdrew after " << (ctx ? ctx->n() : 0)
      << " game(s)";
  if (ctx) {
    out << ", scoring " << fmt("%.1f", ctx->total_points()) << " (mean "
        << fmt("%.3f", ctx->mean_score()) << ")\n";
    const double theta0 = prior_theta0(w.rating, ctx->mean_opponent_rating());
    const BetaPosterior post = beta_posterior({k, theta0}, ctx->total_points(), ctx->n());
    const double wt = blup_weight(ctx->n(), k);
    out << "  theta0 " << fmt("%.3f", theta0) << " (opponents' mean rating "
        << fmt("%.1f", ctx->mean_opponent_rating().value()) << "), posterior Beta("
        << fmt("%.3f", post.alpha) << ", " << fmt("%.3f", post.beta) << "), mean "
        << fmt("%.3f", post.mean()) << "\n";
    out << "  Ebar " << fmt("%.3f", ctx->mean_played_expectation()) << ", w(" << ctx->n()
        << ") = " << fmt("%.3f", wt) << ", adjustment "
        << fmt("%+.3f", wt * (1.0 - ctx->mean_score() - ctx->mean_played_expectation()))
        << ", k = " << fmt("%g", k) << "\n";
  } else {
    out << "\n";
  }
  for (const auto& w_msg : ruling.warnings) out << "warning: " << w_msg << "\n";

  if (ruling.unplayed.empty()) {
    out << "\nNothing to impute: every scheduled game was played.\n";
    return;
  }
  std::size_t width = 6;
  for (std::size_t j : ruling.unplayed) width = std::max(width, table.player(j).name.size());
  char line[256];
  const std::string imputed_head = "Imputed (" + std::string(to_string(ruling.method)) + ")";
  const std::string ci_head = fmt("%.0f%% CI", 100.0 * level);
  std::snprintf(line, sizeof line, "\n%-*s %6s %9s %12s %16s %12s  %s\n", static_cast<int>(width),
                "Player", "Elo", "Elo Exp.", "Performance", imputed_head.c_str(), "Traditional",
                ci_head.c_str());
  out << line;
  for (std::size_t u = 0; u < ruling.unplayed.size(); ++u) {
    const std::size_t j = ruling.unplayed[u];
    const PlayerRecord& opp = table.player(j);
    std::string imputed = "-";
    std::string ci;
    if (ruling.method == Method::kAnnulment) {
      if (table.games_played(j, ruling.withdrawn) > 0) {
        imputed = fmt("%.3f", impute_annulment_equivalent(table, ruling.withdrawn, j).score.value());
      }
    } else {
      const auto& r = ruling.imputations[u];
      imputed = fmt("%.3f", r.score.value());
      if (r.interval) ci = "[" + fmt("%.3f", r.interval->lo) + ", " + fmt("%.3f", r.interval->hi) + "]";
    }
    const std::string perf = ctx ? fmt("%.3f", 1.0 - ctx->mean_score()) : "-";
    std::snprintf(line, sizeof line, "%-*s %6.0f %9.3f %12s %16s %12.3f  %s\n",
                  static_cast<int>(width), opp.name.c_str(), opp.rating.value(),
                  elo_expectation(opp.rating, w.rating), perf.c_str(), imputed.c_str(), 1.0,
                  ci.c_str());
    out << line;
  }
}

int cmd_impute(const ImputeOptions& o, bool with_table, std::ostream& out) {
  const TournamentFile file = load_tournament(o.file);
  const Method method = parse_method(o.method);
  const ReportingPolicy policy = parse_reporting_policy(o.report);
  const double k = o.k.value_or(file.k);
  const auto ruling = rule_withdrawal(file.table, file.withdrawn, method, k, file.sigma2, o.level);
  const auto rows = standings_from_ruling(file.table, ruling);
  const std::string csv = export_crosstable(file.table, rows);

  if (o.format == "csv") {
    out << csv;
  } else {
    if (with_table) print_imputation_table(file, ruling, o.level, out);
    out << "\nStandings (" << to_string(method) << ", " << to_string(policy) << "):\n"
        << render_standings(rows, policy);
  }
  if (!o.out_dir.empty()) write_all(o.out_dir, {{"standings.csv", csv}});
  return kExitOk;
}

int cmd_sensitivity(const std::string& path, std::vector<double> ks, std::ostream& out) {
  const TournamentFile file = load_tournament(path);
  if (ks.empty()) ks = {1, 2, 3, 4, 5};
  for (double k : ks) {
    if (!(k > 0.0)) throw Error(ErrorKind::kInvalidInput, "k values must be positive");
  }
  const auto ruling =
      rule_withdrawal(file.table, file.withdrawn, Method::kBayesBlup, ks.front(), file.sigma2);
  if (!ruling.context) {
    throw Error(ErrorKind::kDegenerateContext, "withdrawn player completed no games");
  }
  std::vector<PlayerRecord> opponents;
  for (std::size_t j : ruling.unplayed) opponents.push_back(file.table.player(j));
  const auto rows = sensitivity_sweep(*ruling.context, opponents, ks);

  std::ostringstream head;
  char cell[64];
  std::snprintf(cell, sizeof cell, "%-6s%8s", "k", "w(n)");
  head << cell;
  for (const auto& o : opponents) {
    std::snprintf(cell, sizeof cell, " %12s", o.name.c_str());
    head << cell;
  }
  std::snprintf(cell, sizeof cell, "%9s", "Spread");
  head << cell;
  out << head.str() << "\n";
  for (const auto& r : rows) {
    out << fmt("%-6g", r.k) << fmt("%8.3f", r.weight);
    for (double s : r.scores) out << fmt(" %12.3f", s);
    out << fmt("%9.3f", r.spread) << "\n";
  }
  return kExitOk;
}

struct SimulateOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> tournaments;
  std::string out_dir = "simulation";
  std::string format = "csv";
};

mc::GridConfig load_grid_config(const SimulateOptions& o, std::string& out_dir, std::string& format) {
  mc::GridConfig config;
  out_dir = o.out_dir;
  format = o.format;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw Error(ErrorKind::kIo, "cannot open " + o.config_path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kParse, o.config_path + ": " + e.what());
    }
    try {
      config.seed = doc.value("seed", config.seed);
      config.tournaments = doc.value("tournamentsPerScenario", config.tournaments);
      config.k = doc.value("k", config.k);
      config.game.base_draw_rate = doc.value("baseDrawRate", config.game.base_draw_rate);
      config.game.draw_decay = doc.value("drawDecay", config.game.draw_decay);
      out_dir = doc.value("out", out_dir);
      format = doc.value("format", format);
      if (doc.contains("timings")) config.timings = doc["timings"].get<std::vector<int>>();
      if (doc.contains("forms")) config.forms = doc["forms"].get<std::vector<double>>();
      if (doc.contains("fields")) {
        config.fields.clear();
        for (const auto& f : doc["fields"].get<std::vector<std::string>>()) {
          if (f == "narrow") {
            config.fields.push_back(mc::FieldShape::kNarrow);
          } else if (f == "wide") {
            config.fields.push_back(mc::FieldShape::kWide);
          } else {
            throw Error(ErrorKind::kParse, "fields: unknown field shape '" + f + "'");
          }
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kParse, o.config_path + ": " + e.what());
    }
  }
  if (o.seed) config.seed = *o.seed;
  if (o.tournaments) config.tournaments = *o.tournaments;
  if (const char* env = std::getenv("FAIRPLAY_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw Error(ErrorKind::kInvalidInput, "FAIRPLAY_SEED must be an unsigned integer");
    config.seed = v;
  }
  if (config.tournaments < 1) {
    throw Error(ErrorKind::kInvalidInput, "tournaments per scenario must be positive");
  }
  if (format != "csv" && format != "text") {
    throw Error(ErrorKind::kInvalidInput, "format must be csv or text");
  }
  return config;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  std::string out_dir, format;
  const mc::GridConfig config = load_grid_config(o, out_dir, format);
  const mc::GridReport report = mc::run_grid(config);

  std::map<std::string, std::string> files;
  if (format == "csv") {
    files["rmse_by_scenario.csv"] = mc::rmse_table_csv(report);
    files["bias_by_scenario.csv"] = mc::bias_table_csv(report);
    files["summary.csv"] = mc::summary_csv(report);
    files["rule_comparison.csv"] = mc::rule_comparison_csv(report);
  } else {
    files["rmse_by_scenario.txt"] = mc::rmse_table_text(report);
    files["bias_by_scenario.txt"] = mc::bias_table_text(report);
    files["summary.txt"] = mc::summary_text(report);
    files["rule_comparison.txt"] = mc::rule_comparison_text(report);
  }
  files["summary.json"] = mc::summary_json(report);
  write_all(out_dir, files);

  out << "seed " << config.seed << ", " << config.tournaments << " tournaments x "
      << report.scenarios.size() << " scenarios -> " << out_dir << "\n\n"
      << mc::rmse_table_text(report) << "\n"
      << mc::summary_text(report);
  return kExitOk;
}

std::atomic<service::Server*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

int cmd_serve(service::ServerConfig config, std::ostream& out) {
  const std::string host = config.host;
  service::Server server(std::move(config));
  server.bind();
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  out << "listening on http://" << host << ":" << server.port() << std::endl;
  server.listen();
  g_server = nullptr;
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnsupportedMethod:
      return kExitUsage;
    case ErrorKind::kParse:
    case ErrorKind::kInvalidInput:
    case ErrorKind::kDomain:
    case ErrorKind::kDegenerateContext:
    case ErrorKind::kInsufficientData:
      return kExitData;
    case ErrorKind::kIo:
      return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scores unplayed round-robin games after a withdrawal", "fairplay"};
  app.require_subcommand(1);

  ImputeOptions impute;
  auto* impute_cmd = app.add_subcommand("impute", "Impute the withdrawn player's unplayed games");
  impute_cmd->add_option("file", impute.file, "Tournament JSON file")->required();
  impute_cmd->add_option("--method", impute.method, "forfeit|annul|elo|performance|bayes");
  impute_cmd->add_option("--k", impute.k, "Prior strength (default from file, else 3)");
  impute_cmd->add_option("--level", impute.level, "Credible level for intervals");
  impute_cmd->add_option("--report", impute.report, "earned|half|decimal");
  impute_cmd->add_option("--format", impute.format, "text|csv")
      ->check(CLI::IsMember({"text", "csv"}));
  impute_cmd->add_option("--out", impute.out_dir, "Also write standings.csv into this directory");

  ImputeOptions report;
  auto* report_cmd = app.add_subcommand("report", "Print standings under one policy");
  report_cmd->add_option("file", report.file, "Tournament JSON file")->required();
  report_cmd->add_option("--method", report.method, "forfeit|annul|elo|performance|bayes");
  report_cmd->add_option("--k", report.k, "Prior strength");
  report_cmd->add_option("--report", report.report, "earned|half|decimal");
  report_cmd->add_option("--format", report.format, "text|csv")
      ->check(CLI::IsMember({"text", "csv"}));
  report_cmd->add_option("--out", report.out_dir, "Also write standings.csv into this directory");

  std::string sens_file;
  std::vector<double> k_values;
  auto* sens_cmd = app.add_subcommand("sensitivity", "Sweep the prior strength k");
  sens_cmd->add_option("file", sens_file, "Tournament JSON file")->required();
  sens_cmd->add_option("--k-values", k_values, "Comma-separated k values (default 1,2,3,4,5)")
      ->delimiter(',');

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the Monte Carlo LOOCV scenario grid");
  sim_cmd->add_option("--config", sim.config_path, "JSON config file");
  sim_cmd->add_option("--seed", sim.seed, "Global seed (FAIRPLAY_SEED overrides)");
  sim_cmd->add_option("--n-per-scenario", sim.tournaments, "Tournaments per scenario");
  sim_cmd->add_option("--out", sim.out_dir, "Output directory");
  sim_cmd->add_option("--format", sim.format, "csv|text");

  service::ServerConfig serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the JSON API (and UI bundle if present)");
  serve_cmd->add_option("--port", serve.port, "Port to bind");
  serve_cmd->add_option("--host", serve.host, "Address to bind");
  serve_cmd->add_option("--ui", serve.ui_dir, "Static UI bundle directory");
  serve_cmd->add_option("--out", serve.simulation_dir, "Simulation output directory to expose");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*impute_cmd) return cmd_impute(impute, true, out);
    if (*report_cmd) return cmd_impute(report, false, out);
    if (*sens_cmd) return cmd_sensitivity(sens_file, k_values, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*serve_cmd) return cmd_serve(serve, out);
  } catch (const Error& e) {
    err << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace fairplay::cli
