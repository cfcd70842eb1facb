#include "fairplay/standings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <system_error>

namespace fairplay {
namespace {

constexpr double kTieEps = 1e-9;

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

bool ranks_before(const StandingsRow& a, const StandingsRow& b) {
  if (std::abs(a.total - b.total) > kTieEps) return a.total > b.total;
  if (std::abs(a.sonneborn_berger - b.sonneborn_berger) > kTieEps) {
    return a.sonneborn_berger > b.sonneborn_berger;
  }
  if (a.player.rating != b.player.rating) return a.player.rating > b.player.rating;
  return a.player.id < b.player.id;
}

bool tied(const StandingsRow& a, const StandingsRow& b) {
  return std::abs(a.total - b.total) <= kTieEps &&
         std::abs(a.sonneborn_berger - b.sonneborn_berger) <= kTieEps &&
         a.player.rating == b.player.rating;
}

void assign_ranks(std::vector<StandingsRow>& rows) {
  std::sort(rows.begin(), rows.end(), ranks_before);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].rank = (i > 0 && tied(rows[i], rows[i - 1])) ? rows[i - 1].rank
                                                         : static_cast<int>(i) + 1;
  }
}

ImputationResult elo_fallback_for_bayes(const PlayerRecord& withdrawn,
                                        const PlayerRecord& opponent, double k,
                                        double sigma2, double level) {
  ImputationResult r = impute_pure_elo(withdrawn, opponent);
  r.method = Method::kBayesBlup;
  r.interval = credible_interval(r, 0, k, sigma2, level);
  return r;
}

}  // namespace

std::string_view to_string(ReportingPolicy policy) {
  switch (policy) {
    case ReportingPolicy::kEarnedOnlyFootnoted:
      return "earned";
    case ReportingPolicy::kRoundHalfPoint:
      return "half";
    case ReportingPolicy::kOneDecimalTotal:
      return "decimal";
  }
  return "unknown";
}

ReportingPolicy parse_reporting_policy(std::string_view label) {
  for (auto p : {ReportingPolicy::kEarnedOnlyFootnoted, ReportingPolicy::kRoundHalfPoint,
                 ReportingPolicy::kOneDecimalTotal}) {
    if (to_string(p) == label) return p;
  }
  throw Error(ErrorKind::kInvalidInput, "unknown report policy '" + std::string(label) +
                                            "' (expected earned|half|decimal)");
}

WithdrawalRuling rule_withdrawal(const Crosstable& table, std::string_view withdrawn_id,
                                 Method method, double k, double sigma2, double level) {
  WithdrawalRuling ruling;
  ruling.withdrawn = table.index_of(withdrawn_id);
  ruling.method = method;
  ruling.k = k;
  ruling.sigma2 = sigma2;
  VarianceComponents::from_prior(k, sigma2);  // validates both

  const std::size_t w = ruling.withdrawn;
  const PlayerRecord& withdrawn = table.player(w);
  std::vector<PlayedGame> played;
  for (std::size_t j = 0; j < table.size(); ++j) {
    if (j == w) continue;
    if (auto r = table.result(w, j)) {
      played.push_back({table.player(j), GameScore::played(*r)});
    } else {
      ruling.unplayed.push_back(j);
    }
  }
  if (!played.empty()) ruling.context.emplace(withdrawn, std::move(played));

  if (!ruling.context && !ruling.unplayed.empty()) {
    if (method == Method::kPurePerformance) {
      throw Error(ErrorKind::kDegenerateContext,
                  "'" + withdrawn.id + "' completed no games; pure performance is undefined");
    }
    if (method == Method::kBayesBlup) {
      ruling.warnings.push_back(
          "degenerate-context: '" + withdrawn.id +
          "' completed no games, so w(0)=0 and Bayes BLUP reduces to pure Elo; "
          "FIDE regulations annul the results of a player who completes fewer than "
          "50% of the games");
    }
  }

  for (std::size_t j : ruling.unplayed) {
    const PlayerRecord& opp = table.player(j);
    switch (method) {
      case Method::kForfeit:
        ruling.imputations.push_back(impute_forfeit(opp));
        break;
      case Method::kAnnulment:
        // Nothing is awarded; the games disappear from the table.
        break;
      case Method::kPureElo:
        ruling.imputations.push_back(impute_pure_elo(withdrawn, opp));
        break;
      case Method::kPurePerformance:
        ruling.imputations.push_back(impute_pure_performance(*ruling.context, opp));
        break;
      case Method::kBayesBlup:
        if (ruling.context) {
          ImputationResult r = impute_bayes_blup(*ruling.context, opp, k);
          r.interval = credible_interval(r, ruling.context->n(), k, sigma2, level);
          ruling.imputations.push_back(std::move(r));
        } else {
          ruling.imputations.push_back(elo_fallback_for_bayes(withdrawn, opp, k, sigma2, level));
        }
        break;
    }
  }
  return ruling;
}

std::vector<double> sonneborn_berger(const Crosstable& table, std::optional<std::size_t> exclude) {
  const std::size_t n = table.size();
  std::vector<double> totals(n);
  for (std::size_t i = 0; i < n; ++i) totals[i] = table.points(i, exclude);
  std::vector<double> sb(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (exclude && i == *exclude) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (exclude && j == *exclude) continue;
      const auto r = table.result(i, j);
      if (!r) continue;
      if (*r == 1.0) {
        sb[i] += totals[j];
      } else if (*r == 0.5) {
        sb[i] += 0.5 * totals[j];
      }
    }
  }
  return sb;
}

std::vector<StandingsRow> rank_standings(const Crosstable& table) {
  const auto sb = sonneborn_berger(table);
  std::vector<StandingsRow> rows;
  rows.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    StandingsRow row;
    row.player = table.player(i);
    row.played_points = table.points(i);
    row.total = row.played_points;
    row.sonneborn_berger = sb[i];
    rows.push_back(std::move(row));
  }
  assign_ranks(rows);
  return rows;
}

std::vector<StandingsRow> standings_from_ruling(const Crosstable& table,
                                                const WithdrawalRuling& ruling) {
  const std::size_t w = ruling.withdrawn;
  if (ruling.method == Method::kAnnulment) {
    return rank_standings(table.without(w));
  }
  const auto sb = sonneborn_berger(table, w);
  std::vector<StandingsRow> rows(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    rows[i].player = table.player(i);
    rows[i].played_points = table.points(i);
    rows[i].sonneborn_berger = sb[i];
  }
  rows[w].withdrawn = true;
  for (std::size_t u = 0; u < ruling.unplayed.size(); ++u) {
    const std::size_t j = ruling.unplayed[u];
    const double s = ruling.imputations.at(u).score.value();
    rows[j].imputed_points += s;
    rows[j].imputed_games.push_back({table.player(w).id, s});
    rows[w].imputed_points += 1.0 - s;
    rows[w].imputed_games.push_back({table.player(j).id, 1.0 - s});
  }
  for (auto& row : rows) row.total = row.played_points + row.imputed_points;
  assign_ranks(rows);
  return rows;
}

std::vector<StandingsRow> apply_policy(const Crosstable& table, std::string_view withdrawn_id,
                                       Method method, double k) {
  return standings_from_ruling(table, rule_withdrawal(table, withdrawn_id, method, k));
}

double round_half_point(double score) {
  const double t = 2.0 * score;
  const double f = std::floor(t);
  const double frac = t - f;
  double units;
  if (frac > 0.5) {
    units = f + 1.0;
  } else if (frac < 0.5) {
    units = f;
  } else {
    // Quarter-point tie: pick the half-point, i.e. the odd number of halves.
    units = std::fmod(f, 2.0) != 0.0 ? f : f + 1.0;
  }
  return units / 2.0;
}

std::string render_standings(const std::vector<StandingsRow>& rows, ReportingPolicy policy) {
  const int games = rows.empty() ? 0 : static_cast<int>(rows.size()) - 1;
  std::map<std::string, std::string> names;
  std::size_t name_width = 6;
  for (const auto& r : rows) {
    names[r.player.id] = r.player.name;
    name_width = std::max(name_width, r.player.name.size() + (r.withdrawn ? 4 : 0));
  }

  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-4s %-*s %6s %9s %7s\n", "Rk", static_cast<int>(name_width),
                "Player", "Rating", "Score", "SB");
  out << line;
  std::vector<const StandingsRow*> footnoted;
  for (const auto& r : rows) {
    std::string score;
    switch (policy) {
      case ReportingPolicy::kOneDecimalTotal:
        score = fixed(r.total, 1) + "/" + std::to_string(games);
        break;
      case ReportingPolicy::kRoundHalfPoint: {
        double total = r.played_points;
        for (const auto& g : r.imputed_games) total += round_half_point(g.score);
        score = fixed(total, 1) + "/" + std::to_string(games);
        break;
      }
      case ReportingPolicy::kEarnedOnlyFootnoted:
        score = fixed(r.played_points, 1) + "/" + std::to_string(games);
        if (!r.imputed_games.empty()) {
          score += "–";
          footnoted.push_back(&r);
        }
        break;
    }
    const std::string name = r.player.name + (r.withdrawn ? " (w)" : "");
    std::snprintf(line, sizeof line, "%-4d %-*s %6.0f %9s %7.2f\n", r.rank,
                  static_cast<int>(name_width), name.c_str(), r.player.rating.value(),
                  score.c_str(), r.sonneborn_berger);
    out << line;
  }
  if (!footnoted.empty()) {
    out << "\n– unplayed games; imputed values used for ranking:\n";
    for (const StandingsRow* r : footnoted) {
      for (const auto& g : r->imputed_games) {
        out << "  " << r->player.name << " vs " << names[g.opponent_id] << ": "
            << fixed(g.score, 3) << "\n";
      }
    }
  }
  return out.str();
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

std::vector<std::vector<std::string>> parse_csv_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(record));
      record.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw Error(ErrorKind::kParse, "csv: unterminated quoted field");
  if (any) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

double parse_number(const std::string& s, std::size_t row, std::size_t col) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::kParse, "csv: row " + std::to_string(row) + ", column " +
                                       std::to_string(col) + ": not a number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string export_crosstable(const Crosstable& table, const std::vector<StandingsRow>& rows) {
  std::ostringstream out;
  out << "player,rating";
  for (const auto& p : table.players()) out << ',' << csv_field(p.id);
  out << ",played,imputed,total,sb,rank,status\r\n";

  std::map<std::string, const StandingsRow*> by_id;
  for (const auto& r : rows) by_id[r.player.id] = &r;

  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& p = table.player(i);
    const auto it = by_id.find(p.id);
    const StandingsRow* row = it == by_id.end() ? nullptr : it->second;
    out << csv_field(p.name) << ',' << shortest(p.rating.value());
    for (std::size_t j = 0; j < table.size(); ++j) {
      out << ',';
      if (auto r = table.result(i, j)) {
        out << shortest(*r);
      } else if (row) {
        const auto& opp_id = table.player(j).id;
        for (const auto& g : row->imputed_games) {
          if (g.opponent_id == opp_id) {
            out << shortest(g.score) << '*';
            break;
          }
        }
      }
    }
    if (row) {
      out << ',' << shortest(row->played_points) << ',' << shortest(row->imputed_points) << ','
          << shortest(row->total) << ',' << shortest(row->sonneborn_berger) << ',' << row->rank
          << ',' << (row->withdrawn ? "withdrawn" : "");
    } else {
      out << ",,,,,,excluded";
    }
    out << "\r\n";
  }
  return out.str();
}

ParsedCrosstable parse_crosstable_csv(std::string_view csv) {
  const auto records = parse_csv_records(csv);
  if (records.empty()) throw Error(ErrorKind::kParse, "csv: missing header");
  const auto& header = records[0];
  if (header.size() < 8 || header[0] != "player" || header[1] != "rating") {
    throw Error(ErrorKind::kParse, "csv: unexpected header");
  }
  const std::size_t n = header.size() - 8;
  if (records.size() != n + 1) {
    throw Error(ErrorKind::kParse, "csv: expected " + std::to_string(n) + " data rows, got " +
                                       std::to_string(records.size() - 1));
  }
  std::vector<PlayerRecord> players;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = records[i + 1];
    if (rec.size() != header.size()) {
      throw Error(ErrorKind::kParse, "csv: row " + std::to_string(i + 1) + " has " +
                                         std::to_string(rec.size()) + " fields");
    }
    players.push_back({header[2 + i], rec[0], EloRating(parse_number(rec[1], i + 1, 1))});
  }

  ParsedCrosstable parsed{Crosstable(players), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = records[i + 1];
    StandingsRow row;
    row.player = players[i];
    for (std::size_t j = 0; j < n; ++j) {
      const std::string& cell = rec[2 + j];
      if (cell.empty()) continue;
      if (cell.back() == '*') {
        row.imputed_games.push_back(
            {players[j].id, parse_number(cell.substr(0, cell.size() - 1), i + 1, 2 + j)});
      } else if (j > i) {
        parsed.table.record(i, j, GameScore::played(parse_number(cell, i + 1, 2 + j)));
      }
    }
    const std::string& status = rec[2 + n + 5];
    if (status == "excluded") continue;
    row.played_points = parse_number(rec[2 + n], i + 1, 2 + n);
    row.imputed_points = parse_number(rec[3 + n], i + 1, 3 + n);
    row.total = parse_number(rec[4 + n], i + 1, 4 + n);
    row.sonneborn_berger = parse_number(rec[5 + n], i + 1, 5 + n);
    row.rank = static_cast<int>(parse_number(rec[6 + n], i + 1, 6 + n));
    row.withdrawn = status == "withdrawn";
    parsed.rows.push_back(std::move(row));
  }
  parsed.table.validate();
  std::stable_sort(parsed.rows.begin(), parsed.rows.end(),
                   [](const StandingsRow& a, const StandingsRow& b) {
                     if (a.rank != b.rank) return a.rank < b.rank;
                     return ranks_before(a, b);
                   });
  return parsed;
}

}  // namespace fairplay
