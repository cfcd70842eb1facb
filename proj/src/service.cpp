#include "fairplay/service.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "httplib.h"

namespace fairplay::service {
namespace {

using nlohmann::json;

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse:
    case ErrorKind::kInvalidInput:
    case ErrorKind::kUnsupportedMethod:
      return 400;
    case ErrorKind::kDomain:
    case ErrorKind::kDegenerateContext:
    case ErrorKind::kInsufficientData:
      return 422;
    case ErrorKind::kIo:
      return 500;
  }
  return 500;
}

Response error_response(int status, std::string_view kind, const std::string& message) {
  return {status, json{{"error", kind}, {"message", message}}.dump()};
}

Response ok(const json& body) { return {200, body.dump()}; }

bool is_json(std::string_view content_type) {
  const auto semi = content_type.find(';');
  std::string_view base = content_type.substr(0, semi);
  while (!base.empty() && base.back() == ' ') base.remove_suffix(1);
  return base == "application/json";
}

json parse_body(std::string_view body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("body: malformed JSON at byte ") +
                                       std::to_string(e.byte));
  }
}

// Runs a handler body, mapping library errors onto HTTP statuses.
template <typename F>
Response guarded(std::string_view content_type, std::string_view body, F&& f) {
  if (!is_json(content_type)) {
    return error_response(415, "unsupported-media-type", "content-type must be application/json");
  }
  try {
    return ok(f(parse_body(body)));
  } catch (const Error& e) {
    return error_response(status_for(e.kind()), to_string(e.kind()), e.what());
  } catch (const json::exception& e) {
    return error_response(400, "parse", e.what());
  }
}

double number_or(const json& doc, const char* key, double fallback) {
  auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_number()) throw Error(ErrorKind::kParse, std::string(key) + ": expected a number");
  return it->get<double>();
}

Method method_from(const json& doc) {
  auto it = doc.find("method");
  if (it == doc.end()) return Method::kBayesBlup;
  if (!it->is_string()) throw Error(ErrorKind::kParse, "method: expected a string");
  return parse_method(it->get<std::string>());
}

const json& tournament_of(const json& doc) {
  auto it = doc.find("tournament");
  if (it == doc.end()) throw Error(ErrorKind::kParse, "tournament: missing");
  return *it;
}

json interval_json(const std::optional<CredibleInterval>& ci) {
  if (!ci) return nullptr;
  return json::array({ci->lo, ci->hi});
}

json row_json(const StandingsRow& r) {
  json games = json::array();
  for (const auto& g : r.imputed_games) {
    games.push_back({{"opponentId", g.opponent_id}, {"score", g.score}});
  }
  return {{"id", r.player.id},
          {"name", r.player.name},
          {"rating", r.player.rating.value()},
          {"playedPoints", r.played_points},
          {"imputedPoints", r.imputed_points},
          {"total", r.total},
          {"rank", r.rank},
          {"sonnebornBerger", r.sonneborn_berger},
          {"withdrawn", r.withdrawn},
          {"imputedGames", std::move(games)}};
}

}  // namespace

json standings_json(const std::vector<StandingsRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) out.push_back(row_json(r));
  return out;
}

json impute_json(const TournamentFile& file, Method method, double k, double level) {
  const WithdrawalRuling ruling =
      rule_withdrawal(file.table, file.withdrawn, method, k, file.sigma2, level);
  const auto& table = file.table;
  const PlayerRecord& w = table.player(ruling.withdrawn);

  json doc;
  doc["tournament"] = file.name;
  doc["withdrawn"] = w.id;
  doc["method"] = to_string(method);
  doc["k"] = k;
  doc["sigma2"] = file.sigma2;
  doc["level"] = level;
  doc["warnings"] = ruling.warnings;

  const auto& ctx = ruling.context;
  doc["n"] = ctx ? ctx->n() : 0;
  doc["weight"] = blup_weight(ctx ? ctx->n() : 0, k);
  if (ctx) {
    const double theta0 = prior_theta0(w.rating, ctx->mean_opponent_rating());
    const BetaPosterior post = beta_posterior({k, theta0}, ctx->total_points(), ctx->n());
    doc["totalPoints"] = ctx->total_points();
    doc["meanScore"] = ctx->mean_score();
    doc["meanPlayedExpectation"] = ctx->mean_played_expectation();
    doc["theta0"] = theta0;
    doc["adjustment"] = blup_weight(ctx->n(), k) *
                        (1.0 - ctx->mean_score() - ctx->mean_played_expectation());
    doc["posterior"] = {{"alpha", post.alpha}, {"beta", post.beta}, {"mean", post.mean()}};
    doc["posteriorVariance"] = posterior_variance(ctx->n(), k, file.sigma2);
  } else {
    doc["adjustment"] = 0.0;
    doc["posterior"] = nullptr;
    doc["posteriorVariance"] = posterior_variance(0, k, file.sigma2);
  }

  json imputations = json::array();
  for (std::size_t u = 0; u < ruling.unplayed.size(); ++u) {
    const std::size_t j = ruling.unplayed[u];
    const PlayerRecord& opp = table.player(j);
    json item = {{"opponentId", opp.id},
                 {"name", opp.name},
                 {"rating", opp.rating.value()},
                 {"eloExpectation", elo_expectation(opp.rating, w.rating)},
                 {"performance", ctx ? json(1.0 - ctx->mean_score()) : json(nullptr)},
                 {"traditional", 1.0}};
    if (method == Method::kAnnulment) {
      item["score"] = table.games_played(j, ruling.withdrawn) > 0
                          ? json(impute_annulment_equivalent(table, ruling.withdrawn, j)
                                     .score.value())
                          : json(nullptr);
      item["interval"] = nullptr;
    } else {
      item["score"] = ruling.imputations[u].score.value();
      item["interval"] = interval_json(ruling.imputations[u].interval);
    }
    imputations.push_back(std::move(item));
  }
  doc["imputations"] = std::move(imputations);
  doc["standings"] = standings_json(standings_from_ruling(table, ruling));
  return doc;
}

Response handle_health() { return {200, "ok", "text/plain"}; }

Response handle_impute(std::string_view content_type, std::string_view body) {
  return guarded(content_type, body, [](const json& doc) {
    const TournamentFile file = tournament_from_json(doc);
    const Method method = method_from(doc);
    const double k = number_or(doc, "k", file.k);
    const double level = number_or(doc, "level", kDefaultCredibleLevel);
    const std::size_t w = file.table.index_of(file.withdrawn);
    bool any_unplayed = false;
    for (std::size_t j = 0; j < file.table.size(); ++j) {
      if (j != w && !file.table.played(w, j)) any_unplayed = true;
    }
    if (!any_unplayed) {
      throw Error(ErrorKind::kDomain, "withdrawn player has no unplayed games to impute");
    }
    return impute_json(file, method, k, level);
  });
}

Response handle_sensitivity(std::string_view content_type, std::string_view body) {
  return guarded(content_type, body, [](const json& doc) {
    const TournamentFile file = tournament_from_json(tournament_of(doc));
    auto it = doc.find("kValues");
    if (it == doc.end() || !it->is_array() || it->empty()) {
      throw Error(ErrorKind::kParse, "kValues: expected a non-empty array");
    }
    std::vector<double> ks;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& v = (*it)[i];
      if (!v.is_number() || !(v.get<double>() > 0.0)) {
        throw Error(ErrorKind::kParse, "kValues[" + std::to_string(i) + "]: expected a positive number");
      }
      ks.push_back(v.get<double>());
    }

    const auto ruling = rule_withdrawal(file.table, file.withdrawn, Method::kBayesBlup, ks.front(),
                                        file.sigma2);
    if (!ruling.context) {
      throw Error(ErrorKind::kDegenerateContext, "withdrawn player completed no games");
    }
    std::vector<PlayerRecord> opponents;
    for (std::size_t j : ruling.unplayed) opponents.push_back(file.table.player(j));
    const auto rows = sensitivity_sweep(*ruling.context, opponents, ks);

    json out;
    double lo = 1.0, hi = 0.0;
    for (const auto& o : opponents) {
      const double e = elo_expectation(o.rating, ruling.context->withdrawn().rating);
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    out["eloSpread"] = opponents.empty() ? 0.0 : hi - lo;
    out["opponents"] = json::array();
    for (const auto& o : opponents) out["opponents"].push_back(o.id);
    out["rows"] = json::array();
    for (const auto& r : rows) {
      json scores = json::array();
      for (std::size_t i = 0; i < opponents.size(); ++i) {
        scores.push_back({{"opponentId", opponents[i].id}, {"score", r.scores[i]}});
      }
      out["rows"].push_back(
          {{"k", r.k}, {"weight", r.weight}, {"scores", std::move(scores)}, {"spread", r.spread}});
    }
    return out;
  });
}

Response handle_compare(std::string_view content_type, std::string_view body) {
  return guarded(content_type, body, [](const json& doc) {
    const TournamentFile file = tournament_from_json(tournament_of(doc));
    const double k = number_or(doc, "k", file.k);
    const auto& table = file.table;

    json out;
    out["playerOrder"] = json::array();
    for (const auto& p : table.players()) out["playerOrder"].push_back(p.id);

    const std::size_t w = table.index_of(file.withdrawn);
    std::vector<std::size_t> unplayed;
    for (std::size_t j = 0; j < table.size(); ++j) {
      if (j != w && !table.played(w, j)) unplayed.push_back(j);
    }
    json matrix = json::array();
    for (std::size_t j : unplayed) matrix.push_back({{"opponentId", table.player(j).id}});

    out["warnings"] = json::array();
    for (Method m : kAllMethods) {
      const std::string label(to_string(m));
      try {
        const auto ruling = rule_withdrawal(table, file.withdrawn, m, k, file.sigma2);
        auto rows = standings_from_ruling(table, ruling);
        // Align every method on the tournament's player order.
        json aligned = json::array();
        for (const auto& p : table.players()) {
          for (const auto& r : rows) {
            if (r.player.id == p.id) aligned.push_back(row_json(r));
          }
        }
        out["standings"][label] = std::move(aligned);
        for (const auto& msg : ruling.warnings) out["warnings"].push_back(msg);
        for (std::size_t u = 0; u < unplayed.size(); ++u) {
          if (m == Method::kAnnulment) {
            matrix[u][label] =
                table.games_played(unplayed[u], w) > 0
                    ? json(impute_annulment_equivalent(table, w, unplayed[u]).score.value())
                    : json(nullptr);
          } else {
            matrix[u][label] = ruling.imputations[u].score.value();
          }
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kDegenerateContext) throw;
        out["standings"][label] = nullptr;
        out["warnings"].push_back(label + ": " + e.what());
      }
    }
    out["imputations"] = std::move(matrix);
    return out;
  });
}

struct Server::Impl {
  httplib::Server http;
  int port = 0;
};

Server::Server(ServerConfig config) : config_(std::move(config)), impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;
  // httplib's default also sets SO_REUSEPORT, which would let a second
  // server silently share a port that is already in use.
  http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  const std::string origin = config_.cors_origin;
  http.set_default_headers({{"Access-Control-Allow-Origin", origin},
                            {"Access-Control-Allow-Headers", "Content-Type"},
                            {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});

  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  http.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  http.Get("/api/health", [send](const httplib::Request&, httplib::Response& res) {
    send(res, handle_health());
  });
  http.Post("/api/impute", [send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_impute(req.get_header_value("Content-Type"), req.body));
  });
  http.Post("/api/sensitivity", [send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_sensitivity(req.get_header_value("Content-Type"), req.body));
  });
  http.Post("/api/compare", [send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_compare(req.get_header_value("Content-Type"), req.body));
  });
  const std::string sim_dir = config_.simulation_dir;
  http.Get("/api/simulation", [send, sim_dir](const httplib::Request&, httplib::Response& res) {
    const auto path = std::filesystem::path(sim_dir) / "summary.json";
    std::ifstream in(path);
    if (sim_dir.empty() || !in) {
      send(res, error_response(404, "not-found", "no simulation summary available"));
      return;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    send(res, {200, buf.str()});
  });
  if (!config_.ui_dir.empty() && std::filesystem::is_directory(config_.ui_dir)) {
    http.set_mount_point("/", config_.ui_dir);
  }
}

Server::~Server() = default;

void Server::bind() {
  auto& http = impl_->http;
  if (config_.port == 0) {
    impl_->port = http.bind_to_any_port(config_.host);
    if (impl_->port <= 0) throw Error(ErrorKind::kIo, "cannot bind an ephemeral port");
  } else {
    if (!http.bind_to_port(config_.host, config_.port)) {
      throw Error(ErrorKind::kIo, "port " + std::to_string(config_.port) + " is unavailable");
    }
    impl_->port = config_.port;
  }
}

int Server::port() const { return impl_->port; }

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() { impl_->http.stop(); }

}  // namespace fairplay::service
