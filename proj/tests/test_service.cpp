#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "fairplay/service.hpp"
#include "httplib.h"

using namespace fairplay;
using namespace fairplay::service;
using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

json fixture_json() {
  std::ifstream in(test::fixture_path());
  return json::parse(in);
}

json impute_body(const std::string& method) {
  json body = fixture_json();
  body["method"] = method;
  return body;
}

double score_for(const json& imputations, const std::string& id) {
  for (const auto& i : imputations) {
    if (i["opponentId"] == id) return i["score"].get<double>();
  }
  FAIL("opponent not found: " << id);
  return -1;
}

}  // namespace

TEST_CASE("health") {
  const auto r = handle_health();
  CHECK(r.status == 200);
  CHECK(r.body == "ok");
}

TEST_CASE("impute: Bayes reproduces the worked example") {
  const auto r = handle_impute(kJson, impute_body("bayes").dump());
  REQUIRE(r.status == 200);
  const auto doc = json::parse(r.body);
  CHECK(std::abs(score_for(doc["imputations"], "keymer") - 0.700) < 0.002);
  CHECK(std::abs(score_for(doc["imputations"], "deac") - 0.551) < 0.002);
  CHECK(doc["imputations"].size() == 4);
  CHECK(doc["weight"] == 0.625);
  CHECK(std::abs(doc["adjustment"].get<double>() - 0.196) < 0.002);
  CHECK(std::abs(doc["posterior"]["alpha"].get<double>() - 2.53) < 0.01);
  CHECK(std::abs(doc["posterior"]["beta"].get<double>() - 5.47) < 0.01);
  CHECK(doc["standings"].size() == 10);
  CHECK(doc["imputations"][0]["interval"].size() == 2);
}

TEST_CASE("impute: forfeit awards full points") {
  const auto doc = json::parse(handle_impute(kJson, impute_body("forfeit").dump()).body);
  for (const auto& i : doc["imputations"]) CHECK(i["score"] == 1.0);
}

TEST_CASE("impute: agrees with the core to 1e-9") {
  const auto f = test::bucharest();
  const auto ruling = rule_withdrawal(f.table, f.withdrawn, Method::kBayesBlup, 3.0);
  const auto doc = json::parse(handle_impute(kJson, impute_body("bayes").dump()).body);
  for (std::size_t u = 0; u < ruling.unplayed.size(); ++u) {
    const auto& id = f.table.player(ruling.unplayed[u]).id;
    CHECK(std::abs(score_for(doc["imputations"], id) - ruling.imputations[u].score.value()) < 1e-9);
  }
}

TEST_CASE("impute: errors") {
  auto body = impute_body("bayes");
  body["players"][3]["rating"] = "high";
  auto r = handle_impute(kJson, body.dump());
  CHECK(r.status == 400);
  CHECK(r.body.find("players[3].rating") != std::string::npos);

  CHECK(handle_impute(kJson, "{not json").status == 400);
  CHECK(handle_impute("text/plain", impute_body("bayes").dump()).status == 415);
  CHECK(handle_impute("application/json; charset=utf-8", impute_body("bayes").dump()).status == 200);
  CHECK(handle_impute(kJson, impute_body("coinflip").dump()).status == 400);

  // Everyone already played W.
  json full = {{"players", {{{"id", "a"}, {"rating", 2700}}, {{"id", "b"}, {"rating", 2600}}}},
               {"games", {{{"white", "a"}, {"black", "b"}, {"result", "1-0"}}}},
               {"withdrawn", "a"}};
  CHECK(handle_impute(kJson, full.dump()).status == 422);

  // No games for W: performance is undefined.
  json none = {{"players", {{{"id", "a"}, {"rating", 2700}}, {{"id", "b"}, {"rating", 2600}}}},
               {"games", json::array()},
               {"withdrawn", "a"},
               {"method", "performance"}};
  CHECK(handle_impute(kJson, none.dump()).status == 422);
  none["method"] = "bayes";
  r = handle_impute(kJson, none.dump());
  CHECK(r.status == 200);
  CHECK(json::parse(r.body)["warnings"].size() == 1);
}

TEST_CASE("sensitivity") {
  json body = {{"tournament", fixture_json()}, {"kValues", {1, 2, 3, 4, 5}}};
  auto r = handle_sensitivity(kJson, body.dump());
  REQUIRE(r.status == 200);
  auto doc = json::parse(r.body);
  REQUIRE(doc["rows"].size() == 5);
  const auto& row3 = doc["rows"][2];
  CHECK(std::abs(row3["scores"][0]["score"].get<double>() - 0.700) < 0.002);
  CHECK(std::abs(row3["scores"][3]["score"].get<double>() - 0.551) < 0.002);
  CHECK(std::abs(doc["eloSpread"].get<double>() - row3["spread"].get<double>()) < 1e-12);

  body["kValues"] = json::array();
  CHECK(handle_sensitivity(kJson, body.dump()).status == 400);
  body["kValues"] = {3, -1};
  CHECK(handle_sensitivity(kJson, body.dump()).status == 400);
  body["kValues"] = {3, 3};
  doc = json::parse(handle_sensitivity(kJson, body.dump()).body);
  CHECK(doc["rows"][0] == doc["rows"][1]);
}

TEST_CASE("compare") {
  json body = {{"tournament", fixture_json()}, {"k", 3}};
  const auto r = handle_compare(kJson, body.dump());
  REQUIRE(r.status == 200);
  const auto doc = json::parse(r.body);
  CHECK(doc["playerOrder"].size() == 10);
  CHECK(doc["standings"]["forfeit"].size() == 10);
  CHECK(doc["standings"]["bayes"].size() == 10);
  CHECK(doc["standings"]["annul"].size() == 9);
  for (const char* m : {"forfeit", "elo", "performance", "bayes"}) {
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(doc["standings"][m][i]["id"] == doc["playerOrder"][i]);
    }
  }
  for (const auto& row : doc["imputations"]) {
    CHECK(row["forfeit"] == 1.0);
    CHECK(row["bayes"].get<double>() > 0.549);
    CHECK(row["bayes"].get<double>() < 0.702);
  }
}

TEST_CASE("compare: nothing unplayed means every method agrees") {
  json t = {{"players", {{{"id", "a"}, {"rating", 2700}}, {{"id", "b"}, {"rating", 2600}},
                         {{"id", "c"}, {"rating", 2500}}}},
            {"games", {{{"white", "a"}, {"black", "b"}, {"result", "1-0"}},
                       {{"white", "b"}, {"black", "c"}, {"result", "1/2-1/2"}},
                       {{"white", "c"}, {"black", "a"}, {"result", "0-1"}}}},
            {"withdrawn", "a"}};
  const auto doc = json::parse(handle_compare(kJson, json{{"tournament", t}}.dump()).body);
  const auto& base = doc["standings"]["forfeit"];
  for (const char* m : {"elo", "performance", "bayes"}) CHECK(doc["standings"][m] == base);
}

TEST_CASE("handlers are stateless") {
  const std::string a = impute_body("bayes").dump();
  const std::string b = impute_body("forfeit").dump();
  const auto first = handle_impute(kJson, a).body;
  handle_impute(kJson, b);
  handle_impute(kJson, "{");
  CHECK(handle_impute(kJson, a).body == first);
}

TEST_CASE("live server") {
  ServerConfig cfg;
  cfg.port = 0;
  Server server(cfg);
  server.bind();
  REQUIRE(server.port() > 0);
  std::thread t([&] { server.listen(); });

  httplib::Client client("127.0.0.1", server.port());
  client.set_connection_timeout(5);
  httplib::Result health;
  for (int i = 0; i < 50 && !health; ++i) {
    health = client.Get("/api/health");
    if (!health) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->body == "ok");
  CHECK(health->get_header_value("Access-Control-Allow-Origin") == "*");

  const auto root = client.Get("/");
  REQUIRE(root);
  CHECK(root->status == 404);

  const auto imp = client.Post("/api/impute", impute_body("bayes").dump(), kJson);
  REQUIRE(imp);
  CHECK(imp->status == 200);
  CHECK(std::abs(score_for(json::parse(imp->body)["imputations"], "keymer") - 0.700) < 0.002);

  const auto wrong = client.Post("/api/impute", impute_body("bayes").dump(), "text/plain");
  REQUIRE(wrong);
  CHECK(wrong->status == 415);

  const auto sim = client.Get("/api/simulation");
  REQUIRE(sim);
  CHECK(sim->status == 404);

  // A second server cannot take the same port.
  ServerConfig clash;
  clash.port = server.port();
  Server other(clash);
  try {
    other.bind();
    FAIL("expected bind failure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }

  server.stop();
  t.join();
}
