#include "fairplay/tournament_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fairplay {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::kParse, path + ": " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string string_at(const json& obj, const std::string& key, const std::string& path) {
  const json& v = member(obj, key, path);
  const std::string where = path.empty() ? key : path + "." + key;
  if (!v.is_string()) fail(where, "expected a string");
  if (v.get_ref<const std::string&>().empty()) fail(where, "must not be empty");
  return v.get<std::string>();
}

double positive_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x <= 0.0) fail(where, "must be a positive number");
  return x;
}

double score_for_white(const std::string& result, const std::string& where) {
  if (result == "1-0") return 1.0;
  if (result == "0-1") return 0.0;
  if (result == "1/2-1/2") return 0.5;
  fail(where, "expected \"1-0\", \"0-1\" or \"1/2-1/2\", got \"" + result + "\"");
}

std::string result_string(double white_score) {
  if (white_score == 1.0) return "1-0";
  if (white_score == 0.0) return "0-1";
  return "1/2-1/2";
}

}  // namespace

TournamentFile tournament_from_json(const json& doc) {
  if (!doc.is_object()) fail("$", "expected an object");
  TournamentFile file;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) fail("name", "expected a string");
    file.name = it->get<std::string>();
  }

  const json& players = member(doc, "players", "");
  if (!players.is_array()) fail("players", "expected an array");
  std::vector<PlayerRecord> records;
  for (std::size_t i = 0; i < players.size(); ++i) {
    const std::string path = "players[" + std::to_string(i) + "]";
    const json& p = players[i];
    if (!p.is_object()) fail(path, "expected an object");
    PlayerRecord rec;
    rec.id = string_at(p, "id", path);
    rec.name = p.contains("name") ? string_at(p, "name", path) : rec.id;
    rec.rating = EloRating(positive_number(member(p, "rating", path), path + ".rating"));
    if (std::any_of(records.begin(), records.end(),
                    [&](const PlayerRecord& r) { return r.id == rec.id; })) {
      fail(path + ".id", "duplicate id \"" + rec.id + "\"");
    }
    records.push_back(std::move(rec));
  }
  file.table = Crosstable(std::move(records));

  const json& games = member(doc, "games", "");
  if (!games.is_array()) fail("games", "expected an array");
  for (std::size_t g = 0; g < games.size(); ++g) {
    const std::string path = "games[" + std::to_string(g) + "]";
    const json& game = games[g];
    if (!game.is_object()) fail(path, "expected an object");
    const std::string white = string_at(game, "white", path);
    const std::string black = string_at(game, "black", path);
    const auto wi = file.table.find(white);
    const auto bi = file.table.find(black);
    if (!wi) fail(path + ".white", "unknown player id \"" + white + "\"");
    if (!bi) fail(path + ".black", "unknown player id \"" + black + "\"");
    if (*wi == *bi) fail(path, "a player cannot play itself");
    if (file.table.played(*wi, *bi)) fail(path, "duplicate pairing " + white + " vs " + black);
    const double score = score_for_white(string_at(game, "result", path), path + ".result");
    std::optional<int> round;
    if (auto it = game.find("round"); it != game.end()) {
      if (!it->is_number_integer() || it->get<int>() < 1) {
        fail(path + ".round", "expected a positive integer");
      }
      round = it->get<int>();
    }
    file.table.record(*wi, *bi, GameScore::played(score), round);
  }

  file.withdrawn = string_at(doc, "withdrawn", "");
  if (!file.table.find(file.withdrawn)) {
    fail("withdrawn", "unknown player id \"" + file.withdrawn + "\"");
  }
  if (auto it = doc.find("k"); it != doc.end()) file.k = positive_number(*it, "k");
  if (auto it = doc.find("sigma2"); it != doc.end()) file.sigma2 = positive_number(*it, "sigma2");
  return file;
}

TournamentFile parse_tournament(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < at; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::kParse, "line " + std::to_string(line) + ", column " +
                                       std::to_string(col) + ": malformed JSON");
  }
  return tournament_from_json(doc);
}

json tournament_to_json(const TournamentFile& file) {
  json doc;
  doc["name"] = file.name;
  json players = json::array();
  for (const auto& p : file.table.players()) {
    players.push_back({{"id", p.id}, {"name", p.name}, {"rating", p.rating.value()}});
  }
  doc["players"] = std::move(players);
  json games = json::array();
  const auto& t = file.table;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      if (auto r = t.result(i, j)) {
        json g = {{"white", t.player(i).id}, {"black", t.player(j).id},
                  {"result", result_string(*r)}};
        if (auto round = t.round(i, j)) g["round"] = *round;
        games.push_back(std::move(g));
      }
    }
  }
  doc["games"] = std::move(games);
  doc["withdrawn"] = file.withdrawn;
  doc["k"] = file.k;
  doc["sigma2"] = file.sigma2;
  return doc;
}

TournamentFile load_tournament(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_tournament(buf.str());
}

}  // namespace fairplay
