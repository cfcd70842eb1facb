#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "fairplay/crosstable.hpp"
#include "fairplay/imputation.hpp"

namespace fairplay {

// JSON interchange for a tournament:
//
//   {
//     "name": "Bucharest 2026",
//     "players": [{"id": "firouzja", "name": "Firouzja", "rating": 2759}],
//     "games": [{"white": "caruana", "black": "firouzja",
//                "result": "1-0", "round": 1}],
//     "withdrawn": "firouzja",
//     "k": 3,          // optional
//     "sigma2": 0.25   // optional
//   }
struct TournamentFile {
  std::string name;
  Crosstable table;
  std::string withdrawn;
  double k = kDefaultPriorStrength;
  double sigma2 = kDefaultGameVariance;
};

// Schema and consistency checks report the JSON path of the offending field
// ("players[3].rating"). Syntax errors report line and column. Both raise
// Error{kParse}.
TournamentFile parse_tournament(std::string_view text);
TournamentFile tournament_from_json(const nlohmann::json& doc);
nlohmann::json tournament_to_json(const TournamentFile& file);

TournamentFile load_tournament(const std::string& path);

}  // namespace fairplay
