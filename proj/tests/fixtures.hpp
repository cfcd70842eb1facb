#pragma once

#include <string>
#include <vector>

#include "fairplay/imputation.hpp"
#include "fairplay/tournament_file.hpp"

namespace fairplay::test {

inline std::string fixture_path() { return FAIRPLAY_DATA_DIR "/bucharest2026.json"; }

inline TournamentFile bucharest() { return load_tournament(fixture_path()); }

inline PlayerRecord player(const std::string& id, double rating) {
  return {id, id, EloRating(rating)};
}

// Firouzja's five games, as W's scores.
inline WithdrawalContext bucharest_context() {
  return WithdrawalContext(player("firouzja", 2759),
                           {{player("praggnanandhaa", 2741), GameScore(0.5)},
                            {player("caruana", 2793), GameScore(0.0)},
                            {player("vachier-lagrave", 2717), GameScore(0.0)},
                            {player("giri", 2753), GameScore(0.0)},
                            {player("sindarov", 2745), GameScore(0.5)}});
}

inline const std::vector<PlayerRecord>& bucharest_unplayed() {
  static const std::vector<PlayerRecord> v{player("keymer", 2762), player("so", 2754),
                                           player("van-foreest", 2736), player("deac", 2655)};
  return v;
}

}  // namespace fairplay::test
