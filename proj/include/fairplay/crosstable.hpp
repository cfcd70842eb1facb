#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "fairplay/types.hpp"

namespace fairplay {

// Dense round-robin result matrix. Entry (i, j) is player i's score against
// player j; an empty entry means the game was not played. Round-robin fields
// are small (N <= ~20), so storage is a flat N*N vector.
class Crosstable {
 public:
  Crosstable() = default;
  explicit Crosstable(std::vector<PlayerRecord> players);

  std::size_t size() const noexcept { return players_.size(); }
  const std::vector<PlayerRecord>& players() const noexcept { return players_; }
  const PlayerRecord& player(std::size_t i) const { return players_.at(i); }

  // Index of the player with this id, or nullopt.
  std::optional<std::size_t> find(std::string_view id) const;
  // Like find() but throws kInvalidInput for unknown ids.
  std::size_t index_of(std::string_view id) const;

  // Records i's score vs j and the complementary 1 - score for j vs i.
  // Throws on self-pairing, duplicate pairing or a non-result score.
  void record(std::size_t i, std::size_t j, GameScore score_for_i,
              std::optional<int> round = std::nullopt);
  void clear(std::size_t i, std::size_t j);

  std::optional<double> result(std::size_t i, std::size_t j) const {
    return results_[i * players_.size() + j];
  }
  bool played(std::size_t i, std::size_t j) const {
    return result(i, j).has_value();
  }
  std::optional<int> round(std::size_t i, std::size_t j) const {
    return rounds_[i * players_.size() + j];
  }

  // Sum of i's played scores, optionally skipping games against `exclude`.
  double points(std::size_t i,
                std::optional<std::size_t> exclude = std::nullopt) const;
  int games_played(std::size_t i,
                   std::optional<std::size_t> exclude = std::nullopt) const;
  int total_played_games() const;

  // The (N-1)-player table with player `index` and all of its games removed.
  Crosstable without(std::size_t index) const;

  // Throws kInvalidInput if the diagonal is set, a pair is asymmetric or
  // does not sum to 1, or ids collide.
  void validate() const;

  friend bool operator==(const Crosstable&, const Crosstable&) = default;

 private:
  std::vector<PlayerRecord> players_;
  std::vector<std::optional<double>> results_;
  std::vector<std::optional<int>> rounds_;
};

}  // namespace fairplay
