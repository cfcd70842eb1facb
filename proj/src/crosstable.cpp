#include "fairplay/crosstable.hpp"

#include <cmath>
#include <string>
#include <unordered_set>
#include <utility>

namespace fairplay {

Crosstable::Crosstable(std::vector<PlayerRecord> players)
    : players_(std::move(players)),
      results_(players_.size() * players_.size()),
      rounds_(players_.size() * players_.size()) {
  std::unordered_set<std::string> ids;
  for (const auto& p : players_) {
    if (!ids.insert(p.id).second) {
      throw Error(ErrorKind::kInvalidInput, "duplicate player id '" + p.id + "'");
    }
  }
}

std::optional<std::size_t> Crosstable::find(std::string_view id) const {
  for (std::size_t i = 0; i < players_.size(); ++i) {
    if (players_[i].id == id) return i;
  }
  return std::nullopt;
}

std::size_t Crosstable::index_of(std::string_view id) const {
  if (auto i = find(id)) return *i;
  throw Error(ErrorKind::kInvalidInput, "unknown player id '" + std::string(id) + "'");
}

void Crosstable::record(std::size_t i, std::size_t j, GameScore score_for_i,
                        std::optional<int> round) {
  const std::size_t n = players_.size();
  if (i >= n || j >= n) {
    throw Error(ErrorKind::kInvalidInput, "player index out of range");
  }
  if (i == j) {
    throw Error(ErrorKind::kInvalidInput,
                "player '" + players_[i].id + "' cannot play itself");
  }
  if (!score_for_i.is_result()) {
    throw Error(ErrorKind::kInvalidInput, "played score must be 0, 0.5 or 1");
  }
  if (played(i, j)) {
    throw Error(ErrorKind::kInvalidInput, "duplicate pairing '" +
                                              players_[i].id + "' vs '" +
                                              players_[j].id + "'");
  }
  results_[i * n + j] = score_for_i.value();
  results_[j * n + i] = 1.0 - score_for_i.value();
  rounds_[i * n + j] = round;
  rounds_[j * n + i] = round;
}

void Crosstable::clear(std::size_t i, std::size_t j) {
  const std::size_t n = players_.size();
  results_[i * n + j].reset();
  results_[j * n + i].reset();
  rounds_[i * n + j].reset();
  rounds_[j * n + i].reset();
}

double Crosstable::points(std::size_t i, std::optional<std::size_t> exclude) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < players_.size(); ++j) {
    if (exclude && j == *exclude) continue;
    if (auto r = result(i, j)) sum += *r;
  }
  return sum;
}

int Crosstable::games_played(std::size_t i, std::optional<std::size_t> exclude) const {
  int count = 0;
  for (std::size_t j = 0; j < players_.size(); ++j) {
    if (exclude && j == *exclude) continue;
    if (played(i, j)) ++count;
  }
  return count;
}

int Crosstable::total_played_games() const {
  int count = 0;
  for (std::size_t i = 0; i < players_.size(); ++i) {
    for (std::size_t j = i + 1; j < players_.size(); ++j) {
      if (played(i, j)) ++count;
    }
  }
  return count;
}

Crosstable Crosstable::without(std::size_t index) const {
  std::vector<PlayerRecord> kept;
  std::vector<std::size_t> map;
  for (std::size_t i = 0; i < players_.size(); ++i) {
    if (i == index) continue;
    kept.push_back(players_[i]);
    map.push_back(i);
  }
  Crosstable out(std::move(kept));
  for (std::size_t a = 0; a < map.size(); ++a) {
    for (std::size_t b = a + 1; b < map.size(); ++b) {
      if (auto r = result(map[a], map[b])) {
        out.record(a, b, GameScore(*r), round(map[a], map[b]));
      }
    }
  }
  return out;
}

void Crosstable::validate() const {
  const std::size_t n = players_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (played(i, i)) {
      throw Error(ErrorKind::kInvalidInput, "diagonal entry set for '" + players_[i].id + "'");
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto a = result(i, j);
      const auto b = result(j, i);
      if (a.has_value() != b.has_value() ||
          (a && std::abs(*a + *b - 1.0) > 1e-12)) {
        throw Error(ErrorKind::kInvalidInput, "inconsistent result between '" +
                                                  players_[i].id + "' and '" +
                                                  players_[j].id + "'");
      }
    }
  }
}

}  // namespace fairplay
