#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "fixtures.hpp"
#include "fairplay/imputation.hpp"

using namespace fairplay;
using fairplay::test::bucharest_context;
using fairplay::test::bucharest_unplayed;
using fairplay::test::player;

namespace {

constexpr int kPropertyCases = 10000;

// Random withdrawal context: W plus n opponents with random ratings/results.
struct RandomCase {
  WithdrawalContext ctx;
  std::vector<PlayerRecord> unplayed;
};

RandomCase random_case(std::mt19937_64& rng, int max_games = 8) {
  std::uniform_real_distribution<double> rating(2200.0, 2900.0);
  std::uniform_int_distribution<int> games(1, max_games);
  std::uniform_int_distribution<int> result(0, 2);
  const int n = games(rng);
  std::vector<PlayedGame> played;
  for (int i = 0; i < n; ++i) {
    played.push_back({player("p" + std::to_string(i), rating(rng)), GameScore(0.5 * result(rng))});
  }
  std::vector<PlayerRecord> unplayed;
  for (int i = 0; i < 4; ++i) unplayed.push_back(player("u" + std::to_string(i), rating(rng)));
  return {WithdrawalContext(player("w", rating(rng)), std::move(played)), std::move(unplayed)};
}

// Posterior mean of a Beta(alpha, beta) by quadrature of the unnormalised
// density, independent of the closed form. Each half of [0, 1] is mapped by
// t = u^(1/alpha) (resp. 1 - t = v^(1/beta)) so the endpoint singularities
// disappear and the integrands are smooth.
double integrated_beta_mean(double alpha, double beta) {
  boost::math::quadrature::tanh_sinh<double> q;
  auto half_integral = [&](double power) {
    // ∫ t^power * density, as the sum of the two mapped halves.
    const double left_end = std::pow(0.5, alpha);
    const double right_end = std::pow(0.5, beta);
    auto left = [&](double u) {
      const double t = std::pow(u, 1.0 / alpha);
      return std::pow(t, power) * std::pow(1.0 - t, beta - 1.0) / alpha;
    };
    auto right = [&](double v) {
      const double s = std::pow(v, 1.0 / beta);
      return std::pow(1.0 - s, power) * std::pow(1.0 - s, alpha - 1.0) / beta;
    };
    return q.integrate(left, 0.0, left_end) + q.integrate(right, 0.0, right_end);
  };
  return half_integral(1.0) / half_integral(0.0);
}

}  // namespace

TEST_CASE("elo_expectation") {
  CHECK(std::abs(elo_expectation(EloRating(2762), EloRating(2759)) - 0.504) < 0.001);
  CHECK(std::abs(elo_expectation(EloRating(2655), EloRating(2759)) - 0.355) < 0.001);
  CHECK(elo_expectation(EloRating(2700), EloRating(2700)) == 0.5);
  // Direct evaluation of the logistic curve at a 400-point gap.
  CHECK(std::abs(elo_expectation(EloRating(2759), EloRating(3159)) - 1.0 / 11.0) < 1e-12);
  CHECK_THROWS_AS(EloRating(std::nan("")), Error);
  CHECK_THROWS_AS(EloRating(-5), Error);
}

TEST_CASE("prior_theta0") {
  CHECK(std::abs(prior_theta0(EloRating(2759), EloRating(2750)) - 0.51) < 0.005);
  CHECK(prior_theta0(EloRating(2600), EloRating(2600)) == 0.5);
  CHECK(std::abs(prior_theta0(EloRating(2759), EloRating(3159)) - 0.0909) < 1e-4);
}

TEST_CASE("beta_posterior") {
  const auto post = beta_posterior({3.0, 0.51}, 1.0, 5);
  CHECK(std::abs(post.alpha - 2.53) < 1e-12);
  CHECK(std::abs(post.beta - 5.47) < 1e-12);
  CHECK(std::abs(post.mean() - 0.316) < 0.001);
  CHECK(beta_posterior({3.0, 0.5}, 1.5, 3).mean() == doctest::Approx(0.5));
  CHECK(std::abs(beta_posterior({3.0, 0.51}, 5.0, 5).mean() - 6.53 / 8.0) < 1e-12);
  CHECK_THROWS_AS(beta_posterior({3.0, 0.5}, 6.0, 5), Error);
  CHECK_THROWS_AS(beta_posterior({3.0, 0.5}, -0.5, 5), Error);
  CHECK_THROWS_AS(beta_posterior({0.0, 0.5}, 1.0, 5), Error);
}

TEST_CASE("blup_weight") {
  CHECK(blup_weight(5, 3) == 0.625);
  CHECK(blup_weight(0, 3) == 0.0);
  CHECK(std::abs(blup_weight(4, 2) - 4.0 / 6.0) < 1e-12);
  CHECK(std::abs(blup_weight(5, 2) - 0.714) < 0.001);
  try {
    blup_weight(5, 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInvalidInput);
  }
}

TEST_CASE("Bucharest context statistics") {
  const auto ctx = bucharest_context();
  CHECK(ctx.n() == 5);
  CHECK(ctx.total_points() == 1.0);
  CHECK(ctx.mean_score() == doctest::Approx(0.2));
  CHECK(std::abs(ctx.mean_played_expectation() - 0.487) < 0.002);
  double mean = 0.0;
  for (const auto& g : ctx.played()) mean += elo_expectation(g.opponent.rating, ctx.withdrawn().rating);
  CHECK(std::abs(ctx.mean_played_expectation() - mean / 5.0) < 1e-12);
}

TEST_CASE("impute_bayes_blup reproduces the worked example") {
  const auto ctx = bucharest_context();
  const double expected[] = {0.700, 0.689, 0.663, 0.551};
  const auto& opps = bucharest_unplayed();
  for (std::size_t i = 0; i < opps.size(); ++i) {
    const auto r = impute_bayes_blup(ctx, opps[i], 3.0);
    CAPTURE(opps[i].id);
    CHECK(std::abs(r.score.value() - expected[i]) < 0.002);
    CHECK(std::abs(r.adjustment - 0.196) < 0.002);
    CHECK(r.method == Method::kBayesBlup);
  }
  // Already played, or W itself.
  CHECK_THROWS_AS(impute_bayes_blup(ctx, player("giri", 2753), 3.0), Error);
  CHECK_THROWS_AS(impute_bayes_blup(ctx, player("firouzja", 2759), 3.0), Error);
  CHECK_THROWS_AS(WithdrawalContext(player("w", 2700), {}), Error);
}

TEST_CASE("zero adjustment leaves the Elo expectation") {
  // W at 2700 facing two 2700s scoring 0.5 each: 1 - 0.5 - 0.5 = 0.
  const WithdrawalContext ctx(player("w", 2700), {{player("a", 2700), GameScore(0.5)},
                                                   {player("b", 2700), GameScore(0.5)}});
  const auto opp = player("c", 2800);
  CHECK(impute_bayes_blup(ctx, opp, 3).score.value() ==
        elo_expectation(opp.rating, ctx.withdrawn().rating));
  CHECK(impute_for_withdrawn(ctx, opp, 3).score.value() ==
        doctest::Approx(1.0 - elo_expectation(opp.rating, ctx.withdrawn().rating)));
}

TEST_CASE("simple policies") {
  const auto ctx = bucharest_context();
  const auto& opps = bucharest_unplayed();
  for (const auto& o : opps) CHECK(impute_forfeit(o).score.value() == 1.0);
  CHECK(std::abs(impute_pure_elo(ctx.withdrawn(), opps[0]).score.value() - 0.504) < 0.001);
  CHECK(std::abs(impute_pure_elo(ctx.withdrawn(), opps[3]).score.value() - 0.355) < 0.001);
  CHECK(impute_pure_elo(player("a", 2500), player("b", 2500)).score.value() == 0.5);
  CHECK(impute_pure_performance(ctx, opps[0]).score.value() == doctest::Approx(0.8));

  const WithdrawalContext perfect(player("w", 2700), {{player("a", 2600), GameScore(1.0)}});
  CHECK(impute_pure_performance(perfect, opps[0]).score.value() == 0.0);
  const WithdrawalContext even(player("w", 2700), {{player("a", 2600), GameScore(1.0)},
                                                    {player("b", 2600), GameScore(0.0)}});
  CHECK(impute_pure_performance(even, opps[0]).score.value() == 0.5);
}

TEST_CASE("impute_annulment_equivalent") {
  // Opponent index 1 scores 6/8 against players 2..9; W is index 0.
  std::vector<PlayerRecord> players;
  for (int i = 0; i < 10; ++i) players.push_back(player("p" + std::to_string(i), 2600 + i));
  Crosstable t(players);
  for (int j = 2; j < 10; ++j) t.record(1, j, GameScore::played(j < 8 ? 1.0 : 0.0));
  t.record(0, 1, GameScore::played(0.0));
  CHECK(impute_annulment_equivalent(t, 0, 1).score.value() == 0.75);

  Crosstable draws(players);
  for (int j = 2; j < 6; ++j) draws.record(1, j, GameScore::played(0.5));
  CHECK(impute_annulment_equivalent(draws, 0, 1).score.value() == 0.5);

  Crosstable half(players);
  const double r[] = {1, 1, 1, 0.5, 0, 0, 0};
  for (int j = 2; j < 9; ++j) half.record(1, j, GameScore::played(r[j - 2]));
  CHECK(impute_annulment_equivalent(half, 0, 1).score.value() == 0.5);

  Crosstable empty(players);
  try {
    impute_annulment_equivalent(empty, 0, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateContext);
  }
}

TEST_CASE("impute_for_withdrawn is the complement") {
  const auto ctx = bucharest_context();
  const auto& opps = bucharest_unplayed();
  CHECK(std::abs(impute_for_withdrawn(ctx, opps[0], 3).score.value() - 0.300) < 0.002);
  CHECK(std::abs(impute_for_withdrawn(ctx, opps[3], 3).score.value() - 0.449) < 0.002);
}

TEST_CASE("posterior_variance and credible_interval") {
  CHECK(posterior_variance(5, 3, 0.25) == doctest::Approx(0.03125));
  CHECK(std::abs(std::sqrt(posterior_variance(5, 3, 0.25)) - 0.177) < 0.001);
  CHECK(posterior_variance(0, 3, 0.25) == doctest::Approx(0.25 / 3));
  CHECK(posterior_variance(1000000, 3, 0.25) < 1e-6);
  CHECK(std::abs(normal_quantile_two_sided(0.95) - 1.959964) < 1e-6);
  CHECK_THROWS_AS(normal_quantile_two_sided(1.0), Error);

  const auto ctx = bucharest_context();
  const auto r = impute_bayes_blup(ctx, bucharest_unplayed()[0], 3);
  const auto ci = credible_interval(r, 5, 3, 0.25, 0.95);
  CHECK(std::abs(ci.lo - 0.354) < 0.002);
  CHECK(ci.hi == 1.0);
  const auto point = credible_interval(r, 5, 3, 0.25, 0.0);
  CHECK(point.lo == r.score.value());
  CHECK(point.hi == r.score.value());
  const auto narrow = credible_interval(r, 1000000, 3, 0.25, 0.95);
  CHECK(narrow.hi - narrow.lo < 0.01);
  try {
    credible_interval(impute_forfeit(bucharest_unplayed()[0]), 5, 3, 0.25, 0.95);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnsupportedMethod);
  }
}

TEST_CASE("variance components") {
  const auto vc = VarianceComponents::from_prior(3.0, 0.25);
  CHECK(std::abs(vc.k() - 3.0) < 1e-12);
  CHECK_THROWS_AS(VarianceComponents::from_prior(-1.0, 0.25), Error);
}

TEST_CASE("sensitivity_sweep") {
  const auto ctx = bucharest_context();
  const std::vector<PlayerRecord> opps{bucharest_unplayed()[0], bucharest_unplayed()[3]};
  const std::vector<double> ks{1, 2, 3, 4, 5};
  const auto rows = sensitivity_sweep(ctx, opps, ks);
  REQUIRE(rows.size() == 5);
  CHECK(std::abs(rows[2].scores[0] - 0.700) < 0.002);
  CHECK(std::abs(rows[2].scores[1] - 0.551) < 0.002);
  CHECK(std::abs(rows[2].spread - 0.149) < 0.002);
  CHECK(std::abs(rows[0].scores[0] - 0.765) < 0.002);
  CHECK(std::abs(rows[0].scores[1] - 0.616) < 0.002);
  // Every non-k=3 row follows the formula exactly.
  const double eps = ctx.mean_score() + ctx.mean_played_expectation();
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < opps.size(); ++i) {
      const double e = elo_expectation(opps[i].rating, ctx.withdrawn().rating);
      CHECK(row.scores[i] == doctest::Approx(e + 5.0 / (5.0 + row.k) * (1.0 - eps)).epsilon(1e-12));
    }
    CHECK(row.spread == doctest::Approx(rows[0].spread).epsilon(1e-12));
  }
  const std::vector<double> huge{1e9};
  const auto far = sensitivity_sweep(ctx, opps, huge);
  CHECK(std::abs(far[0].scores[0] - elo_expectation(opps[0].rating, ctx.withdrawn().rating)) < 1e-6);
  const std::vector<double> bad{3, 0};
  CHECK_THROWS_AS(sensitivity_sweep(ctx, opps, bad), Error);
}

TEST_CASE("property: Elo complement identity") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> r(1000.0, 3000.0);
  for (int i = 0; i < kPropertyCases; ++i) {
    const EloRating a(r(rng)), b(r(rng));
    REQUIRE(std::abs(elo_expectation(a, b) + elo_expectation(b, a) - 1.0) < 1e-12);
  }
}

TEST_CASE("property: point conservation before clamping") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> kd(0.1, 20.0);
  for (int i = 0; i < kPropertyCases; ++i) {
    const auto c = random_case(rng);
    const double k = kd(rng);
    for (const auto& o : c.unplayed) {
      const double sum = impute_bayes_blup(c.ctx, o, k).unclamped +
                         impute_for_withdrawn(c.ctx, o, k).unclamped;
      REQUIRE(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("property: shrinkage bounds") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> kd(0.1, 20.0), th(0.01, 0.99);
  std::uniform_int_distribution<int> nd(1, 30);
  for (int i = 0; i < kPropertyCases; ++i) {
    const int n = nd(rng);
    const double p = 0.5 * std::uniform_int_distribution<int>(0, 2 * n)(rng);
    const double theta0 = th(rng);
    const double sbar = p / n;
    if (theta0 == sbar) continue;
    const double m = beta_posterior({kd(rng), theta0}, p, n).mean();
    REQUIRE(m > std::min(theta0, sbar));
    REQUIRE(m < std::max(theta0, sbar));
  }
}

TEST_CASE("property: homogeneous field coincidence") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> rd(2300.0, 2900.0), kd(0.1, 20.0);
  std::uniform_int_distribution<int> nd(1, 9), res(0, 2);
  for (int i = 0; i < kPropertyCases; ++i) {
    const double r0 = rd(rng);
    const int n = nd(rng);
    std::vector<PlayedGame> played;
    for (int g = 0; g < n; ++g) played.push_back({player("p" + std::to_string(g), r0), GameScore(0.5 * res(rng))});
    const WithdrawalContext ctx(player("w", rd(rng)), std::move(played));
    const double k = kd(rng);
    const auto opp = player("u", r0);
    const double e0 = elo_expectation(opp.rating, ctx.withdrawn().rating);
    const double expected = n / (n + k) * (1.0 - ctx.mean_score()) + k / (n + k) * e0;
    REQUIRE(std::abs(impute_bayes_blup(ctx, opp, k).unclamped - expected) < 1e-12);
  }
}

TEST_CASE("property: consistency as n grows") {
  // s̄ = 0.3 on a homogeneous field; gap to the limit is k/(n+k)*|c|.
  const double k = 3.0;
  double previous = 1.0;
  for (int n : {10, 100, 10000}) {
    std::vector<PlayedGame> played;
    for (int g = 0; g < n; ++g) {
      played.push_back({player("p" + std::to_string(g), 2700), GameScore(g < 3 * n / 10 ? 1.0 : 0.0)});
    }
    const WithdrawalContext ctx(player("w", 2750), std::move(played));
    const auto opp = player("u", 2700);
    const double e = elo_expectation(opp.rating, ctx.withdrawn().rating);
    const double c = 1.0 - ctx.mean_score() - ctx.mean_played_expectation();
    const double limit = e + c;
    CHECK(limit == doctest::Approx(0.7).epsilon(1e-12));  // 1 - s̄ on a homogeneous field
    const double gap = std::abs(impute_bayes_blup(ctx, opp, k).unclamped - limit);
    CHECK(gap == doctest::Approx(k / (n + k) * std::abs(c)).epsilon(1e-9));
    CHECK(gap < previous / 5.0);
    previous = gap;
  }
}

TEST_CASE("property: rank preservation and uniform shift") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> kd(0.1, 20.0);
  for (int i = 0; i < kPropertyCases; ++i) {
    auto c = random_case(rng);
    const double k = kd(rng);
    std::sort(c.unplayed.begin(), c.unplayed.end(),
              [](const PlayerRecord& a, const PlayerRecord& b) { return a.rating < b.rating; });
    double prev = -1e9;
    double delta = 0.0;
    for (std::size_t j = 0; j < c.unplayed.size(); ++j) {
      const auto r = impute_bayes_blup(c.ctx, c.unplayed[j], k);
      if (j > 0 && c.unplayed[j].rating > c.unplayed[j - 1].rating) REQUIRE(r.unclamped > prev);
      const double shift = r.unclamped - r.elo_expectation;
      if (j == 0) delta = shift;
      REQUIRE(std::abs(shift - delta) < 1e-12);
      prev = r.unclamped;
    }
  }
}

TEST_CASE("property: posterior variance monotone") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> kd(0.1, 20.0), sd(0.01, 1.0);
  std::uniform_int_distribution<int> nd(0, 1000);
  for (int i = 0; i < kPropertyCases; ++i) {
    const double k = kd(rng), s = sd(rng);
    const int n = nd(rng);
    REQUIRE(posterior_variance(n + 1, k, s) < posterior_variance(n, k, s));
    REQUIRE(posterior_variance(n, k, s * 1.5) > posterior_variance(n, k, s));
  }
}

TEST_CASE("oracle: homogeneous BLUP equals integrated Beta posterior mean") {
  // Four-player homogeneous field: W and three opponents rated r0.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rd(2400.0, 2900.0), kd(0.5, 10.0);
  std::uniform_int_distribution<int> nd(1, 2), res(0, 2);
  for (int i = 0; i < 100; ++i) {
    const double r0 = rd(rng);
    const double rw = rd(rng);
    const double k = kd(rng);
    const int n = nd(rng);
    std::vector<PlayedGame> played;
    for (int g = 0; g < n; ++g) played.push_back({player("p" + std::to_string(g), r0), GameScore(0.5 * res(rng))});
    const WithdrawalContext ctx(player("w", rw), played);

    // W's prior rate against an r0 opponent, then the conjugate kernel.
    const double theta0 = 1.0 / (1.0 + std::pow(10.0, (r0 - rw) / 400.0));
    const double p = ctx.total_points();
    const double oracle = 1.0 - integrated_beta_mean(k * theta0 + p, k * (1.0 - theta0) + n - p);
    CAPTURE(i);
    REQUIRE(std::abs(impute_bayes_blup(ctx, player("u", r0), k).unclamped - oracle) < 1e-6);
  }
}
