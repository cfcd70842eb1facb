// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Usage: fairplay_acceptance [fixture.json]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fairplay/montecarlo.hpp"
#include "fairplay/standings.hpp"
#include "fairplay/tournament_file.hpp"

using namespace fairplay;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

struct Outcome {
  bool pass;
  std::string detail;
};

PlayerRecord rec(const std::string& id, double r) { return {id, id, EloRating(r)}; }

Outcome golden(const std::string& path) {
  const auto t0 = Clock::now();
  const auto f = load_tournament(path);
  const auto ruling = rule_withdrawal(f.table, f.withdrawn, Method::kBayesBlup, 3.0, f.sigma2);
  const auto& ctx = *ruling.context;
  const double w = blup_weight(ctx.n(), 3.0);
  const double theta0 = prior_theta0(ctx.withdrawn().rating, ctx.mean_opponent_rating());
  const double theta_hat = beta_posterior({3.0, theta0}, ctx.total_points(), ctx.n()).mean();
  const double ebar = ctx.mean_played_expectation();
  const double delta = ruling.imputations.front().adjustment;
  bool ok = ctx.n() == 5 && ctx.total_points() == 1.0 && w == 0.625 &&
            near(theta_hat, 0.316, 0.002) && near(ebar, 0.487, 0.002) && near(delta, 0.196, 0.002);
  const std::pair<const char*, double> expected[] = {
      {"keymer", 0.700}, {"so", 0.689}, {"van-foreest", 0.663}, {"deac", 0.551}};
  char buf[256];
  std::string scores;
  for (auto [id, v] : expected) {
    const auto j = f.table.index_of(id);
    const auto it = std::find(ruling.unplayed.begin(), ruling.unplayed.end(), j);
    const double s = ruling.imputations[it - ruling.unplayed.begin()].score.value();
    ok = ok && near(s, v, 0.002);
    std::snprintf(buf, sizeof buf, " %s=%.4f", id, s);
    scores += buf;
  }
  const double elapsed = seconds_since(t0);
  ok = ok && elapsed < 1.0;
  std::snprintf(buf, sizeof buf, "w=%.3f theta=%.4f Ebar=%.4f delta=%.4f", w, theta_hat, ebar, delta);
  return {ok, std::string(buf) + scores + " (" + std::to_string(elapsed) + " s)"};
}

Outcome posterior(const std::string& path) {
  const auto f = load_tournament(path);
  const auto ruling = rule_withdrawal(f.table, f.withdrawn, Method::kBayesBlup);
  const auto& ctx = *ruling.context;
  const double theta0 = prior_theta0(ctx.withdrawn().rating, ctx.mean_opponent_rating());
  const auto post = beta_posterior({3.0, theta0}, ctx.total_points(), ctx.n());
  char buf[128];
  std::snprintf(buf, sizeof buf, "Beta(%.4f, %.4f)", post.alpha, post.beta);
  return {near(post.alpha, 2.53, 0.01) && near(post.beta, 5.47, 0.01), buf};
}

WithdrawalContext random_ctx(std::mt19937_64& rng, std::vector<PlayerRecord>& unplayed) {
  std::uniform_real_distribution<double> rating(2200.0, 2900.0);
  const int n = std::uniform_int_distribution<int>(1, 8)(rng);
  std::vector<PlayedGame> played;
  for (int i = 0; i < n; ++i) {
    played.push_back({rec("p" + std::to_string(i), rating(rng)),
                      GameScore(0.5 * std::uniform_int_distribution<int>(0, 2)(rng))});
  }
  unplayed.clear();
  for (int i = 0; i < 4; ++i) unplayed.push_back(rec("u" + std::to_string(i), rating(rng)));
  std::sort(unplayed.begin(), unplayed.end(),
            [](const PlayerRecord& a, const PlayerRecord& b) { return a.rating < b.rating; });
  return WithdrawalContext(rec("w", rating(rng)), std::move(played));
}

Outcome properties() {
  constexpr int kCases = 10000;
  std::mt19937_64 rng(20260515);
  std::uniform_real_distribution<double> kd(0.1, 20.0), rd(1000.0, 3000.0), th(0.01, 0.99);
  std::vector<std::string> failed;
  auto check = [&](const char* name, bool ok) {
    if (!ok && std::find(failed.begin(), failed.end(), name) == failed.end()) failed.push_back(name);
  };
  std::vector<PlayerRecord> unplayed;
  for (int i = 0; i < kCases; ++i) {
    const EloRating a(rd(rng)), b(rd(rng));
    check("complement", std::abs(elo_expectation(a, b) + elo_expectation(b, a) - 1.0) < 1e-12);

    const auto ctx = random_ctx(rng, unplayed);
    const double k = kd(rng);
    double prev = -1e9, delta = 0.0;
    for (std::size_t j = 0; j < unplayed.size(); ++j) {
      const auto r = impute_bayes_blup(ctx, unplayed[j], k);
      check("conservation",
            std::abs(r.unclamped + impute_for_withdrawn(ctx, unplayed[j], k).unclamped - 1.0) < 1e-12);
      if (j > 0 && unplayed[j].rating > unplayed[j - 1].rating) check("rank", r.unclamped > prev);
      if (j == 0) delta = r.unclamped - r.elo_expectation;
      check("shift", std::abs(r.unclamped - r.elo_expectation - delta) < 1e-12);
      prev = r.unclamped;
    }

    const int n = std::uniform_int_distribution<int>(1, 30)(rng);
    const double p = 0.5 * std::uniform_int_distribution<int>(0, 2 * n)(rng);
    const double theta0 = th(rng);
    const double m = beta_posterior({k, theta0}, p, n).mean();
    if (theta0 != p / n) check("shrinkage", m > std::min(theta0, p / n) && m < std::max(theta0, p / n));

    const double r0 = rd(rng);
    std::vector<PlayedGame> homo;
    for (int g = 0; g < n; ++g) {
      homo.push_back({rec("h" + std::to_string(g), r0),
                      GameScore(0.5 * std::uniform_int_distribution<int>(0, 2)(rng))});
    }
    const WithdrawalContext hctx(rec("w", rd(rng)), std::move(homo));
    const double e0 = elo_expectation(EloRating(r0), hctx.withdrawn().rating);
    const double want = n / (n + k) * (1.0 - hctx.mean_score()) + k / (n + k) * e0;
    check("homogeneous", std::abs(impute_bayes_blup(hctx, rec("u", r0), k).unclamped - want) < 1e-12);

    const double s2 = th(rng);
    check("variance", posterior_variance(n + 1, k, s2) < posterior_variance(n, k, s2) &&
                          posterior_variance(n, k, 1.5 * s2) > posterior_variance(n, k, s2));
  }
  // Convergence at n = 10, 100, 10000 on a homogeneous field with s̄ = 0.3.
  double last_gap = 1.0;
  for (int n : {10, 100, 10000}) {
    std::vector<PlayedGame> games;
    for (int g = 0; g < n; ++g) {
      games.push_back({rec("c" + std::to_string(g), 2700), GameScore(g < 3 * n / 10 ? 1.0 : 0.0)});
    }
    const WithdrawalContext ctx(rec("w", 2750), std::move(games));
    const double gap = std::abs(impute_bayes_blup(ctx, rec("u", 2700), 3.0).unclamped - 0.7);
    check("convergence", gap < last_gap / 5.0);
    last_gap = gap;
  }
  std::string detail = std::to_string(kCases) + " cases x 8 properties";
  for (const auto& f : failed) detail += " FAILED:" + f;
  return {failed.empty(), detail};
}

Outcome oracle() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rd(2400.0, 2900.0), kd(0.5, 10.0);
  boost::math::quadrature::tanh_sinh<double> q;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double r0 = rd(rng), rw = rd(rng), k = kd(rng);
    const int n = std::uniform_int_distribution<int>(1, 2)(rng);
    std::vector<PlayedGame> games;
    for (int g = 0; g < n; ++g) {
      games.push_back({rec("o" + std::to_string(g), r0),
                       GameScore(0.5 * std::uniform_int_distribution<int>(0, 2)(rng))});
    }
    const WithdrawalContext ctx(rec("w", rw), games);
    const double theta0 = 1.0 / (1.0 + std::pow(10.0, (r0 - rw) / 400.0));
    const double a = k * theta0 + ctx.total_points();
    const double b = k * (1.0 - theta0) + n - ctx.total_points();
    // Map each half of [0, 1] so the endpoint singularities vanish:
    // t = u^(1/a) on the left, 1 - t = v^(1/b) on the right.
    auto moment = [&](double power) {
      auto left = [&](double u) {
        const double t = std::pow(u, 1.0 / a);
        return std::pow(t, power) * std::pow(1.0 - t, b - 1.0) / a;
      };
      auto right = [&](double v) {
        const double s = std::pow(v, 1.0 / b);
        return std::pow(1.0 - s, power + a - 1.0) / b;
      };
      return q.integrate(left, 0.0, std::pow(0.5, a)) + q.integrate(right, 0.0, std::pow(0.5, b));
    };
    const double mean = moment(1.0) / moment(0.0);
    worst = std::max(worst, std::abs(impute_bayes_blup(ctx, rec("u", r0), k).unclamped - (1.0 - mean)));
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "100 cases, max |diff| = %.2e", worst);
  return {worst < 1e-6, buf};
}

Outcome reduced_scale() {
  const auto t0 = Clock::now();
  mc::GridConfig cfg;
  cfg.tournaments = 1000;
  const auto report = mc::run_grid(cfg);
  bool a = true, b = true, c = true, d = true, e = true;
  for (const auto& r : report.scenarios) {
    using mc::EvalMethod;
    a = a && r.of(EvalMethod::kAnnul).rmse() < r.of(EvalMethod::kForfeit).rmse();
    if (r.spec.form_delta < 0) {
      const double bay = r.of(EvalMethod::kBayes).rmse();
      b = b && bay < r.fide().rmse() && bay < r.of(EvalMethod::kElo).rmse() &&
          bay < r.of(EvalMethod::kPerf).rmse();
      e = e && r.of(EvalMethod::kElo).bias() < 0;
    }
    if (r.spec.form_delta > 0) e = e && r.of(EvalMethod::kElo).bias() > 0;
    if (r.spec.fide_rule() == mc::FideRule::kForfeit) c = c && r.fide().bias() > 0.30;
    d = d && std::abs(r.of(EvalMethod::kPerf).bias()) < 0.02;
  }
  const double elapsed = seconds_since(t0);
  std::string detail = std::string("(a)") + (a ? "ok" : "FAIL") + " (b)" + (b ? "ok" : "FAIL") +
                       " (c)" + (c ? "ok" : "FAIL") + " (d)" + (d ? "ok" : "FAIL") + " (e)" +
                       (e ? "ok" : "FAIL") + " in " + std::to_string(elapsed) + " s";
  return {a && b && c && d && e && elapsed < 120.0, detail};
}

Outcome full_scale() {
  const auto t0 = Clock::now();
  mc::GridConfig cfg;
  cfg.tournaments = 10000;
  const auto report = mc::run_grid(cfg);
  const auto& s = report.summary;
  double forfeit_imp = 0.0;
  for (const auto& imp : s.by_rule) {
    if (imp.label.find("orfeit") != std::string::npos) forfeit_imp = imp.vs_fide;
  }
  double cell = -1.0;
  for (const auto& r : report.scenarios) {
    if (r.spec.field == mc::FieldShape::kNarrow && r.spec.timing == 5 && r.spec.form_delta == 0) {
      cell = r.fide().rmse();
    }
  }
  const double elapsed = seconds_since(t0);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "overall improvement %.1f%%, forfeit-scenario improvement %.1f%%, "
                "narrow/n=5/neutral FIDE RMSE %.3f, %.1f s",
                100 * s.overall_improvement, 100 * forfeit_imp, cell, elapsed);
  return {s.overall_improvement >= 0.20 && forfeit_imp >= 0.35 && near(cell, 0.654, 0.05) &&
              elapsed < 20 * 60,
          buf};
}

Outcome determinism() {
  mc::GridConfig cfg;
  cfg.tournaments = 500;
  const auto a = mc::run_grid(cfg);
  const auto b = mc::run_grid(cfg);
  const bool same = mc::rmse_table_csv(a) == mc::rmse_table_csv(b) &&
                    mc::bias_table_csv(a) == mc::bias_table_csv(b) &&
                    mc::summary_csv(a) == mc::summary_csv(b) &&
                    mc::rule_comparison_csv(a) == mc::rule_comparison_csv(b) &&
                    mc::rmse_table_csv(a) == mc::rmse_table_csv(mc::run_grid_serial(cfg));
  return {same, "two parallel runs and a serial run, 500 per scenario"};
}

Outcome sensitivity(const std::string& path) {
  const auto f = load_tournament(path);
  const auto ruling = rule_withdrawal(f.table, f.withdrawn, Method::kBayesBlup);
  const auto& ctx = *ruling.context;
  std::vector<PlayerRecord> opps;
  for (auto j : ruling.unplayed) opps.push_back(f.table.player(j));
  const std::vector<double> ks{1, 2, 3, 4, 5};
  const auto rows = sensitivity_sweep(ctx, opps, ks);
  const double table1[] = {0.700, 0.689, 0.663, 0.551};
  bool ok = true;
  for (std::size_t i = 0; i < opps.size(); ++i) ok = ok && near(rows[2].scores[i], table1[i], 0.002);
  const double c = 1.0 - ctx.mean_score() - ctx.mean_played_expectation();
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < opps.size(); ++i) {
      const double e = elo_expectation(opps[i].rating, ctx.withdrawn().rating);
      ok = ok && std::abs(row.scores[i] - (e + ctx.n() / (ctx.n() + row.k) * c)) < 1e-12;
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "k=1 Keymer %.3f Deac %.3f; spread %.4f at every k", rows[0].scores[0],
                rows[0].scores[3], rows[0].spread);
  return {ok, buf};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : FAIRPLAY_DATA_DIR "/bucharest2026.json";
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"golden-bucharest", [&] { return golden(path); }},
      {"posterior-reproduction", [&] { return posterior(path); }},
      {"property-suite", properties},
      {"oracle-equivalence", oracle},
      {"monte-carlo-reduced", reduced_scale},
      {"monte-carlo-full", full_scale},
      {"determinism", determinism},
      {"sensitivity", [&] { return sensitivity(path); }},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %-24s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
