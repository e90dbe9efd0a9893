#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qav/error.hpp"
#include "qav/metrics.hpp"

using namespace qav;

TEST_CASE("fmr and fnmr count matches at score >= t") {
  const ScoreSet s({0.5, 0.7, 0.9}, {0.1, 0.3, 0.5, 0.7});
  CHECK(fmr_at(0.5, s) == 0.5);
  CHECK(fmr_at(0.51, s) == 0.25);
  CHECK(fnmr_at(0.5, s) == 0.0);
  CHECK(fnmr_at(0.51, s) == doctest::Approx(1.0 / 3.0));
  CHECK(fmr_at(-10.0, s) == 1.0);
  CHECK(fnmr_at(10.0, s) == 1.0);
}

TEST_CASE("max_matches_at_fmr") {
  CHECK(max_matches_at_fmr(0.01, 1000) == 10);
  CHECK(max_matches_at_fmr(0.0099, 1000) == 9);
  CHECK(max_matches_at_fmr(1e-5, 1000) == 0);
  CHECK(max_matches_at_fmr(0.3, 10) == 3);
  CHECK(max_matches_at_fmr(0.5, 0) == 0);
}

TEST_CASE("threshold_at_fmr") {
  const ScoreSet s({0.9}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  CHECK(threshold_at_fmr(0.3, s) == 0.8);
  CHECK(threshold_at_fmr(0.35, s) == 0.8);
  CHECK(threshold_at_fmr(0.1, s) == 1.0);
  SUBCASE("no observed score reaches the target") {
    CHECK(threshold_at_fmr(0.05, s) == 1.0 + kThresholdEpsilon);
    CHECK(fmr_at(threshold_at_fmr(0.05, s), s) == 0.0);
  }
  SUBCASE("ties at the cut step up to the next distinct score") {
    const ScoreSet t({0.9}, {0.1, 0.2, 0.5, 0.5, 0.5, 0.8});
    CHECK(threshold_at_fmr(0.7, t) == 0.5);
    CHECK(threshold_at_fmr(0.5, t) == 0.8);
    CHECK(fmr_at(0.8, t) <= 0.5);
  }
  SUBCASE("a target near 1 keeps the invariant") {
    const double t = threshold_at_fmr(0.999, s);
    CHECK(fmr_at(t, s) <= 0.999);
    CHECK(t == 0.2);
  }
  SUBCASE("target outside (0, 1)") {
    CHECK_THROWS_AS(threshold_at_fmr(0.0, s), Error);
    CHECK_THROWS_AS(threshold_at_fmr(1.0, s), Error);
  }
}

TEST_CASE("eer and auc on separated and identical sets") {
  const ScoreSet separated({0.8, 0.9, 0.95}, {0.1, 0.2, 0.3});
  CHECK(eer(separated).eer == 0.0);
  CHECK(roc_auc(separated) == 1.0);

  const ScoreSet same({0.5, 0.5}, {0.5, 0.5});
  CHECK(roc_auc(same) == 0.5);

  const ScoreSet reversed({0.1, 0.2}, {0.8, 0.9});
  CHECK(roc_auc(reversed) == 0.0);
  CHECK(eer(reversed).eer == 1.0);
}

TEST_CASE("eer hand example") {
  // At t = 0.6: one of four imposters accepted, one of four genuines rejected.
  const ScoreSet s({0.4, 0.6, 0.8, 0.9}, {0.1, 0.2, 0.3, 0.7});
  const auto e = eer(s);
  CHECK(e.eer == 0.25);
  CHECK(e.threshold == 0.6);
}

TEST_CASE("empty sides and non-finite scores") {
  CHECK_THROWS_AS(fmr_at(0.1, ScoreSet({0.5}, {})), Error);
  CHECK_THROWS_AS(fnmr_at(0.1, ScoreSet({}, {0.5})), Error);
  CHECK_THROWS_AS(eer(ScoreSet({}, {0.5})), Error);
  CHECK_THROWS_AS(ScoreSet({std::nan("")}, {0.5}), Error);
}

TEST_CASE("roc_curve is ascending with monotone rates") {
  std::mt19937_64 rng(11);
  const auto gen = oracle::random_scores(rng, 80, 1.0, true);
  const auto imp = oracle::random_scores(rng, 90, 0.0, true);
  const ScoreSet s(gen, imp);
  const auto roc = roc_curve(s);
  REQUIRE(!roc.empty());
  for (std::size_t i = 1; i < roc.size(); ++i) {
    CHECK(roc[i].threshold > roc[i - 1].threshold);
    CHECK(roc[i].fmr <= roc[i - 1].fmr);
    CHECK(roc[i].fnmr >= roc[i - 1].fnmr);
  }
  for (const auto& p : roc) {
    CHECK(p.fmr == oracle::fmr(p.threshold, imp));
    CHECK(p.fnmr == oracle::fnmr(p.threshold, gen));
  }
}

TEST_CASE("metrics agree with brute-force oracles") {
  std::mt19937_64 rng(2);
  for (int set = 0; set < 60; ++set) {
    const bool ties = set % 3 == 0;
    const auto gen = oracle::random_scores(rng, 1 + rng() % 120, 1.2, ties);
    const auto imp = oracle::random_scores(rng, 1 + rng() % 120, 0.0, ties);
    const ScoreSet s(gen, imp);
    for (double f : {0.005, 0.02, 0.1, 0.25, 0.5, 0.75}) {
      const double t = threshold_at_fmr(f, s);
      CHECK(t == oracle::threshold_at_fmr(f, imp));
      CHECK(fmr_at(t, s) <= f);
    }
    const auto e = eer(s);
    const auto want = oracle::eer(gen, imp);
    CHECK(e.eer == want.eer);
    CHECK(e.threshold == want.threshold);
    CHECK(roc_auc(s) == doctest::Approx(oracle::auc(gen, imp)).epsilon(1e-12));
  }
}

TEST_CASE("evaluate collects operating points in request order") {
  const ScoreSet s({0.6, 0.7, 0.8, 0.9}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.65});
  const double targets[] = {0.5, 0.2};
  const auto r = evaluate(s, targets);
  REQUIRE(r.operating_points.size() == 2);
  CHECK(r.operating_points[0].fmr_target == 0.5);
  CHECK(r.operating_points[0].threshold == 0.4);
  CHECK(r.operating_points[0].fmr == 0.5);
  CHECK(r.operating_points[1].threshold == 0.65);
  CHECK(r.operating_points[1].fnmr == 0.25);
  CHECK(r.auc == doctest::Approx(23.0 / 24.0));
}

TEST_CASE("threshold_at_fmr does not rise with the target") {
  std::mt19937_64 rng(21);
  for (int set = 0; set < 40; ++set) {
    const ScoreSet s(oracle::random_scores(rng, 50, 1.0, set % 2 == 0),
                     oracle::random_scores(rng, 1 + rng() % 300, 0.0, set % 2 == 0));
    double previous = threshold_at_fmr(0.001, s);
    for (double f = 0.002; f < 0.99; f *= 1.3) {
      const double t = threshold_at_fmr(f, s);
      CHECK(t <= previous);
      previous = t;
    }
  }
}
