#include <doctest.h>

#include <cmath>
#include <random>

#include "qav/error.hpp"
#include "qav/fuse.hpp"

using namespace qav;

TEST_CASE("single frame comes back unchanged") {
  const Template t{{{{0.6, 0.8}, 12.5}}, "t"};
  const auto a = aggregate(t);
  CHECK(a.direction == t.frames[0].direction);
  CHECK(a.quality == 12.5);
}

TEST_CASE("same direction, qualities 10 and 30") {
  const Template t{{{{0.0, 1.0, 0.0}, 10.0}, {{0.0, 1.0, 0.0}, 30.0}}, "t"};
  const auto a = aggregate(t);
  CHECK(a.quality == 25.0);
  CHECK(a.direction == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("orthogonal frames of equal quality give the bisector") {
  const Template t{{{{1.0, 0.0}, 7.0}, {{0.0, 1.0}, 7.0}}, "t"};
  const auto a = aggregate(t);
  CHECK(a.quality == 7.0);
  CHECK(a.direction[0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(a.direction[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}

TEST_CASE("homogeneous templates are idempotent") {
  const QualityEmbedding f{{0.1, -0.3, std::sqrt(0.9)}, 41.3};
  const Template t{std::vector<QualityEmbedding>(9, f), "h"};
  const auto a = aggregate(t);
  CHECK(a.direction == f.direction);
  CHECK(a.quality == f.quality);
}

TEST_CASE("opposing frames cancel") {
  const Template t{{{{1.0, 0.0}, 5.0}, {{-1.0, 0.0}, 5.0}}, "c"};
  try {
    aggregate(t);
    FAIL("expected CancellationError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::cancellation);
  }
}

TEST_CASE("invalid templates") {
  CHECK_THROWS_AS(aggregate(Template{{}, "empty"}), Error);
  CHECK_THROWS_AS(aggregate(Template{{{{1.0, 0.0}, 5.0}, {{1.0}, 5.0}}, "d"}), Error);
  CHECK_THROWS_AS(aggregate(Template{{{{1.0, 0.0}, 0.0}}, "q"}), Error);
}

TEST_CASE("random templates: direction inside the cone, quality within bounds") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> q(1.0, 60.0);
  for (int k = 0; k < 50; ++k) {
    Template t;
    const std::size_t frames = 2 + rng() % 10;
    std::vector<double> mean(16, 0.0);
    for (std::size_t f = 0; f < frames; ++f) {
      std::vector<double> v(16);
      for (double& x : v) x = n(rng);
      auto e = decompose(v);
      e.quality = q(rng);
      for (std::size_t i = 0; i < 16; ++i) mean[i] += e.quality * e.direction[i];
      t.frames.push_back(e);
    }
    const auto a = aggregate(t);
    double dot = 0.0, lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < 16; ++i) dot += a.direction[i] * mean[i];
    for (const auto& f : t.frames) {
      lo = std::min(lo, f.quality);
      hi = std::max(hi, f.quality);
    }
    CHECK(dot > 0.0);
    CHECK(a.quality >= lo);
    CHECK(a.quality <= hi);
    CHECK(l2_norm(a.direction) == doctest::Approx(1.0).epsilon(1e-14));
  }
}
