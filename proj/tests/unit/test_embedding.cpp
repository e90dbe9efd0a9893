#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "qav/embedding.hpp"
#include "qav/error.hpp"

using namespace qav;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::invalid_argument;
}

}  // namespace

TEST_CASE("decompose splits magnitude and direction") {
  const std::vector<double> v{3.0, 4.0};
  const auto q = decompose(v);
  CHECK(q.quality == 5.0);
  CHECK(q.direction[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(q.direction[1] == doctest::Approx(0.8).epsilon(1e-15));
  const auto back = recompose(q);
  CHECK(back[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(back[1] == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("decompose of random vectors gives unit directions") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> v(128);
    for (double& x : v) x = 30.0 * n(rng);
    const auto q = decompose(v);
    CHECK(l2_norm(q.direction) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(q.quality == doctest::Approx(l2_norm(v)).epsilon(1e-15));
  }
}

TEST_CASE("invalid vectors are rejected") {
  CHECK(code_of([] { decompose(std::vector<double>{0.0, 0.0}); }) == ErrorCode::zero_norm);
  CHECK(code_of([] { decompose(std::vector<double>{1e-13, 0.0}); }) == ErrorCode::zero_norm);
  CHECK(code_of([] { decompose(std::vector<double>{1.0, std::nan("")}); }) == ErrorCode::non_finite);
  CHECK(code_of([] {
          decompose(std::vector<double>{1.0, std::numeric_limits<double>::infinity()});
        }) == ErrorCode::non_finite);
  CHECK(code_of([] { decompose(std::vector<double>{}); }) == ErrorCode::invalid_argument);
}

TEST_CASE("cosine") {
  const std::vector<double> a{1.0, 2.0, 3.0}, b{-2.0, 0.5, 4.0};
  SUBCASE("identical vectors score 1") { CHECK(cosine(a, a) == doctest::Approx(1.0).epsilon(1e-15)); }
  SUBCASE("scale invariant") {
    const std::vector<double> a7{7.0, 14.0, 21.0};
    CHECK(cosine(a7, b) == doctest::Approx(cosine(a, b)).epsilon(1e-15));
  }
  SUBCASE("symmetric bit for bit") { CHECK(cosine(a, b) == cosine(b, a)); }
  SUBCASE("matches the textbook formula") {
    const double want = (-2.0 + 1.0 + 12.0) / (std::sqrt(14.0) * std::sqrt(20.25));
    CHECK(cosine(a, b) == doctest::Approx(want).epsilon(1e-15));
  }
  SUBCASE("opposite vectors score -1") {
    const std::vector<double> na{-1.0, -2.0, -3.0};
    CHECK(cosine(a, na) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(cosine(a, na) >= -1.0);
  }
  SUBCASE("errors") {
    CHECK(code_of([&] { cosine(a, std::vector<double>{1.0}); }) == ErrorCode::dimension_mismatch);
    CHECK(code_of([&] { cosine(a, std::vector<double>{0.0, 0.0, 0.0}); }) == ErrorCode::zero_norm);
  }
}

TEST_CASE("cosine stays in [-1, 1] for nearly parallel vectors") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(64);
    for (double& x : v) x = n(rng);
    auto w = v;
    for (double& x : w) x *= 3.0;
    const double c = cosine(v, w);
    CHECK(c <= 1.0);
    CHECK(c >= 1.0 - 1e-15);
  }
}

TEST_CASE("error messages carry the code name and position") {
  try {
    decompose(std::vector<double>{1.0, std::nan("")});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("NonFinite") != std::string::npos);
    REQUIRE(e.where());
    CHECK(*e.where() == 1);
  }
}
