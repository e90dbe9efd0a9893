#include <doctest.h>

#include <cmath>

#include "qav/error.hpp"
#include "qav/qscore.hpp"

using namespace qav;

TEST_CASE("weight with the reference constants") {
  const auto& p = kReferenceParams100;
  CHECK(weight(0.2, p) == doctest::Approx(-0.0522428).epsilon(1e-12));
  CHECK(weight(0.0, p) == doctest::Approx(-0.077428).epsilon(1e-12));
  SUBCASE("clamped at and above the zero crossing") {
    CHECK(weight(p.zero_crossing(), p) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(weight(0.62, p) == 0.0);
    CHECK(weight(1.0, p) == 0.0);
  }
  SUBCASE("never positive") {
    for (double s = -1.0; s <= 1.0; s += 0.01) CHECK(weight(s, p) <= 0.0);
  }
}

TEST_CASE("qa_score") {
  const auto& p = kReferenceParams100;
  CHECK(qa_score(0.2, 20.0, 35.0, p) == doctest::Approx(-0.844856).epsilon(1e-12));
  CHECK(qa_score(0.2, 35.0, 20.0, p) == qa_score(0.2, 20.0, 35.0, p));
  SUBCASE("the lower quality gets the larger penalty") {
    CHECK(qa_score(0.3, 30.0, 30.0, p) == doctest::Approx(-0.889506).epsilon(1e-12));
    CHECK(qa_score(0.3, 10.0, 10.0, p) == doctest::Approx(-0.096502).epsilon(1e-12));
  }
  SUBCASE("unchanged above the zero crossing") { CHECK(qa_score(0.7, 5.0, 90.0, p) == 0.7); }
  SUBCASE("errors") {
    CHECK_THROWS_AS(qa_score(0.3, 0.0, 10.0, p), Error);
    CHECK_THROWS_AS(qa_score(0.3, -1.0, 10.0, p), Error);
    CHECK_THROWS_AS(qa_score(std::nan(""), 10.0, 10.0, p), Error);
    CHECK_THROWS_AS(qa_score(0.3, 10.0, INFINITY, p), Error);
  }
}

TEST_CASE("qa_score_batch reports the failing index") {
  std::vector<ScoredPair> pairs(3);
  pairs[0] = {0.5, 10.0, Label::genuine, "a", "b"};
  pairs[1] = {0.1, 20.0, Label::imposter, "a", "c"};
  pairs[2] = {0.4, 0.0, Label::imposter, "b", "c"};
  try {
    qa_score_batch(pairs, kReferenceParams100);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_positive_quality);
    CHECK(e.where() == std::optional<std::size_t>(2));
  }
  pairs[2].q_min = 5.0;
  const auto out = qa_score_batch(pairs, kReferenceParams100);
  REQUIRE(out.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out[i] == qa_score(pairs[i].raw_score, pairs[i].q_min, pairs[i].q_min, kReferenceParams100));
  }
}

TEST_CASE("labels") {
  CHECK(parse_label("genuine") == Label::genuine);
  CHECK(parse_label("imposter") == Label::imposter);
  CHECK(parse_label("impostor") == Label::imposter);
  CHECK_THROWS_AS(parse_label("mated"), Error);
  CHECK(to_string(Label::genuine) == "genuine");
}
