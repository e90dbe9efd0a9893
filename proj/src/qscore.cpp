#include "qav/qscore.hpp"

#include <algorithm>
#include <cmath>

#include "qav/error.hpp"

namespace qav {

std::string_view to_string(Label label) noexcept {
  return label == Label::genuine ? "genuine" : "imposter";
}

Label parse_label(std::string_view text) {
  if (text == "genuine") return Label::genuine;
  if (text == "imposter" || text == "impostor") return Label::imposter;
  throw Error(ErrorCode::parse, "unknown label '" + std::string(text) + "'");
}

double weight(double s, const WeightParams& p) {
  if (!std::isfinite(s) || !std::isfinite(p.alpha) || !std::isfinite(p.beta)) {
    throw Error(ErrorCode::non_finite, "weight() needs finite score and parameters");
  }
  return std::min(0.0, p.beta * s - p.alpha);
}

double qa_score(double s, double q1, double q2, const WeightParams& p) {
  if (!(q1 > 0.0) || !(q2 > 0.0)) {
    throw Error(ErrorCode::non_positive_quality, "qualities must be positive");
  }
  if (!std::isfinite(q1) || !std::isfinite(q2)) {
    throw Error(ErrorCode::non_finite, "qualities must be finite");
  }
  return weight(s, p) * std::min(q1, q2) + s;
}

std::vector<double> qa_score_batch(std::span<const ScoredPair> pairs,
                                   const WeightParams& p) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    try {
      out.push_back(qa_score(pairs[i].raw_score, pairs[i].q_min, pairs[i].q_min, p));
    } catch (const Error& e) {
      throw Error(e.code(), "pair " + pairs[i].id_a + "/" + pairs[i].id_b, i);
    }
  }
  return out;
}

}  // namespace qav
