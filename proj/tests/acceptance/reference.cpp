// Reproduces the reference 100-layer parameters from externally supplied
// Adience embeddings. Exit code 77 (skipped) when they are not available:
//   QAV_REFERENCE_EMBEDDINGS  embedding file (text or binary)
//   QAV_REFERENCE_PROTOCOL    pair protocol CSV

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "qav/calib.hpp"
#include "qav/dataio.hpp"
#include "qav/qscore.hpp"

int main() {
  const char* embeddings = std::getenv("QAV_REFERENCE_EMBEDDINGS");
  const char* protocol = std::getenv("QAV_REFERENCE_PROTOCOL");
  if (!embeddings || !protocol) {
    std::printf("SKIP  reference reproduction: QAV_REFERENCE_EMBEDDINGS / QAV_REFERENCE_PROTOCOL not set\n");
    return 77;
  }
  const auto samples = qav::load_embeddings(embeddings);
  const auto set = qav::build_comparison_set(samples, qav::load_protocol(protocol));
  const auto r = qav::calibrate(set, qav::CalibConfig{});
  const auto& want = qav::kReferenceParams100;
  const bool pass = std::fabs(r.params.alpha - want.alpha) <= 0.005 &&
                    std::fabs(r.params.beta - want.beta) <= 0.005;
  std::printf("%s  reference reproduction: alpha %.6f (want %.6f), beta %.6f (want %.6f), r2 %.4f\n",
              pass ? "PASS" : "FAIL", r.params.alpha, want.alpha, r.params.beta, want.beta, r.fit_r2);
  return pass ? 0 : 1;
}
