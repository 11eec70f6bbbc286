#include "beamalign/metrics.hpp"

#include "beamalign/errors.hpp"

namespace beamalign {

RSquared compute_r_squared(const std::vector<Vec4>& predicted, const std::vector<Vec4>& actual) {
  if (actual.empty() || predicted.size() != actual.size()) {
    throw ValidationError("R^2 needs equal, non-empty prediction and target sets");
  }
  Vec4 mean = Vec4::Zero();
  for (const auto& a : actual) mean += a;
  mean /= static_cast<double>(actual.size());

  Vec4 ss_res = Vec4::Zero();
  Vec4 ss_tot = Vec4::Zero();
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]).cwiseAbs2();
    ss_tot += (actual[i] - mean).cwiseAbs2();
  }

  RSquared out;
  for (int k = 0; k < 4; ++k) {
    if (!(ss_tot[k] > 0)) throw UndefinedRSquared(k);
    out.per_output[static_cast<std::size_t>(k)] = 1.0 - ss_res[k] / ss_tot[k];
    out.mean += out.per_output[static_cast<std::size_t>(k)] / 4.0;
  }
  return out;
}

}  // namespace beamalign
