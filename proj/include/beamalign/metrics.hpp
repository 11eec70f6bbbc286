#pragma once

#include <array>
#include <vector>

#include "beamalign/types.hpp"

namespace beamalign {

/// Coefficient of determination per control axis and averaged over the four.
struct RSquared {
  std::array<double, 4> per_output{};
  double mean = 0.0;
};

/// R^2 = 1 - SS_res / SS_tot with SS_tot about the mean of `actual`.
/// Throws UndefinedRSquared for an axis whose actual values have zero variance.
RSquared compute_r_squared(const std::vector<Vec4>& predicted, const std::vector<Vec4>& actual);

}  // namespace beamalign
