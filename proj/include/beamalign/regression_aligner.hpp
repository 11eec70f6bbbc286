#pragma once

#include <array>
#include <cstdint>

#include "beamalign/dataset.hpp"
#include "beamalign/linear_model.hpp"
#include "beamalign/plant.hpp"
#include "beamalign/report.hpp"

namespace beamalign {

/// Mirror-1 to mirror-2 relation that keeps the beam centred on Aperture 1:
/// m2 = d * m1 + e, one decoupled relation per axis (yaw, pitch).
///
/// When mirror 2 has no lever arm on Aperture 1 for an axis (dd2 = 0), that
/// axis flips: mirror 1 is pinned at e and mirror 2 is left free, with the
/// corresponding row of d zeroed.
struct ConstraintMap {
  Eigen::Matrix2d d = Eigen::Matrix2d::Zero();
  Eigen::Vector2d e = Eigen::Vector2d::Zero();
  std::array<bool, 2> mirror2_free{false, false};

  /// Full control setting from one driving value per axis: the mirror-1
  /// angle for a constrained axis, the mirror-2 angle for a free one.
  MirrorControls complete(const Eigen::Vector2d& driver) const;
};

struct Step1Result {
  LinearModel x_fit;  // dx1 ~ cm1_yaw, cm2_yaw
  LinearModel y_fit;  // dy1 ~ cm1_pitch, cm2_pitch
  ConstraintMap constraint;
  Dataset samples;
};

/// Collects n_random uniform samples plus n_registration samples that each
/// move one axis from the centre of the sampling box, fits the Aperture-1
/// forward model and solves it for zero offset. Consumes exactly
/// n_random + n_registration readings.
Step1Result step1_fit(Plant& plant, std::size_t n_random, std::size_t n_registration, std::uint64_t seed);

struct Step2Result {
  LinearModel reverse;  // controls ~ (dx1, dy1, dx2, dy2)
  Dataset samples;
};

/// Samples n settings along the constraint (reusing the Step-1 mirror-1
/// settings where they stay inside the actuator range) and fits the reverse
/// linear model. Throws BlockedSampleError if any sample is blocked.
Step2Result step2_fit(Plant& plant, const ConstraintMap& constraint, const Dataset& step1_samples,
                      std::size_t n, std::uint64_t seed);

struct RegressionAlignConfig {
  std::size_t n_random = 30;
  std::size_t n_registration = 4;
  std::size_t n_step2 = 34;
  std::uint64_t seed = 1;
};

struct RegressionAlignment {
  AlignmentReport report;
  Step1Result step1;
  Step2Result step2;
};

/// Two-step design-led alignment; the solution is the reverse model's
/// intercept (its prediction at zero offsets). Costs n_random +
/// n_registration + n_step2 + 1 readings.
RegressionAlignment align_regression(Plant& plant, const RegressionAlignConfig& cfg);

}  // namespace beamalign
