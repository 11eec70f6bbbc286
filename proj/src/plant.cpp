#include "beamalign/plant.hpp"

#include <cmath>
#include <string>

#include "beamalign/errors.hpp"
#include "beamalign/optics.hpp"

namespace beamalign {

void check_limits(const MirrorControls& controls, double limit) {
  for (int i = 0; i < 4; ++i) {
    if (!(std::abs(controls[i]) <= limit)) {
      throw LimitViolation(std::string(MirrorControls::kAxisNames[i]), controls[i], limit);
    }
  }
}

SimulatedPlant::SimulatedPlant(const SystemGeometry& geometry, double noise_sigma,
                               std::uint64_t rng_seed)
    : geometry_(geometry), noise_sigma_(noise_sigma), rng_(rng_seed) {
  geometry_.validate();
  if (!(noise_sigma >= 0)) throw ConfigError("noise_sigma must be non-negative");
}

void SimulatedPlant::set_controls(const MirrorControls& controls) {
  check_limits(controls, geometry_.control_limit);
  controls_ = controls;
}

Vec4 SimulatedPlant::true_offsets() const {
  return forward_linear(controls_, geometry_, errors_);
}

MirrorControls SimulatedPlant::compensating_controls() const {
  const SensitivityMatrix model = linear_model(geometry_, errors_);
  return MirrorControls::from_vector(model.g.partialPivLu().solve(-model.offset));
}

Measurement SimulatedPlant::measure() {
  const Vec4 truth = true_offsets();
  if (std::abs(truth[0]) > geometry_.camera_half_field ||
      std::abs(truth[1]) > geometry_.camera_half_field) {
    throw FieldOfViewError("beam outside Aperture-1 camera field: (" + std::to_string(truth[0]) +
                           ", " + std::to_string(truth[1]) + ") mm");
  }
  ++reading_count_;

  Vec4 noisy = truth;
  if (noise_sigma_ > 0) {
    std::normal_distribution<double> noise(0.0, noise_sigma_);
    for (int i = 0; i < 4; ++i) noisy[i] += noise(rng_);
  }

  Measurement m;
  m.a1 = {noisy[0], noisy[1]};
  if (!is_blocked({truth[0], truth[1]}, geometry_)) m.a2 = Offset2{noisy[2], noisy[3]};
  return m;
}

void SimulatedPlant::misalign(std::uint64_t seed, double magnitude,
                              const MisalignmentBounds& bounds) {
  if (!(magnitude >= 0 && magnitude <= 1)) throw ConfigError("misalignment magnitude must be in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Mat4 g = sensitivity_matrix(geometry_);
  const auto lu = g.partialPivLu();
  const double bound = kCompensationFraction * geometry_.control_limit;

  constexpr int kMaxRejections = 10'000;
  for (int attempt = 0; attempt <= kMaxRejections; ++attempt) {
    MisalignmentErrors e;
    e.laser_dx = magnitude * bounds.max_lateral_mm * unit(rng);
    e.laser_dy = magnitude * bounds.max_lateral_mm * unit(rng);
    e.laser_dtheta = magnitude * bounds.max_angle * unit(rng);
    e.laser_dphi = magnitude * bounds.max_angle * unit(rng);
    const Vec4 fix = lu.solve(-error_offset(geometry_, e));
    if (fix.cwiseAbs().maxCoeff() <= bound) {
      errors_ = e;
      return;
    }
  }
  throw ConfigError("misalign: no recoverable draw after 10000 rejections; reduce bounds");
}

}  // namespace beamalign
