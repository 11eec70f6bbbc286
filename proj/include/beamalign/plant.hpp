#pragma once

#include <cstdint>
#include <random>

#include "beamalign/types.hpp"

namespace beamalign {

/// What an aligner is allowed to see: controls in, camera readings out.
/// A hardware-backed bench would implement the same interface.
class Plant {
 public:
  virtual ~Plant() = default;

  // Throws LimitViolation naming the offending axis. Does not take a reading.
  virtual void set_controls(const MirrorControls& controls) = 0;
  virtual const MirrorControls& controls() const = 0;

  // One camera frame pair; increments the reading counter by exactly one.
  virtual Measurement measure() = 0;
  virtual std::int64_t readings_used() const = 0;

  // The designed bench layout (the "defined parameters"), not instance errors.
  virtual const SystemGeometry& geometry() const = 0;
  virtual double noise_sigma() const = 0;
};

// Aligners may assume the perfect-alignment controls lie within this
// fraction of the actuator range.
inline constexpr double kCompensationFraction = 0.8;

struct MisalignmentBounds {
  double max_lateral_mm = 50.0;
  double max_angle = deg_to_rad(5.0);
};

/// Simulated bench driven by the linear forward model with Gaussian camera noise.
class SimulatedPlant final : public Plant {
 public:
  SimulatedPlant(const SystemGeometry& geometry, double noise_sigma, std::uint64_t rng_seed);

  void set_controls(const MirrorControls& controls) override;
  const MirrorControls& controls() const override { return controls_; }
  Measurement measure() override;
  std::int64_t readings_used() const override { return reading_count_; }
  const SystemGeometry& geometry() const override { return geometry_; }
  double noise_sigma() const override { return noise_sigma_; }

  /// Draws source errors uniformly within `bounds` scaled by `magnitude`,
  /// rejecting draws whose exact compensation falls outside
  /// kCompensationFraction of the actuator range. Throws ConfigError after
  /// 10,000 rejections.
  void misalign(std::uint64_t seed, double magnitude, const MisalignmentBounds& bounds = {});

  const MisalignmentErrors& errors() const { return errors_; }
  void set_errors(const MisalignmentErrors& errors) { errors_ = errors; }

  // Noise-free A1/A2 offsets for the current controls (no reading taken).
  Vec4 true_offsets() const;
  // Controls that zero all four offsets under the linear model.
  MirrorControls compensating_controls() const;

 private:
  SystemGeometry geometry_;
  MisalignmentErrors errors_;
  MirrorControls controls_;
  double noise_sigma_;
  std::int64_t reading_count_ = 0;
  std::mt19937_64 rng_;
};

void check_limits(const MirrorControls& controls, double limit);

}  // namespace beamalign
