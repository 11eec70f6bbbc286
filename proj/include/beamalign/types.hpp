#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

namespace beamalign {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Actuator range of the motorised mounts, per axis.
inline constexpr double kMountRangeDeg = 5.27;
inline constexpr double kSmallAngleBoundDeg = 15.0;

/// Mirror adjustment angles in radians, measured from the nominal 45 degree fold.
/// Yaw steers the beam horizontally, pitch vertically.
struct MirrorControls {
  double cm1_yaw = 0.0;
  double cm1_pitch = 0.0;
  double cm2_yaw = 0.0;
  double cm2_pitch = 0.0;

  static constexpr std::array<std::string_view, 4> kAxisNames = {
      "cm1_yaw", "cm1_pitch", "cm2_yaw", "cm2_pitch"};

  double operator[](int i) const;
  double& operator[](int i);

  Vec4 as_vector() const { return {cm1_yaw, cm1_pitch, cm2_yaw, cm2_pitch}; }
  static MirrorControls from_vector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

  friend bool operator==(const MirrorControls&, const MirrorControls&) = default;
};

/// Instance errors of the laser source that an aligner has to compensate.
struct MisalignmentErrors {
  double laser_dx = 0.0;      // mm
  double laser_dy = 0.0;      // mm
  double laser_dtheta = 0.0;  // rad, horizontal pointing
  double laser_dphi = 0.0;    // rad, vertical pointing

  friend bool operator==(const MisalignmentErrors&, const MisalignmentErrors&) = default;
};

/// Fixed layout of the bench: laser -> m1 -> m2 -> A1 -> A2.
struct SystemGeometry {
  double dd0 = 0.2;  // m, laser to m1
  double dd1 = 0.3;  // m, m1 to m2
  double dd2 = 0.3;  // m, m2 to A1
  double dd3 = 0.9;  // m, A1 to A2
  double aperture_radius_1 = 106.31104737190049;  // mm, see config/default.json
  double aperture_radius_2 = 106.31104737190049;  // mm
  double camera_half_field = 350.0;               // mm
  double control_limit = deg_to_rad(kMountRangeDeg);

  // Throws ConfigError naming the first violated invariant.
  void validate() const;

  friend bool operator==(const SystemGeometry&, const SystemGeometry&) = default;
};

struct Offset2 {
  double x = 0.0;  // mm
  double y = 0.0;  // mm

  double radius() const { return std::hypot(x, y); }
  friend bool operator==(const Offset2&, const Offset2&) = default;
};

/// One camera frame pair. `a2` is absent when Aperture 1 blocks the beam.
struct Measurement {
  Offset2 a1;
  std::optional<Offset2> a2;

  bool complete() const { return a2.has_value(); }
  // Requires a complete measurement.
  Vec4 as_vector() const;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

}  // namespace beamalign
