#include "beamalign/optics.hpp"

#include <cmath>
#include <string>

#include "beamalign/errors.hpp"

namespace beamalign {

LimitViolation::LimitViolation(const std::string& axis, double value, double limit)
    : Error("control " + axis + " = " + std::to_string(value) + " rad exceeds limit +/-" +
            std::to_string(limit) + " rad"),
      axis_(axis) {}

UndefinedRSquared::UndefinedRSquared(int axis)
    : Error("R^2 undefined: target axis " + std::to_string(axis) + " has zero variance"),
      axis_(axis) {}

double MirrorControls::operator[](int i) const {
  switch (i) {
    case 0: return cm1_yaw;
    case 1: return cm1_pitch;
    case 2: return cm2_yaw;
    default: return cm2_pitch;
  }
}

double& MirrorControls::operator[](int i) {
  switch (i) {
    case 0: return cm1_yaw;
    case 1: return cm1_pitch;
    case 2: return cm2_yaw;
    default: return cm2_pitch;
  }
}

Vec4 Measurement::as_vector() const {
  if (!a2) throw ValidationError("measurement has no Aperture-2 reading");
  return {a1.x, a1.y, a2->x, a2->y};
}

void SystemGeometry::validate() const {
  if (!(dd0 > 0) || !(dd1 > 0) || !(dd3 > 0)) {
    throw ConfigError("geometry: dd0, dd1 and dd3 must be strictly positive");
  }
  if (!(dd2 >= 0)) throw ConfigError("geometry: dd2 must be non-negative");
  if (!(aperture_radius_1 > 0) || !(aperture_radius_2 > 0)) {
    throw ConfigError("geometry: aperture radii must be positive");
  }
  if (!(control_limit > 0) || control_limit > deg_to_rad(kSmallAngleBoundDeg)) {
    throw ConfigError("geometry: control_limit must lie in (0, 15 deg]");
  }
  if (!(camera_half_field > aperture_radius_1) || !(camera_half_field > aperture_radius_2)) {
    throw ConfigError("geometry: camera_half_field must exceed both aperture radii");
  }
}

namespace {

using Vec3 = Eigen::Vector3d;

struct Ray {
  Vec3 origin;
  Vec3 dir;
};

// Rodrigues rotation of v about unit axis k.
Vec3 rotate(const Vec3& v, const Vec3& k, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return v * c + k.cross(v) * s + k * k.dot(v) * (1.0 - c);
}

// Mirror normal that sends the nominal incident beam along `nominal_out`
// turned by 2*yaw about the vertical and raised by 2*pitch.
Vec3 mount_normal(const Vec3& nominal_in, const Vec3& nominal_out, double yaw, double pitch) {
  const Vec3 up = Vec3::UnitY();
  const Vec3 turned = rotate(nominal_out, up, 2.0 * yaw);
  const Vec3 out = std::cos(2.0 * pitch) * turned + std::sin(2.0 * pitch) * up;
  return (out - nominal_in).normalized();
}

double hit_distance(const Ray& ray, const Vec3& point, const Vec3& normal, const char* what) {
  const double denom = ray.dir.dot(normal);
  if (std::abs(denom) < 1e-12) {
    throw BeamMissError(std::string("beam misses ") + what + ": ray parallel to surface");
  }
  const double t = (point - ray.origin).dot(normal) / denom;
  if (t < -1e-12) {
    throw BeamMissError(std::string("beam misses ") + what + ": surface lies behind the ray");
  }
  return t;
}

Ray reflect(const Ray& ray, const Vec3& point, const Vec3& normal, const char* what) {
  const double t = hit_distance(ray, point, normal, what);
  const Vec3 hit = ray.origin + t * ray.dir;
  const Vec3 out = ray.dir - 2.0 * ray.dir.dot(normal) * normal;
  return {hit, out.normalized()};
}

}  // namespace

BeamIntersections trace_exact(const MirrorControls& controls, const SystemGeometry& geometry,
                              const MisalignmentErrors& errors) {
  const double lim = geometry.control_limit;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(controls[i]) > lim) {
      throw LimitViolation(std::string(MirrorControls::kAxisNames[i]), controls[i], lim);
    }
  }

  // Metres internally; offsets reported in mm.
  const Vec3 m1_point(0.0, 0.0, geometry.dd0);
  const Vec3 m2_point(geometry.dd1, 0.0, geometry.dd0);

  Ray ray{Vec3(errors.laser_dx * 1e-3, errors.laser_dy * 1e-3, 0.0),
          Vec3(std::tan(errors.laser_dtheta), std::tan(errors.laser_dphi), 1.0).normalized()};

  const Vec3 m1_normal =
      mount_normal(Vec3::UnitZ(), Vec3::UnitX(), controls.cm1_yaw, controls.cm1_pitch);
  const Vec3 m2_normal =
      mount_normal(Vec3::UnitX(), Vec3::UnitZ(), controls.cm2_yaw, controls.cm2_pitch);
  ray = reflect(ray, m1_point, m1_normal, "mirror 1");
  ray = reflect(ray, m2_point, m2_normal, "mirror 2");

  const Vec3 axis_z = Vec3::UnitZ();
  const Vec3 a1_center(geometry.dd1, 0.0, geometry.dd0 + geometry.dd2);
  const Vec3 a2_center(geometry.dd1, 0.0, geometry.dd0 + geometry.dd2 + geometry.dd3);

  const Vec3 p1 = ray.origin + hit_distance(ray, a1_center, axis_z, "aperture 1") * ray.dir;
  const Vec3 p2 = ray.origin + hit_distance(ray, a2_center, axis_z, "aperture 2") * ray.dir;

  BeamIntersections out;
  out.at_a1 = {(p1.x() - a1_center.x()) * 1e3, (p1.y() - a1_center.y()) * 1e3};
  out.at_a2 = {(p2.x() - a2_center.x()) * 1e3, (p2.y() - a2_center.y()) * 1e3};
  out.blocked_at_a1 = is_blocked(out.at_a1, geometry);
  return out;
}

Mat4 sensitivity_matrix(const SystemGeometry& geometry) {
  geometry.validate();
  // Lever arms in mm from each mirror to each aperture.
  const double m1_a1 = (geometry.dd1 + geometry.dd2) * 1e3;
  const double m1_a2 = m1_a1 + geometry.dd3 * 1e3;
  const double m2_a1 = geometry.dd2 * 1e3;
  const double m2_a2 = m2_a1 + geometry.dd3 * 1e3;

  // A mount rotation of alpha turns the reflected beam by 2*alpha. The m1 yaw
  // deflection leaves along -z and the second fold maps it onto -x.
  Mat4 g = Mat4::Zero();
  g(0, 0) = -2.0 * m1_a1;
  g(0, 2) = 2.0 * m2_a1;
  g(1, 1) = 2.0 * m1_a1;
  g(1, 3) = 2.0 * m2_a1;
  g(2, 0) = -2.0 * m1_a2;
  g(2, 2) = 2.0 * m2_a2;
  g(3, 1) = 2.0 * m1_a2;
  g(3, 3) = 2.0 * m2_a2;
  return g;
}

Vec4 error_offset(const SystemGeometry& geometry, const MisalignmentErrors& errors) {
  const double to_a1 = (geometry.dd0 + geometry.dd1 + geometry.dd2) * 1e3;
  const double to_a2 = to_a1 + geometry.dd3 * 1e3;
  return {errors.laser_dx + errors.laser_dtheta * to_a1, errors.laser_dy + errors.laser_dphi * to_a1,
          errors.laser_dx + errors.laser_dtheta * to_a2, errors.laser_dy + errors.laser_dphi * to_a2};
}

SensitivityMatrix linear_model(const SystemGeometry& geometry, const MisalignmentErrors& errors) {
  return {sensitivity_matrix(geometry), error_offset(geometry, errors)};
}

Vec4 forward_linear(const MirrorControls& controls, const SystemGeometry& geometry,
                    const MisalignmentErrors& errors) {
  return sensitivity_matrix(geometry) * controls.as_vector() + error_offset(geometry, errors);
}

}  // namespace beamalign
