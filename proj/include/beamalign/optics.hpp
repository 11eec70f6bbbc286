#pragma once

#include "beamalign/types.hpp"

namespace beamalign {

/// Beam positions on the two aperture planes, relative to their centres.
struct BeamIntersections {
  Offset2 at_a1;
  Offset2 at_a2;
  bool blocked_at_a1 = false;
};

/// Linearised plant: measurements = g * controls + offset.
/// Rows are (dx1, dy1, dx2, dy2) in mm; columns follow MirrorControls order.
struct SensitivityMatrix {
  Mat4 g = Mat4::Zero();
  Vec4 offset = Vec4::Zero();
};

/// Exact plane-mirror trace of the Z-fold bench.
///
/// The laser fires along +z; m1 folds the beam to +x, m2 folds it back to +z,
/// and both apertures sit in planes of constant z centred on the output axis.
/// Each mount is a gimbal referenced to its beam: yaw turns the nominally
/// reflected beam by 2*yaw in the horizontal plane, pitch raises it by
/// 2*pitch. Reflection of the actual (possibly deviated) beam is exact plane
/// mirror geometry with no small-angle simplification, so this is the
/// reference the linear model is checked against. Throws BeamMissError if a
/// surface cannot be reached.
BeamIntersections trace_exact(const MirrorControls& controls, const SystemGeometry& geometry,
                              const MisalignmentErrors& errors);

/// Lever-arm matrix from ray-transfer reasoning: each entry is twice the path
/// length from the mirror to the aperture, signed to match trace_exact.
Mat4 sensitivity_matrix(const SystemGeometry& geometry);

/// Offset vector produced by the source errors alone (controls at zero).
Vec4 error_offset(const SystemGeometry& geometry, const MisalignmentErrors& errors);

SensitivityMatrix linear_model(const SystemGeometry& geometry, const MisalignmentErrors& errors);

Vec4 forward_linear(const MirrorControls& controls, const SystemGeometry& geometry,
                    const MisalignmentErrors& errors);

inline bool is_blocked(const Offset2& at_a1, const SystemGeometry& geometry) {
  return at_a1.radius() > geometry.aperture_radius_1;
}

}  // namespace beamalign
