#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "beamalign/plant.hpp"
#include "beamalign/report.hpp"

namespace beamalign {

struct WalkConfig {
  double threshold = 0.05;       // mm, radial, per aperture
  int max_iterations = 20;       // outer [M1 -> A1, M2 -> A2] passes
  double probe_step = 1e-3;      // rad
  std::int64_t max_readings = 1000;
  int max_corrections = 10;      // Newton steps per axis visit

  void validate(double control_limit) const;
};

/// One camera reading taken during a walk.
struct WalkTraceRow {
  std::int64_t reading_index = 0;
  int mirror = 0;
  char axis = '-';  // 'x' (yaw), 'y' (pitch) or '-' for the entry reading
  double control_value = 0.0;
  std::optional<Offset2> offset;  // on the target aperture; absent when blocked
  int aperture = 0;
  bool blocked = false;
};

enum class CenterStatus { kCentered, kBlocked, kBudgetExceeded, kNotCentered };

struct CenterResult {
  CenterStatus status = CenterStatus::kNotCentered;
  std::int64_t readings = 0;
  Measurement last;
};

/// Walks the beam onto the centre of one aperture with one mirror,
/// horizontally then vertically. Each axis visit estimates the local gain
/// from a probe step and then applies secant-updated Newton corrections
/// until the axis offset is within threshold / sqrt(2). Stops early with
/// kBlocked when the target is Aperture 2 and Aperture 1 blocks the beam.
/// Throws GainEstimationError when a probe does not move the beam
/// measurably even after enlarging the step once.
CenterResult center_on_aperture(Plant& plant, int mirror, int aperture, const WalkConfig& cfg,
                                std::vector<WalkTraceRow>* trace = nullptr,
                                std::int64_t reading_budget = -1);

struct BeamWalkResult {
  AlignmentReport report;
  std::vector<double> a1_radius_per_iteration;  // after each outer pass
  std::vector<WalkTraceRow> trace;
};

/// Repeats [centre A1 with mirror 1; centre A2 with mirror 2] until both
/// offsets are within threshold, or the iteration/reading budget runs out.
BeamWalkResult align_beamwalk(Plant& plant, const WalkConfig& cfg);

void write_trace_csv(const std::vector<WalkTraceRow>& trace, std::ostream& out);

}  // namespace beamalign
