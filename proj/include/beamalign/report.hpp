#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "beamalign/types.hpp"

namespace beamalign {

/// Outcome of one alignment run against one plant.
struct AlignmentReport {
  std::string strategy;
  MirrorControls final_controls;
  Measurement residuals;           // last reading taken
  std::int64_t readings = 0;       // plant counter delta over the run
  int outer_iterations = 0;
  bool converged = false;
  bool transmitted = false;        // beam reached Aperture 2 on the last reading
  std::string status;              // short machine-readable outcome
  double wall_time_s = 0.0;
};

// Field order is fixed; floats carry 17 significant digits.
nlohmann::ordered_json report_to_json(const AlignmentReport& report, bool include_timing = true);
AlignmentReport report_from_json(const nlohmann::json& j);

nlohmann::ordered_json measurement_to_json(const Measurement& m);
nlohmann::ordered_json controls_to_json(const MirrorControls& c);

}  // namespace beamalign

namespace beamalign {

// Indented JSON text with every floating-point value printed at 17
// significant digits; keys keep their insertion order.
std::string dump_json17(const nlohmann::ordered_json& j, int indent = 2);

}  // namespace beamalign
