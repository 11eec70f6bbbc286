#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "beamalign/config.hpp"
#include "beamalign/report.hpp"

namespace beamalign {

struct StrategyOutcome {
  AlignmentReport report;
  int status_code = 0;  // 0 converged, 1 not converged, 2 strategy error
  std::string error;
  std::map<std::string, double> diagnostics;  // e.g. R^2 values
};

/// Side-by-side results, in the order ann, beamwalk, regression.
struct ComparisonReport {
  std::vector<StrategyOutcome> strategies;
  // readings(regression) < readings(beamwalk) < readings(ann); empty unless all three ran.
  std::optional<bool> ordering_ok;
};

/// A plant for `cfg`: fresh counter, noise stream and the configured misalignment.
SimulatedPlant make_plant(const ExperimentConfig& cfg);

StrategyOutcome run_strategy(const ExperimentConfig& cfg, const std::string& strategy);

/// Runs every selected strategy on its own identically misaligned plant.
/// Strategies execute concurrently; results are deterministic for a fixed config.
ComparisonReport run(const ExperimentConfig& cfg);

nlohmann::ordered_json comparison_to_json(const ComparisonReport& report, bool include_timing = true);
ComparisonReport comparison_from_json(const nlohmann::json& j);

void emit_json(const ComparisonReport& report, std::ostream& out, bool include_timing = true);
void emit_csv(const ComparisonReport& report, std::ostream& out, bool include_timing = true);

}  // namespace beamalign
