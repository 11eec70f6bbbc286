#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamalign/ann_aligner.hpp"
#include "beamalign/beamwalk.hpp"
#include "beamalign/plant.hpp"
#include "beamalign/regression_aligner.hpp"

namespace beamalign {

inline const std::vector<std::string> kAllStrategies = {"ann", "beamwalk", "regression"};

struct CalibrationConfig {
  double target_block_fraction = 0.375;
  std::size_t mc_samples = 100'000;
};

/// Everything one experiment needs. Angles are degrees in the JSON document
/// and radians here; every random stream is derived from `seed`.
struct ExperimentConfig {
  SystemGeometry geometry;
  double noise_sigma = 0.01;  // mm
  std::uint64_t seed = 2024;
  std::uint64_t misalignment_seed = 7;
  double misalignment_magnitude = 1.0;
  MisalignmentBounds misalignment_bounds;
  std::vector<std::string> strategies = kAllStrategies;
  AnnAlignConfig ann;
  WalkConfig beamwalk;
  RegressionAlignConfig regression;
  CalibrationConfig calibration;
  std::string output_path;
  std::string output_format = "json";

  /// Re-derives every sub-stream seed from `seed`.
  void reseed(std::uint64_t root);
  void validate() const;
};

/// Parses a config document. A string-valued "geometry" is a path resolved
/// against `base_dir`. Unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

SystemGeometry parse_geometry(const nlohmann::json& j);
nlohmann::ordered_json geometry_to_json(const SystemGeometry& g);

// Selector: "all" or one strategy name.
std::vector<std::string> parse_strategy_selector(const std::string& selector);

}  // namespace beamalign
