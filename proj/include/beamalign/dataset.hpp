#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "beamalign/plant.hpp"
#include "beamalign/types.hpp"

namespace beamalign {

struct SampleRecord {
  MirrorControls controls;
  Measurement measurement;

  bool complete() const { return measurement.complete(); }
  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct Dataset {
  std::vector<SampleRecord> records;  // collection order
  std::uint64_t seed = 0;
  std::string geometry_id;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  std::size_t complete_count() const;
};

/// Per-axis half-width of the random sampling box: the actuator range,
/// shrunk if needed so that any recoverable misalignment plus any sampled
/// control keeps the beam inside the Aperture-1 camera field.
double sampling_half_width(const SystemGeometry& geometry);

MirrorControls draw_uniform_controls(std::mt19937_64& rng, double half_width);

/// Applies n uniform random control settings and takes one reading each.
/// Blocked samples are kept and marked incomplete.
Dataset collect_random(Plant& plant, std::size_t n, std::uint64_t rng_seed);

Dataset filter_complete(const Dataset& d);

/// Seeded shuffle, then the first floor(n * train_fraction) records train.
std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double train_fraction,
                                             std::uint64_t rng_seed);

struct ApertureCalibration {
  double aperture_radius = 0.0;  // mm
  double blocked_fraction = 0.0;
};

/// Monte-Carlo bisection on aperture_radius_1 so that uniform sampling over
/// the sampling box of an unperturbed bench blocks `target_block_fraction` of
/// samples (to within one percentage point).
ApertureCalibration calibrate_aperture(const SystemGeometry& geometry, double target_block_fraction,
                                       std::size_t mc_samples, std::uint64_t rng_seed);

// Fixed-header CSV, 17 significant digits, LF endings.
void write_csv(const Dataset& d, std::ostream& out);
Dataset read_csv(std::istream& in);
void save_csv(const Dataset& d, const std::string& path);
Dataset load_csv(const std::string& path);

inline constexpr const char* kDatasetCsvHeader =
    "cm1_yaw_rad,cm1_pitch_rad,cm2_yaw_rad,cm2_pitch_rad,dx1_mm,dy1_mm,dx2_mm,dy2_mm,complete";

}  // namespace beamalign
