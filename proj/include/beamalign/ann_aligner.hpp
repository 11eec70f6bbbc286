#pragma once

#include <cstdint>

#include "beamalign/mlp.hpp"
#include "beamalign/plant.hpp"
#include "beamalign/report.hpp"

namespace beamalign {

struct AnnAlignConfig {
  std::size_t samples = 1000;
  double train_fraction = 0.9;
  TrainConfig train;
  std::uint64_t collection_seed = 1;
  std::uint64_t split_seed = 2;
  std::uint64_t training_seed = 3;
};

struct AnnAlignment {
  AlignmentReport report;
  MlpModel model;
  Dataset collected;
  RSquared train_r2;
  RSquared test_r2;
  std::vector<double> loss_trace;
};

/// Brute-force reverse model: sample the control space at random, discard
/// blocked samples, fit the network and read off the controls it predicts
/// for a perfectly centred beam. Costs samples + 1 readings.
AnnAlignment align_ann(Plant& plant, const AnnAlignConfig& cfg);

}  // namespace beamalign
