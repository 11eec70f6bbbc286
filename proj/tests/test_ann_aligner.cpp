#include <doctest.h>

#include <algorithm>

#include "beamalign/ann_aligner.hpp"
#include "beamalign/bench.hpp"
#include "beamalign/config.hpp"
#include "beamalign/report.hpp"
#include "support/loss_windows.hpp"

using namespace beamalign;

namespace {

ExperimentConfig default_config() { return load_config(BEAMALIGN_CONFIG_DIR "/default.json"); }

}  // namespace

TEST_CASE("default problem") {
  const ExperimentConfig cfg = default_config();
  SimulatedPlant plant = make_plant(cfg);
  const AnnAlignment run = align_ann(plant, cfg.ann);

  CHECK(run.report.strategy == "ann");
  CHECK(run.report.readings == 1001);
  CHECK(plant.readings_used() == 1001);
  CHECK(run.collected.size() == 1000);
  CHECK(run.loss_trace.size() == 10'000);

  CHECK(run.train_r2.mean >= 0.99);
  CHECK(run.test_r2.mean >= 0.95);
  CHECK(run.report.transmitted);
  CHECK(run.report.converged);

  const auto windows = testing::window_means(run.loss_trace, 100);
  CHECK(testing::smoothed_loss_non_increasing(windows));

  // Prediction does not depend on record order.
  Dataset reversed = filter_complete(run.collected);
  const RSquared forward = r_squared(run.model, reversed);
  std::reverse(reversed.records.begin(), reversed.records.end());
  const RSquared backward = r_squared(run.model, reversed);
  for (int k = 0; k < 4; ++k) {
    CHECK(forward.per_output[k] == doctest::Approx(backward.per_output[k]).epsilon(1e-12));
  }

  SimulatedPlant again = make_plant(cfg);
  const AnnAlignment second = align_ann(again, cfg.ann);
  CHECK(report_to_json(second.report, false) == report_to_json(run.report, false));
}

TEST_CASE("noise-free closed loop lands within 5% of the Aperture-2 radius") {
  ExperimentConfig cfg = default_config();
  cfg.noise_sigma = 0.0;
  SimulatedPlant plant = make_plant(cfg);
  const AnnAlignment run = align_ann(plant, cfg.ann);
  REQUIRE(run.report.residuals.complete());
  const double limit = 0.05 * cfg.geometry.aperture_radius_2;
  CHECK(run.report.residuals.a1.radius() <= limit);
  CHECK(run.report.residuals.a2->radius() <= limit);
  CHECK(run.report.status == "converged");
}

TEST_CASE("predicted controls outside the actuator range are clamped") {
  ExperimentConfig cfg = default_config();
  cfg.ann.samples = 30;
  cfg.ann.train.epochs = 1;
  SimulatedPlant plant = make_plant(cfg);
  const AnnAlignment run = align_ann(plant, cfg.ann);
  CHECK(run.report.readings == 31);
  CHECK(run.report.final_controls.as_vector().cwiseAbs().maxCoeff() <= cfg.geometry.control_limit);
}
