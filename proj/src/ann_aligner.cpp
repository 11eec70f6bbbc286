#include "beamalign/ann_aligner.hpp"

#include <algorithm>
#include <chrono>

#include "beamalign/errors.hpp"

namespace beamalign {

AnnAlignment align_ann(Plant& plant, const AnnAlignConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::int64_t start_readings = plant.readings_used();

  AnnAlignment out;
  out.collected = collect_random(plant, cfg.samples, cfg.collection_seed);
  const Dataset complete = filter_complete(out.collected);
  auto [train_set, test_set] = split_train_test(complete, cfg.train_fraction, cfg.split_seed);

  TrainResult trained = train(train_set, cfg.train, cfg.training_seed);
  out.model = std::move(trained.model);
  out.loss_trace = std::move(trained.loss_trace);
  out.train_r2 = r_squared(out.model, train_set);
  if (!test_set.empty()) out.test_r2 = r_squared(out.model, test_set);

  MirrorControls solution = predict(out.model, Vec4::Zero());
  const double limit = plant.geometry().control_limit;
  bool clamped = false;
  for (int i = 0; i < 4; ++i) {
    const double c = std::clamp(solution[i], -limit, limit);
    clamped |= c != solution[i];
    solution[i] = c;
  }
  plant.set_controls(solution);
  const Measurement confirm = plant.measure();

  AlignmentReport& r = out.report;
  r.strategy = "ann";
  r.final_controls = solution;
  r.residuals = confirm;
  r.readings = plant.readings_used() - start_readings;
  r.outer_iterations = 1;
  r.transmitted = confirm.complete();
  const SystemGeometry& g = plant.geometry();
  r.converged = r.transmitted && confirm.a1.radius() <= g.aperture_radius_1 &&
                confirm.a2->radius() <= g.aperture_radius_2;
  r.status = r.converged ? (clamped ? "converged_clamped" : "converged") : "not_converged";
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace beamalign
