#include "beamalign/regression_aligner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "beamalign/errors.hpp"

namespace beamalign {

namespace {

// Mirror 2's lever on Aperture 1 below this fraction of mirror 1's counts as absent.
constexpr double kUnobservableRatio = 1e-3;
constexpr double kRegistrationStep = 0.25;
constexpr int kMaxRedraws = 10'000;

}  // namespace

MirrorControls ConstraintMap::complete(const Eigen::Vector2d& driver) const {
  Eigen::Vector2d m1, m2;
  for (int axis = 0; axis < 2; ++axis) {
    const bool free = mirror2_free[static_cast<std::size_t>(axis)];
    m1[axis] = free ? e[axis] : driver[axis];
    m2[axis] = free ? driver[axis] : 0.0;
  }
  for (int axis = 0; axis < 2; ++axis) {
    if (!mirror2_free[static_cast<std::size_t>(axis)]) m2[axis] = d.row(axis).dot(m1) + e[axis];
  }
  return {m1[0], m1[1], m2[0], m2[1]};
}

Step1Result step1_fit(Plant& plant, std::size_t n_random, std::size_t n_registration, std::uint64_t seed) {
  const std::size_t n = n_random + n_registration;
  if (n < 3) throw UnderdeterminedError("step1_fit: need at least 3 samples for a 2-predictor affine fit");
  const double half_width = sampling_half_width(plant.geometry());
  std::mt19937_64 rng(seed);

  Step1Result out;
  out.samples.seed = seed;
  for (std::size_t i = 0; i < n_random; ++i) {
    const MirrorControls c = draw_uniform_controls(rng, half_width);
    plant.set_controls(c);
    out.samples.records.push_back({c, plant.measure()});
  }
  // Registration: from the box centre, move one axis at a time.
  for (std::size_t i = 0; i < n_registration; ++i) {
    MirrorControls c;
    const double scale = kRegistrationStep * static_cast<double>(1 + i / 4);
    c[static_cast<int>(i % 4)] = std::min(scale, 1.0) * half_width;
    plant.set_controls(c);
    out.samples.records.push_back({c, plant.measure()});
  }

  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd xx(rows, 2), xy(rows, 2), yx(rows, 1), yy(rows, 1);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& rec = out.samples.records[static_cast<std::size_t>(r)];
    xx(r, 0) = rec.controls.cm1_yaw;
    xx(r, 1) = rec.controls.cm2_yaw;
    xy(r, 0) = rec.controls.cm1_pitch;
    xy(r, 1) = rec.controls.cm2_pitch;
    yx(r, 0) = rec.measurement.a1.x;
    yy(r, 0) = rec.measurement.a1.y;
  }
  out.x_fit = least_squares(xx, yx);
  out.y_fit = least_squares(xy, yy);

  // Solve a*m1 + b*m2 + c = 0 per axis.
  for (int axis = 0; axis < 2; ++axis) {
    const LinearModel& fit = axis == 0 ? out.x_fit : out.y_fit;
    const double a = fit.coefficients(0, 0);
    const double b = fit.coefficients(0, 1);
    const double c = fit.coefficients(0, 2);
    const auto idx = static_cast<std::size_t>(axis);
    if (std::abs(b) > kUnobservableRatio * std::abs(a)) {
      out.constraint.d(axis, axis) = -a / b;
      out.constraint.e[axis] = -c / b;
    } else if (std::abs(a) > 0) {
      out.constraint.mirror2_free[idx] = true;
      out.constraint.e[axis] = -c / a;
    } else {
      throw DegenerateGeometryError("step1_fit: neither mirror moves the beam on Aperture 1 along axis " +
                                    std::to_string(axis));
    }
  }
  return out;
}

Step2Result step2_fit(Plant& plant, const ConstraintMap& constraint, const Dataset& step1_samples,
                      std::size_t n, std::uint64_t seed) {
  if (n < 5) throw UnderdeterminedError("step2_fit: need at least 5 samples for the reverse model");
  const double limit = plant.geometry().control_limit;
  const double half_width = sampling_half_width(plant.geometry());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-half_width, half_width);

  auto feasible = [&](const MirrorControls& c) {
    for (int i = 0; i < 4; ++i) {
      if (std::abs(c[i]) > limit) return false;
    }
    return true;
  };

  Step2Result out;
  out.samples.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::Vector2d driver;
    if (i < step1_samples.size()) {
      const auto& prev = step1_samples.records[i].controls;
      driver = {constraint.mirror2_free[0] ? prev.cm2_yaw : prev.cm1_yaw,
                constraint.mirror2_free[1] ? prev.cm2_pitch : prev.cm1_pitch};
    } else {
      driver = {u(rng), u(rng)};
    }
    MirrorControls c = constraint.complete(driver);
    for (int tries = 0; !feasible(c); ++tries) {
      if (tries == kMaxRedraws) throw DegenerateGeometryError("step2_fit: constraint leaves no feasible settings");
      c = constraint.complete({u(rng), u(rng)});
    }
    plant.set_controls(c);
    const Measurement m = plant.measure();
    if (!m.complete()) {
      throw BlockedSampleError("step2_fit: sample " + std::to_string(i) +
                               " blocked at Aperture 1; the Step-1 constraint is wrong");
    }
    out.samples.records.push_back({c, m});
  }

  const auto rows = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd x(rows, 4), y(rows, 4);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& rec = out.samples.records[static_cast<std::size_t>(r)];
    x.row(r) = rec.measurement.as_vector().transpose();
    y.row(r) = rec.controls.as_vector().transpose();
  }
  out.reverse = least_squares(x, y);
  return out;
}

RegressionAlignment align_regression(Plant& plant, const RegressionAlignConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::int64_t start_readings = plant.readings_used();

  RegressionAlignment out;
  out.step1 = step1_fit(plant, cfg.n_random, cfg.n_registration, cfg.seed);
  out.step2 = step2_fit(plant, out.step1.constraint, out.step1.samples, cfg.n_step2, cfg.seed + 1);

  const Eigen::VectorXd goal = out.step2.reverse.intercept();
  const double limit = plant.geometry().control_limit;
  MirrorControls solution;
  bool clamped = false;
  for (int i = 0; i < 4; ++i) {
    solution[i] = std::clamp(goal[i], -limit, limit);
    clamped |= solution[i] != goal[i];
  }
  plant.set_controls(solution);
  const Measurement confirm = plant.measure();

  AlignmentReport& r = out.report;
  r.strategy = "regression";
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
