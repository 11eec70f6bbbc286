#include "beamalign/beamwalk.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>

#include "beamalign/errors.hpp"
#include "beamalign/format.hpp"

namespace beamalign {

void WalkConfig::validate(double control_limit) const {
  if (!(threshold > 0)) throw ConfigError("beamwalk: threshold must be positive");
  if (!(probe_step > 0) || probe_step > control_limit) {
    throw ConfigError("beamwalk: probe_step must lie within the actuator range");
  }
  if (max_iterations < 1 || max_readings < 1 || max_corrections < 1) {
    throw ConfigError("beamwalk: iteration and reading budgets must be positive");
  }
}

namespace {

class Walker {
 public:
  Walker(Plant& plant, int mirror, int aperture, const WalkConfig& cfg,
         std::vector<WalkTraceRow>* trace, std::int64_t budget)
      : plant_(plant), mirror_(mirror), aperture_(aperture), cfg_(cfg), trace_(trace),
        budget_(budget), start_(plant.readings_used()),
        floor_(std::max(10.0 * plant.noise_sigma(), 1e-9)),
        tolerance_(cfg.threshold / std::numbers::sqrt2) {}

  CenterResult run() {
    if (!read('-')) return finish(CenterStatus::kBudgetExceeded);
    if (blocked()) return finish(CenterStatus::kBlocked);

    // A few sweeps over both axes; one sweep suffices on a linear plant.
    for (int sweep = 0; sweep < cfg_.max_corrections; ++sweep) {
      if (within(0) && within(1)) return finish(CenterStatus::kCentered);
      for (int axis = 0; axis < 2; ++axis) {
        if (within(axis)) continue;
        const CenterStatus s = walk_axis(axis);
        if (s != CenterStatus::kCentered) return finish(s);
      }
    }
    return finish(within(0) && within(1) ? CenterStatus::kCentered : CenterStatus::kNotCentered);
  }

 private:
  int control_index(int axis) const { return (mirror_ - 1) * 2 + axis; }

  std::optional<Offset2> target() const { return aperture_ == 1 ? last_.a1 : last_.a2; }

  bool blocked() const { return aperture_ == 2 && !last_.a2; }

  double offset(int axis) const {
    const Offset2 o = *target();
    return axis == 0 ? o.x : o.y;
  }

  bool within(int axis) const { return std::abs(offset(axis)) <= tolerance_; }

  // Takes a reading unless the budget is spent.
  bool read(char axis_label) {
    if (budget_ >= 0 && plant_.readings_used() - start_ >= budget_) return false;
    last_ = plant_.measure();
    if (trace_) {
      WalkTraceRow row;
      row.reading_index = plant_.readings_used();
      row.mirror = mirror_;
      row.axis = axis_label;
      const int idx = axis_label == 'y' ? control_index(1) : control_index(0);
      row.control_value = plant_.controls()[idx];
      row.offset = target();
      row.aperture = aperture_;
      row.blocked = !last_.a2;
      trace_->push_back(row);
    }
    return true;
  }

  void set(int axis, double value) {
    MirrorControls c = plant_.controls();
    c[control_index(axis)] = value;
    plant_.set_controls(c);
  }

  CenterStatus walk_axis(int axis) {
    const char label = axis == 0 ? 'x' : 'y';
    const double limit = plant_.geometry().control_limit;
    const double c0 = plant_.controls()[control_index(axis)];
    const double y0 = offset(axis);

    // Secant probe; step away from the nearer end stop.
    double step = cfg_.probe_step;
    double c1 = 0.0, y1 = 0.0;
    for (int attempt = 0;; ++attempt) {
      const double dir = c0 + step <= limit ? 1.0 : -1.0;
      c1 = c0 + dir * std::min(step, limit);
      set(axis, c1);
      if (!read(label)) return CenterStatus::kBudgetExceeded;
      if (blocked()) return CenterStatus::kBlocked;
      y1 = offset(axis);
      if (std::abs(y1 - y0) >= floor_) break;
      if (attempt == 1) {
        throw GainEstimationError("beamwalk: mirror " + std::to_string(mirror_) + " axis " + label +
                                  " moves aperture " + std::to_string(aperture_) +
                                  " by less than the noise floor");
      }
      step *= 4.0;
    }
    double gain = (y1 - y0) / (c1 - c0);

    double c = c1, y = y1;
    for (int k = 0; k < cfg_.max_corrections && std::abs(y) > tolerance_; ++k) {
      const double next_c = std::clamp(c - y / gain, -limit, limit);
      set(axis, next_c);
      if (!read(label)) return CenterStatus::kBudgetExceeded;
      if (blocked()) return CenterStatus::kBlocked;
      const double next_y = offset(axis);
      if (std::abs(next_y - y) >= floor_ && next_c != c) gain = (next_y - y) / (next_c - c);
      c = next_c;
      y = next_y;
    }
    return CenterStatus::kCentered;
  }

  CenterResult finish(CenterStatus s) const {
    return {s, plant_.readings_used() - start_, last_};
  }

  Plant& plant_;
  int mirror_;
  int aperture_;
  const WalkConfig& cfg_;
  std::vector<WalkTraceRow>* trace_;
  std::int64_t budget_;
  std::int64_t start_;
  double floor_;
  double tolerance_;
  Measurement last_;
};

}  // namespace

CenterResult center_on_aperture(Plant& plant, int mirror, int aperture, const WalkConfig& cfg,
                                std::vector<WalkTraceRow>* trace, std::int64_t reading_budget) {
  if ((mirror != 1 && mirror != 2) || (aperture != 1 && aperture != 2)) {
    throw ConfigError("center_on_aperture: mirror and aperture must be 1 or 2");
  }
  cfg.validate(plant.geometry().control_limit);
  return Walker(plant, mirror, aperture, cfg, trace, reading_budget).run();
}

BeamWalkResult align_beamwalk(Plant& plant, const WalkConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  cfg.validate(plant.geometry().control_limit);
  const std::int64_t start = plant.readings_used();

  BeamWalkResult out;
  AlignmentReport& r = out.report;
  r.strategy = "beamwalk";
  r.status = "max_iterations";
  auto remaining = [&] { return cfg.max_readings - (plant.readings_used() - start); };

  Measurement last;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    r.outer_iterations = it;
    const CenterResult first = center_on_aperture(plant, 1, 1, cfg, &out.trace, remaining());
    last = first.last;
    if (first.status == CenterStatus::kBudgetExceeded) {
      r.status = "budget_exceeded";
      break;
    }
    const CenterResult second = center_on_aperture(plant, 2, 2, cfg, &out.trace, remaining());
    last = second.last;
    out.a1_radius_per_iteration.push_back(last.a1.radius());
    if (second.status == CenterStatus::kBudgetExceeded) {
      r.status = "budget_exceeded";
      break;
    }
    // A blocked walk hands control straight back to mirror 1.
    if (second.status == CenterStatus::kBlocked) continue;
    if (last.a1.radius() <= cfg.threshold && last.a2 && last.a2->radius() <= cfg.threshold) {
      r.converged = true;
      r.status = "converged";
      break;
    }
  }

  r.final_controls = plant.controls();
  r.residuals = last;
  r.transmitted = last.complete();
  r.readings = plant.readings_used() - start;
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_trace_csv(const std::vector<WalkTraceRow>& trace, std::ostream& out) {
  out << "reading_index,mirror,axis,control_value,dx,dy,aperture,blocked\n";
  for (const auto& row : trace) {
    out << row.reading_index << ',' << row.mirror << ',' << row.axis << ',' << fmt17(row.control_value) << ',';
    if (row.offset) {
      out << fmt17(row.offset->x) << ',' << fmt17(row.offset->y);
    } else {
      out << ',';
    }
    out << ',' << row.aperture << ',' << (row.blocked ? 1 : 0) << '\n';
  }
}

}  // namespace beamalign
