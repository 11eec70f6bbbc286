#include <doctest.h>

#include <cmath>
#include <sstream>

#include "beamalign/beamwalk.hpp"
#include "beamalign/errors.hpp"
#include "beamalign/optics.hpp"
#include "beamalign/plant.hpp"

using namespace beamalign;

namespace {

std::int64_t line_count(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_CASE("already centred: one reading and no control change") {
  SimulatedPlant plant(SystemGeometry{}, 0.0, 1);
  const CenterResult r = center_on_aperture(plant, 1, 1, WalkConfig{});
  CHECK(r.status == CenterStatus::kCentered);
  CHECK(r.readings == 1);
  CHECK(plant.readings_used() == 1);
  CHECK(plant.controls() == MirrorControls{});

  SimulatedPlant aligned(SystemGeometry{}, 0.0, 1);
  aligned.misalign(3, 0.0);
  const BeamWalkResult walk = align_beamwalk(aligned, WalkConfig{});
  CHECK(walk.report.converged);
  CHECK(walk.report.readings <= 4);
}

TEST_CASE("one axis off converges with probe, correction and confirmation") {
  SimulatedPlant plant(SystemGeometry{}, 0.0, 1);
  MisalignmentErrors e;
  e.laser_dx = 2.0;
  plant.set_errors(e);
  std::vector<WalkTraceRow> trace;
  const CenterResult r = center_on_aperture(plant, 1, 1, WalkConfig{}, &trace);
  CHECK(r.status == CenterStatus::kCentered);
  // Entry reading, then probe + correction-confirm on x; y needs nothing.
  CHECK(r.readings <= 3);
  CHECK(std::abs(r.last.a1.x) <= WalkConfig{}.threshold / std::sqrt(2.0));
  CHECK(plant.controls().cm1_pitch == 0.0);
  CHECK(plant.controls().cm2_yaw == 0.0);
  CHECK(static_cast<std::int64_t>(trace.size()) == r.readings);
}

TEST_CASE("walking mirror 2 onto Aperture 2 can block Aperture 1") {
  // Small first aperture; A1 centred but A2 200 mm out. Centring A2 with
  // mirror 2 needs about 83 mrad of yaw, which swings A1 by about 50 mm.
  SystemGeometry g;
  g.aperture_radius_1 = 20.0;
  SimulatedPlant plant(g, 0.0, 1);
  MisalignmentErrors e;
  e.laser_dtheta = 200.0 / (g.dd3 * 1e3);
  e.laser_dx = -e.laser_dtheta * (g.dd0 + g.dd1 + g.dd2) * 1e3;
  plant.set_errors(e);
  REQUIRE(plant.true_offsets().head<2>().norm() < 1e-9);

  const CenterResult r = center_on_aperture(plant, 2, 2, WalkConfig{});
  CHECK(r.status == CenterStatus::kBlocked);
  CHECK_FALSE(r.last.complete());
  CHECK(r.last.a1.radius() > g.aperture_radius_1);
  CHECK(plant.readings_used() == r.readings);
}

TEST_CASE("Aperture 2 cannot be walked while blocked") {
  const SystemGeometry g;
  SimulatedPlant plant(g, 0.0, 1);
  MisalignmentErrors e;
  e.laser_dx = 1.2 * g.aperture_radius_1;
  plant.set_errors(e);
  const CenterResult r = center_on_aperture(plant, 2, 2, WalkConfig{});
  CHECK(r.status == CenterStatus::kBlocked);
  CHECK(r.readings == 1);
}

TEST_CASE("mirror with no lever on the target aperture fails gain estimation") {
  SystemGeometry g;
  g.dd2 = 0.0;
  SimulatedPlant plant(g, 0.0, 1);
  MisalignmentErrors e;
  e.laser_dx = 3.0;
  plant.set_errors(e);
  CHECK_THROWS_AS(center_on_aperture(plant, 2, 1, WalkConfig{}), GainEstimationError);
}

TEST_CASE("full walk on the noise-free plant") {
  const SystemGeometry g;
  const WalkConfig cfg;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    CAPTURE(seed);
    SimulatedPlant plant(g, 0.0, seed);
    plant.misalign(seed, 1.0);
    // Readings taken before the walk are not charged to it.
    plant.measure();
    const BeamWalkResult walk = align_beamwalk(plant, cfg);
    CHECK(walk.report.readings == plant.readings_used() - 1);
    CHECK(walk.report.converged);
    CHECK(walk.report.outer_iterations < cfg.max_iterations);
    CHECK(walk.report.residuals.a1.radius() <= cfg.threshold);
    CHECK(walk.report.residuals.a2->radius() <= cfg.threshold);
    CHECK(walk.report.readings <= 300);
    CHECK(static_cast<std::int64_t>(walk.trace.size()) == walk.report.readings);
    const auto& radii = walk.a1_radius_per_iteration;
    CHECK(static_cast<int>(radii.size()) == walk.report.outer_iterations);
    for (std::size_t i = 1; i < radii.size(); ++i) CHECK(radii[i] <= radii[i - 1] + 1e-12);
  }
}

TEST_CASE("zero mirror-2 lever arm needs a single outer iteration") {
  SystemGeometry g;
  g.dd2 = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SimulatedPlant plant(g, 0.0, seed);
    plant.misalign(seed, 1.0);
    const BeamWalkResult walk = align_beamwalk(plant, WalkConfig{});
    CHECK(walk.report.converged);
    CHECK(walk.report.outer_iterations == 1);
  }
}

TEST_CASE("reading budget ends the walk without an exception") {
  SimulatedPlant plant(SystemGeometry{}, 0.01, 1);
  plant.misalign(2, 1.0);
  WalkConfig cfg;
  cfg.max_readings = 10;
  const BeamWalkResult walk = align_beamwalk(plant, cfg);
  CHECK_FALSE(walk.report.converged);
  CHECK(walk.report.status == "budget_exceeded");
  CHECK(walk.report.readings <= 10);
  CHECK(walk.report.readings == plant.readings_used());
}

TEST_CASE("iteration cap ends the walk without an exception") {
  SimulatedPlant plant(SystemGeometry{}, 0.0, 1);
  plant.misalign(2, 1.0);
  WalkConfig cfg;
  cfg.max_iterations = 1;
  const BeamWalkResult walk = align_beamwalk(plant, cfg);
  CHECK_FALSE(walk.report.converged);
  CHECK(walk.report.status == "max_iterations");
  CHECK(walk.report.outer_iterations == 1);
}

TEST_CASE("trace CSV has one row per reading") {
  SimulatedPlant plant(SystemGeometry{}, 0.01, 1);
  plant.misalign(5, 0.5);
  const BeamWalkResult walk = align_beamwalk(plant, WalkConfig{});
  std::ostringstream out;
  write_trace_csv(walk.trace, out);
  const std::string text = out.str();
  CHECK(text.rfind("reading_index,mirror,axis,control_value,dx,dy,aperture,blocked\n", 0) == 0);
  CHECK(line_count(text) == walk.report.readings + 1);
}

TEST_CASE("config validation") {
  const double limit = SystemGeometry{}.control_limit;
  WalkConfig cfg;
  CHECK_NOTHROW(cfg.validate(limit));
  cfg.threshold = 0;
  CHECK_THROWS_AS(cfg.validate(limit), ConfigError);
  cfg = {};
  cfg.probe_step = 2 * limit;
  CHECK_THROWS_AS(cfg.validate(limit), ConfigError);
}
