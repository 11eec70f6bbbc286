#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "beamalign/bench.hpp"
#include "beamalign/config.hpp"
#include "beamalign/errors.hpp"
#include "beamalign/report.hpp"

using namespace beamalign;
using nlohmann::json;

namespace {

ExperimentConfig quick_config() {
  ExperimentConfig cfg = load_config(BEAMALIGN_CONFIG_DIR "/default.json");
  cfg.ann.train.epochs = 20;
  return cfg;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("config parsing") {
  const json base = json::parse(R"({
    "seed": 11,
    "geometry": {"dd0_m": 0.2, "dd1_m": 0.3, "dd2_m": 0.3, "dd3_m": 0.9,
                 "aperture_radius_1_mm": 100, "aperture_radius_2_mm": 100,
                 "camera_half_field_mm": 350, "control_limit_deg": 5.27},
    "plant": {"noise_sigma_mm": 0.02},
    "strategy": "regression",
    "beamwalk": {"threshold_mm": 0.1, "probe_step_mrad": 2},
    "ann": {"hidden_layers": [8, 6]}
  })");
  const ExperimentConfig cfg = parse_config(base);
  CHECK(cfg.seed == 11);
  CHECK(cfg.noise_sigma == 0.02);
  CHECK(cfg.geometry.aperture_radius_1 == 100.0);
  CHECK(cfg.geometry.control_limit == doctest::Approx(deg_to_rad(5.27)));
  CHECK(cfg.strategies == std::vector<std::string>{"regression"});
  CHECK(cfg.beamwalk.threshold == 0.1);
  CHECK(cfg.beamwalk.probe_step == doctest::Approx(2e-3));
  CHECK(cfg.ann.train.layer_sizes == std::vector<int>{4, 8, 6, 4});

  SUBCASE("unknown keys are rejected at every level") {
    json bad = base;
    bad["sed"] = 1;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base;
    bad["plant"]["noise"] = 1;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base;
    bad["geometry"]["dd4_m"] = 1;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
  }

  SUBCASE("invalid values are rejected") {
    json bad = base;
    bad["strategy"] = "hill-climb";
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base;
    bad["plant"]["noise_sigma_mm"] = -1;
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
    bad = base;
    bad["seed"] = "abc";
    CHECK_THROWS_AS(parse_config(bad), ConfigError);
  }

  SUBCASE("geometry may be a file reference") {
    json doc = base;
    doc["geometry"] = "geometry_default.json";
    const ExperimentConfig fromfile = parse_config(doc, BEAMALIGN_CONFIG_DIR);
    CHECK(fromfile.geometry == SystemGeometry{});
    doc["geometry"] = "missing.json";
    CHECK_THROWS_AS(parse_config(doc, BEAMALIGN_CONFIG_DIR), ConfigError);
  }

  SUBCASE("geometry round trip") {
    CHECK(parse_geometry(geometry_to_json(cfg.geometry)) == cfg.geometry);
  }

  CHECK(parse_strategy_selector("all") == kAllStrategies);
  CHECK_THROWS_AS(parse_strategy_selector("none"), ConfigError);
}

TEST_CASE("the shipped config describes the default bench") {
  const ExperimentConfig cfg = load_config(BEAMALIGN_CONFIG_DIR "/default.json");
  CHECK(cfg.geometry == SystemGeometry{});
  CHECK(cfg.noise_sigma == 0.01);
  CHECK(cfg.strategies == kAllStrategies);
}

TEST_CASE("comparison run") {
  const ExperimentConfig cfg = quick_config();
  const ComparisonReport report = run(cfg);
  REQUIRE(report.strategies.size() == 3);
  CHECK(report.strategies[0].report.strategy == "ann");
  CHECK(report.strategies[1].report.strategy == "beamwalk");
  CHECK(report.strategies[2].report.strategy == "regression");
  CHECK(report.ordering_ok.has_value());
  CHECK(report.strategies[0].report.readings == 1001);
  CHECK(report.strategies[2].report.readings == 69);

  SUBCASE("every strategy sees the same misalignment") {
    for (const auto& s : report.strategies) {
      CHECK(s.status_code != 2);
    }
    CHECK(make_plant(cfg).errors() == make_plant(cfg).errors());
  }

  SUBCASE("deterministic apart from wall time") {
    const ComparisonReport again = run(cfg);
    std::ostringstream a, b;
    emit_json(report, a, false);
    emit_json(again, b, false);
    CHECK(a.str() == b.str());
  }

  SUBCASE("JSON round trip") {
    std::ostringstream out;
    emit_json(report, out);
    const ComparisonReport back = comparison_from_json(json::parse(out.str()));
    std::ostringstream again;
    emit_json(back, again);
    CHECK(again.str() == out.str());
  }

  SUBCASE("JSON and CSV carry the same values") {
    std::ostringstream js, cs;
    emit_json(report, js);
    emit_csv(report, cs);
    const json doc = json::parse(js.str());
    std::istringstream lines(cs.str());
    std::string header, line;
    std::getline(lines, header);
    const auto names = split_fields(header);
    for (const auto& item : doc["strategies"]) {
      REQUIRE(std::getline(lines, line));
      const auto fields = split_fields(line);
      REQUIRE(fields.size() == names.size());
      CHECK(fields[0] == item["strategy"].get<std::string>());
      CHECK(std::stoll(fields[5]) == item["readings"].get<long long>());
      for (std::size_t k = 7; k < names.size(); ++k) {
        const std::string& name = names[k];
        const json* value = nullptr;
        if (item["final_controls"].contains(name)) value = &item["final_controls"][name];
        if (item["residuals"].contains(name)) value = &item["residuals"][name];
        if (name == "wall_time_s") value = &item["wall_time_s"];
        REQUIRE(value != nullptr);
        if (value->is_null()) {
          CHECK(fields[k].empty());
        } else {
          CHECK(std::strtod(fields[k].c_str(), nullptr) == value->get<double>());
        }
      }
    }
  }
}

TEST_CASE("empty strategy set gives a header-only CSV") {
  std::ostringstream out;
  emit_csv(ComparisonReport{}, out, false);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  CHECK(text.rfind("strategy,status,", 0) == 0);
}

TEST_CASE("regression through the bench is exact without noise") {
  ExperimentConfig cfg = quick_config();
  cfg.noise_sigma = 0.0;
  cfg.strategies = {"regression"};
  const ComparisonReport report = run(cfg);
  REQUIRE(report.strategies.size() == 1);
  CHECK_FALSE(report.ordering_ok.has_value());
  const StrategyOutcome& s = report.strategies.front();
  CHECK(s.status_code == 0);
  CHECK(s.report.residuals.as_vector().cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("strategy failures are recorded, not thrown") {
  ExperimentConfig cfg = quick_config();
  cfg.strategies = {"beamwalk"};
  cfg.geometry.dd2 = 0.0;
  cfg.beamwalk.max_readings = 5;
  const ComparisonReport report = run(cfg);
  CHECK(report.strategies.front().status_code == 1);

  // An unusable mirror-1 gain: the walk cannot estimate it and reports an error.
  ExperimentConfig broken = quick_config();
  broken.strategies = {"beamwalk"};
  broken.noise_sigma = 50.0;
  const StrategyOutcome s = run_strategy(broken, "beamwalk");
  CHECK(s.status_code != 0);
}
