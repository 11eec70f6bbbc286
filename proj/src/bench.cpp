#include "beamalign/bench.hpp"

#include <algorithm>
#include <future>
#include <ostream>

#include "beamalign/errors.hpp"
#include "beamalign/format.hpp"
#include "beamalign/seeds.hpp"

namespace beamalign {

SimulatedPlant make_plant(const ExperimentConfig& cfg) {
  SimulatedPlant plant(cfg.geometry, cfg.noise_sigma, derive_seed(cfg.seed, "noise"));
  plant.misalign(cfg.misalignment_seed, cfg.misalignment_magnitude, cfg.misalignment_bounds);
  return plant;
}

StrategyOutcome run_strategy(const ExperimentConfig& cfg, const std::string& strategy) {
  SimulatedPlant plant = make_plant(cfg);
  StrategyOutcome out;
  try {
    if (strategy == "ann") {
      AnnAlignment a = align_ann(plant, cfg.ann);
      out.report = a.report;
      out.diagnostics["train_r2_mean"] = a.train_r2.mean;
      out.diagnostics["test_r2_mean"] = a.test_r2.mean;
      out.diagnostics["complete_samples"] = static_cast<double>(a.collected.complete_count());
    } else if (strategy == "beamwalk") {
      out.report = align_beamwalk(plant, cfg.beamwalk).report;
    } else if (strategy == "regression") {
      RegressionAlignment a = align_regression(plant, cfg.regression);
      out.report = a.report;
      out.diagnostics["step2_r2_mean"] = a.step2.reverse.mean_r_squared();
    } else {
      throw ConfigError("unknown strategy '" + strategy + "'");
    }
    out.status_code = out.report.converged ? 0 : 1;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    out.report.strategy = strategy;
    out.report.status = "error";
    out.report.final_controls = plant.controls();
    out.report.readings = plant.readings_used();
    out.status_code = 2;
    out.error = e.what();
  }
  return out;
}

ComparisonReport run(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<std::string> selected;
  for (const auto& s : kAllStrategies) {
    if (std::find(cfg.strategies.begin(), cfg.strategies.end(), s) != cfg.strategies.end()) selected.push_back(s);
  }

  std::vector<std::future<StrategyOutcome>> pending;
  for (const auto& s : selected) {
    pending.push_back(std::async(std::launch::async, [&cfg, s] { return run_strategy(cfg, s); }));
  }
  ComparisonReport report;
  for (auto& f : pending) report.strategies.push_back(f.get());

  if (report.strategies.size() == 3) {
    const auto& ann = report.strategies[0].report;
    const auto& walk = report.strategies[1].report;
    const auto& reg = report.strategies[2].report;
    report.ordering_ok = reg.readings < walk.readings && walk.readings < ann.readings;
  }
  return report;
}

nlohmann::ordered_json comparison_to_json(const ComparisonReport& report, bool include_timing) {
  nlohmann::ordered_json j;
  j["reading_unit"] = "frame_pair";
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& s : report.strategies) {
    nlohmann::ordered_json item = report_to_json(s.report, include_timing);
    item["status_code"] = s.status_code;
    item["error"] = s.error;
    nlohmann::ordered_json diag = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.diagnostics) diag[k] = v;
    item["diagnostics"] = diag;
    list.push_back(item);
  }
  j["strategies"] = list;
  j["expected_order"] = "regression < beamwalk < ann";
  if (report.ordering_ok) {
    j["ordering_check"] = *report.ordering_ok;
  } else {
    j["ordering_check"] = nullptr;
  }
  return j;
}

ComparisonReport comparison_from_json(const nlohmann::json& j) {
  try {
    ComparisonReport report;
    for (const auto& item : j.at("strategies")) {
      StrategyOutcome s;
      s.report = report_from_json(item);
      s.status_code = item.at("status_code").get<int>();
      s.error = item.at("error").get<std::string>();
      for (auto it = item.at("diagnostics").begin(); it != item.at("diagnostics").end(); ++it) {
        s.diagnostics[it.key()] = it.value().get<double>();
      }
      report.strategies.push_back(s);
    }
    if (!j.at("ordering_check").is_null()) report.ordering_ok = j.at("ordering_check").get<bool>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("comparison json: ") + e.what());
  }
}

void emit_json(const ComparisonReport& report, std::ostream& out, bool include_timing) {
  out << dump_json17(comparison_to_json(report, include_timing));
}

void emit_csv(const ComparisonReport& report, std::ostream& out, bool include_timing) {
  out << "strategy,status,status_code,converged,transmitted,readings,outer_iterations,"
         "cm1_yaw_rad,cm1_pitch_rad,cm2_yaw_rad,cm2_pitch_rad,dx1_mm,dy1_mm,dx2_mm,dy2_mm";
  if (include_timing) out << ",wall_time_s";
  out << '\n';
  for (const auto& s : report.strategies) {
    const AlignmentReport& r = s.report;
    out << r.strategy << ',' << r.status << ',' << s.status_code << ',' << (r.converged ? 1 : 0) << ','
        << (r.transmitted ? 1 : 0) << ',' << r.readings << ',' << r.outer_iterations;
    for (int i = 0; i < 4; ++i) out << ',' << fmt17(r.final_controls[i]);
    out << ',' << fmt17(r.residuals.a1.x) << ',' << fmt17(r.residuals.a1.y) << ',';
    if (r.residuals.a2) {
      out << fmt17(r.residuals.a2->x) << ',' << fmt17(r.residuals.a2->y);
    } else {
      out << ',';
    }
    if (include_timing) out << ',' << fmt17(r.wall_time_s);
    out << '\n';
  }
}

}  // namespace beamalign
