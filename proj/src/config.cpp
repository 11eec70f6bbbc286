#include "beamalign/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

#include "beamalign/errors.hpp"
#include "beamalign/seeds.hpp"

namespace beamalign {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

void read_deg(const json& obj, const char* key, double& rad_out, const std::string& where) {
  if (!obj.contains(key)) return;
  double deg = 0;
  read(obj, key, deg, where);
  rad_out = deg_to_rad(deg);
}

}  // namespace

SystemGeometry parse_geometry(const json& j) {
  reject_unknown(j, {"dd0_m", "dd1_m", "dd2_m", "dd3_m", "aperture_radius_1_mm", "aperture_radius_2_mm",
                     "camera_half_field_mm", "control_limit_deg"},
                 "geometry");
  SystemGeometry g;
  read(j, "dd0_m", g.dd0, "geometry");
  read(j, "dd1_m", g.dd1, "geometry");
  read(j, "dd2_m", g.dd2, "geometry");
  read(j, "dd3_m", g.dd3, "geometry");
  read(j, "aperture_radius_1_mm", g.aperture_radius_1, "geometry");
  read(j, "aperture_radius_2_mm", g.aperture_radius_2, "geometry");
  read(j, "camera_half_field_mm", g.camera_half_field, "geometry");
  read_deg(j, "control_limit_deg", g.control_limit, "geometry");
  g.validate();
  return g;
}

nlohmann::ordered_json geometry_to_json(const SystemGeometry& g) {
  nlohmann::ordered_json j;
  j["dd0_m"] = g.dd0;
  j["dd1_m"] = g.dd1;
  j["dd2_m"] = g.dd2;
  j["dd3_m"] = g.dd3;
  j["aperture_radius_1_mm"] = g.aperture_radius_1;
  j["aperture_radius_2_mm"] = g.aperture_radius_2;
  j["camera_half_field_mm"] = g.camera_half_field;
  j["control_limit_deg"] = rad_to_deg(g.control_limit);
  return j;
}

std::vector<std::string> parse_strategy_selector(const std::string& selector) {
  if (selector == "all") return kAllStrategies;
  for (const auto& s : kAllStrategies) {
    if (s == selector) return {s};
  }
  throw ConfigError("unknown strategy '" + selector + "' (expected ann, beamwalk, regression or all)");
}

void ExperimentConfig::reseed(std::uint64_t root) {
  seed = root;
  ann.collection_seed = derive_seed(root, "collection");
  ann.split_seed = derive_seed(root, "split");
  ann.training_seed = derive_seed(root, "training");
  regression.seed = derive_seed(root, "regression");
}

void ExperimentConfig::validate() const {
  geometry.validate();
  if (!(noise_sigma >= 0)) throw ConfigError("plant.noise_sigma_mm must be non-negative");
  if (!(misalignment_magnitude >= 0 && misalignment_magnitude <= 1)) {
    throw ConfigError("misalignment.magnitude must lie in [0, 1]");
  }
  if (ann.samples < 1) throw ConfigError("ann.samples must be positive");
  if (!(ann.train_fraction > 0 && ann.train_fraction < 1)) throw ConfigError("ann.train_fraction must lie in (0, 1)");
  ann.train.validate();
  beamwalk.validate(geometry.control_limit);
  if (output_format != "json" && output_format != "csv") throw ConfigError("output.format must be json or csv");
}

ExperimentConfig parse_config(const json& doc, const std::string& base_dir) {
  reject_unknown(doc, {"seed", "geometry", "plant", "misalignment", "strategy", "ann", "beamwalk",
                       "regression", "calibration", "output"},
                 "config");
  ExperimentConfig cfg;
  std::uint64_t root = cfg.seed;
  read(doc, "seed", root, "config");
  cfg.reseed(root);

  if (doc.contains("geometry")) {
    const json& g = doc.at("geometry");
    if (g.is_string()) {
      const auto path = std::filesystem::path(base_dir) / g.get<std::string>();
      std::ifstream in(path);
      if (!in) throw ConfigError("geometry file not found: " + path.string());
      json gj;
      try {
        gj = json::parse(in);
      } catch (const json::exception& e) {
        throw ConfigError("geometry file " + path.string() + ": " + e.what());
      }
      cfg.geometry = parse_geometry(gj);
    } else {
      cfg.geometry = parse_geometry(g);
    }
  }
  if (doc.contains("plant")) {
    const json& p = doc.at("plant");
    reject_unknown(p, {"noise_sigma_mm"}, "plant");
    read(p, "noise_sigma_mm", cfg.noise_sigma, "plant");
  }
  cfg.misalignment_seed = derive_seed(root, "misalignment");
  if (doc.contains("misalignment")) {
    const json& m = doc.at("misalignment");
    reject_unknown(m, {"seed", "magnitude", "max_lateral_mm", "max_angle_deg"}, "misalignment");
    read(m, "seed", cfg.misalignment_seed, "misalignment");
    read(m, "magnitude", cfg.misalignment_magnitude, "misalignment");
    read(m, "max_lateral_mm", cfg.misalignment_bounds.max_lateral_mm, "misalignment");
    read_deg(m, "max_angle_deg", cfg.misalignment_bounds.max_angle, "misalignment");
  }
  if (doc.contains("strategy")) {
    std::string selector;
    read(doc, "strategy", selector, "config");
    cfg.strategies = parse_strategy_selector(selector);
  }
  if (doc.contains("ann")) {
    const json& a = doc.at("ann");
    reject_unknown(a, {"samples", "train_fraction", "epochs", "batch_size", "learning_rate", "beta1", "beta2",
                       "epsilon", "hidden_layers"},
                   "ann");
    read(a, "samples", cfg.ann.samples, "ann");
    read(a, "train_fraction", cfg.ann.train_fraction, "ann");
    read(a, "epochs", cfg.ann.train.epochs, "ann");
    read(a, "batch_size", cfg.ann.train.batch_size, "ann");
    read(a, "learning_rate", cfg.ann.train.learning_rate, "ann");
    read(a, "beta1", cfg.ann.train.beta1, "ann");
    read(a, "beta2", cfg.ann.train.beta2, "ann");
    read(a, "epsilon", cfg.ann.train.epsilon, "ann");
    if (a.contains("hidden_layers")) {
      std::vector<int> hidden;
      read(a, "hidden_layers", hidden, "ann");
      cfg.ann.train.layer_sizes = {4};
      cfg.ann.train.layer_sizes.insert(cfg.ann.train.layer_sizes.end(), hidden.begin(), hidden.end());
      cfg.ann.train.layer_sizes.push_back(4);
    }
  }
  if (doc.contains("beamwalk")) {
    const json& b = doc.at("beamwalk");
    reject_unknown(b, {"threshold_mm", "max_iterations", "probe_step_mrad", "max_readings", "max_corrections"},
                   "beamwalk");
    read(b, "threshold_mm", cfg.beamwalk.threshold, "beamwalk");
    read(b, "max_iterations", cfg.beamwalk.max_iterations, "beamwalk");
    if (b.contains("probe_step_mrad")) {
      double mrad = 0;
      read(b, "probe_step_mrad", mrad, "beamwalk");
      cfg.beamwalk.probe_step = mrad * 1e-3;
    }
    read(b, "max_readings", cfg.beamwalk.max_readings, "beamwalk");
    read(b, "max_corrections", cfg.beamwalk.max_corrections, "beamwalk");
  }
  if (doc.contains("regression")) {
    const json& r = doc.at("regression");
    reject_unknown(r, {"n_random", "n_registration", "n_step2"}, "regression");
    read(r, "n_random", cfg.regression.n_random, "regression");
    read(r, "n_registration", cfg.regression.n_registration, "regression");
    read(r, "n_step2", cfg.regression.n_step2, "regression");
  }
  if (doc.contains("calibration")) {
    const json& c = doc.at("calibration");
    reject_unknown(c, {"target_block_fraction", "mc_samples"}, "calibration");
    read(c, "target_block_fraction", cfg.calibration.target_block_fraction, "calibration");
    read(c, "mc_samples", cfg.calibration.mc_samples, "calibration");
  }
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown(o, {"path", "format"}, "output");
    read(o, "path", cfg.output_path, "output");
    read(o, "format", cfg.output_format, "output");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_config(doc, std::filesystem::path(path).parent_path().string());
}

}  // namespace beamalign
