#include "beamalign/report.hpp"

#include <cmath>
#include <sstream>

#include "beamalign/errors.hpp"
#include "beamalign/format.hpp"

namespace beamalign {

nlohmann::ordered_json controls_to_json(const MirrorControls& c) {
  nlohmann::ordered_json j;
  for (int i = 0; i < 4; ++i) j[std::string(MirrorControls::kAxisNames[static_cast<std::size_t>(i)]) + "_rad"] = c[i];
  return j;
}

nlohmann::ordered_json measurement_to_json(const Measurement& m) {
  nlohmann::ordered_json j;
  j["dx1_mm"] = m.a1.x;
  j["dy1_mm"] = m.a1.y;
  if (m.a2) {
    j["dx2_mm"] = m.a2->x;
    j["dy2_mm"] = m.a2->y;
  } else {
    j["dx2_mm"] = nullptr;
    j["dy2_mm"] = nullptr;
  }
  return j;
}

nlohmann::ordered_json report_to_json(const AlignmentReport& r, bool include_timing) {
  nlohmann::ordered_json j;
  j["strategy"] = r.strategy;
  j["status"] = r.status;
  j["converged"] = r.converged;
  j["transmitted"] = r.transmitted;
  j["readings"] = r.readings;
  j["reading_unit"] = "frame_pair";
  j["outer_iterations"] = r.outer_iterations;
  j["final_controls"] = controls_to_json(r.final_controls);
  j["residuals"] = measurement_to_json(r.residuals);
  if (include_timing) j["wall_time_s"] = r.wall_time_s;
  return j;
}

AlignmentReport report_from_json(const nlohmann::json& j) {
  try {
    AlignmentReport r;
    r.strategy = j.at("strategy").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.converged = j.at("converged").get<bool>();
    r.transmitted = j.at("transmitted").get<bool>();
    r.readings = j.at("readings").get<std::int64_t>();
    r.outer_iterations = j.at("outer_iterations").get<int>();
    const auto& c = j.at("final_controls");
    for (int i = 0; i < 4; ++i) {
      r.final_controls[i] = c.at(std::string(MirrorControls::kAxisNames[static_cast<std::size_t>(i)]) + "_rad").get<double>();
    }
    const auto& m = j.at("residuals");
    r.residuals.a1 = {m.at("dx1_mm").get<double>(), m.at("dy1_mm").get<double>()};
    if (!m.at("dx2_mm").is_null()) r.residuals.a2 = Offset2{m.at("dx2_mm").get<double>(), m.at("dy2_mm").get<double>()};
    if (j.contains("wall_time_s")) r.wall_time_s = j.at("wall_time_s").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report json: ") + e.what());
  }
}

namespace {

void dump_into(const nlohmann::ordered_json& j, int indent, int depth, std::ostringstream& out) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out << "{}";
      return;
    }
    out << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out << ",\n";
      first = false;
      out << pad << nlohmann::ordered_json(it.key()).dump() << ": ";
      dump_into(it.value(), indent, depth + 1, out);
    }
    out << "\n" << close_pad << "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out << "[]";
      return;
    }
    out << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out << ",\n";
      out << pad;
      dump_into(j[i], indent, depth + 1, out);
    }
    out << "\n" << close_pad << "]";
  } else if (j.is_number_float()) {
    const double v = j.get<double>();
    out << (std::isfinite(v) ? fmt17(v) : std::string("null"));
  } else {
    out << j.dump();
  }
}

}  // namespace

std::string dump_json17(const nlohmann::ordered_json& j, int indent) {
  std::ostringstream out;
  dump_into(j, indent, 0, out);
  out << "\n";
  return out.str();
}

}  // namespace beamalign
