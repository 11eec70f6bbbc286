#include "beamalign/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "beamalign/errors.hpp"
#include "beamalign/format.hpp"
#include "beamalign/optics.hpp"

namespace beamalign {

std::size_t Dataset::complete_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const SampleRecord& r) { return r.complete(); }));
}

namespace {

// Largest per-axis A1 excursion per radian of common control deflection.
double a1_row_gain(const SystemGeometry& geometry) {
  const Mat4 g = sensitivity_matrix(geometry);
  return std::max(g.row(0).cwiseAbs().sum(), g.row(1).cwiseAbs().sum());
}

}  // namespace

double sampling_half_width(const SystemGeometry& geometry) {
  geometry.validate();
  const double limit = geometry.control_limit;
  const double gain = a1_row_gain(geometry);
  const double field_bound = geometry.camera_half_field / gain - kCompensationFraction * limit;
  if (!(field_bound > 0)) {
    throw ConfigError("camera field too small to cover recoverable misalignments");
  }
  return std::min(limit, field_bound);
}

MirrorControls draw_uniform_controls(std::mt19937_64& rng, double half_width) {
  std::uniform_real_distribution<double> u(-half_width, half_width);
  MirrorControls c;
  for (int i = 0; i < 4; ++i) c[i] = u(rng);
  return c;
}

Dataset collect_random(Plant& plant, std::size_t n, std::uint64_t rng_seed) {
  if (n < 1) throw ConfigError("collect_random: n must be at least 1");
  const double half_width = sampling_half_width(plant.geometry());
  std::mt19937_64 rng(rng_seed);

  Dataset d;
  d.seed = rng_seed;
  d.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const MirrorControls c = draw_uniform_controls(rng, half_width);
    plant.set_controls(c);
    d.records.push_back({c, plant.measure()});
  }
  return d;
}

Dataset filter_complete(const Dataset& d) {
  Dataset out;
  out.seed = d.seed;
  out.geometry_id = d.geometry_id;
  std::copy_if(d.records.begin(), d.records.end(), std::back_inserter(out.records),
               [](const SampleRecord& r) { return r.complete(); });
  return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& d, double train_fraction,
                                             std::uint64_t rng_seed) {
  if (!(train_fraction > 0 && train_fraction < 1)) {
    throw ConfigError("split_train_test: train_fraction must lie in (0, 1)");
  }
  std::vector<std::size_t> order(d.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Fisher-Yates, written out so the permutation only depends on mt19937_64.
  std::mt19937_64 rng(rng_seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }

  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(d.size()) * train_fraction));
  Dataset train, test;
  train.seed = test.seed = d.seed;
  train.geometry_id = test.geometry_id = d.geometry_id;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (k < n_train ? train : test).records.push_back(d.records[order[k]]);
  }
  return {std::move(train), std::move(test)};
}

ApertureCalibration calibrate_aperture(const SystemGeometry& geometry, double target_block_fraction,
                                       std::size_t mc_samples, std::uint64_t rng_seed) {
  if (!(target_block_fraction >= 0 && target_block_fraction < 1)) {
    throw ConfigError("calibrate_aperture: target fraction must lie in [0, 1); a zero radius is not a valid aperture");
  }
  if (mc_samples < 1) throw ConfigError("calibrate_aperture: mc_samples must be positive");

  const double half_width = sampling_half_width(geometry);
  const Mat4 g = sensitivity_matrix(geometry);
  const double max_offset = half_width * std::hypot(g.row(0).cwiseAbs().sum(), g.row(1).cwiseAbs().sum());
  if (target_block_fraction == 0.0) return {max_offset, 0.0};

  std::mt19937_64 rng(rng_seed);
  std::vector<double> radii(mc_samples);
  for (auto& r : radii) {
    const Vec4 m = g * draw_uniform_controls(rng, half_width).as_vector();
    r = std::hypot(m[0], m[1]);
  }
  auto blocked_fraction = [&](double radius) {
    const auto n = std::count_if(radii.begin(), radii.end(), [&](double r) { return r > radius; });
    return static_cast<double>(n) / static_cast<double>(radii.size());
  };

  double lo = 0.0, hi = max_offset;
  for (int iter = 0; iter < 200 && hi - lo > 1e-9 * max_offset; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (blocked_fraction(mid) > target_block_fraction ? lo : hi) = mid;
  }
  const double fraction = blocked_fraction(hi);
  if (std::abs(fraction - target_block_fraction) > 0.01) {
    throw ConfigError("calibrate_aperture: could not reach target within one percentage point");
  }
  return {hi, fraction};
}

void write_csv(const Dataset& d, std::ostream& out) {
  out << kDatasetCsvHeader << '\n';
  for (const auto& r : d.records) {
    for (int i = 0; i < 4; ++i) out << fmt17(r.controls[i]) << ',';
    out << fmt17(r.measurement.a1.x) << ',' << fmt17(r.measurement.a1.y) << ',';
    if (r.measurement.a2) {
      out << fmt17(r.measurement.a2->x) << ',' << fmt17(r.measurement.a2->y) << ",1\n";
    } else {
      out << ",,0\n";
    }
  }
}

namespace {

double parse_double(const std::string& field, std::size_t line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size()) {
    throw ValidationError("dataset csv line " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return v;
}

}  // namespace

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kDatasetCsvHeader) {
    throw ValidationError("dataset csv: missing or unexpected header");
  }
  Dataset d;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 9) {
      throw ValidationError("dataset csv line " + std::to_string(line_no) + ": expected 9 fields");
    }
    SampleRecord r;
    for (int i = 0; i < 4; ++i) r.controls[i] = parse_double(f[i], line_no);
    r.measurement.a1 = {parse_double(f[4], line_no), parse_double(f[5], line_no)};
    const bool complete = f[8] == "1";
    if (!complete && f[8] != "0") throw ValidationError("dataset csv: complete flag must be 0 or 1");
    if (complete) {
      r.measurement.a2 = Offset2{parse_double(f[6], line_no), parse_double(f[7], line_no)};
    } else if (!f[6].empty() || !f[7].empty()) {
      throw ValidationError("dataset csv line " + std::to_string(line_no) + ": blocked row carries A2 values");
    }
    d.records.push_back(r);
  }
  return d;
}

void save_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path + " for writing");
  write_csv(d, out);
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return read_csv(in);
}

}  // namespace beamalign
