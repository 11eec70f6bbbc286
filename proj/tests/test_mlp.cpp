#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "beamalign/dataset.hpp"
#include "beamalign/errors.hpp"
#include "beamalign/metrics.hpp"
#include "beamalign/mlp.hpp"
#include "beamalign/plant.hpp"
#include "support/loss_windows.hpp"

using namespace beamalign;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

SampleRecord make_record(const Vec4& meas, const Vec4& ctrl) {
  SampleRecord r;
  r.controls = MirrorControls::from_vector(ctrl);
  r.measurement.a1 = {meas[0], meas[1]};
  r.measurement.a2 = Offset2{meas[2], meas[3]};
  return r;
}

}  // namespace

TEST_CASE("backprop gradient matches central finite differences") {
  const std::vector<std::vector<int>> shapes = {{4, 4}, {4, 10, 4}, {4, 10, 10, 4}, {3, 7, 5, 2}};
  for (const auto& shape : shapes) {
    Mlp net = Mlp::initialized(shape, 21);
    const std::size_t batch = 6;
    const auto x = random_values(batch * shape.front(), 1);
    const auto y = random_values(batch * shape.back(), 2);
    std::vector<double> grad(net.parameter_count());
    net.loss_and_gradient(x, y, batch, grad);

    const double h = 1e-6;
    double worst = 0;
    for (std::size_t p = 0; p < net.parameter_count(); ++p) {
      const double saved = net.parameters()[p];
      net.parameters()[p] = saved + h;
      const double up = net.loss_and_gradient(x, y, batch, {});
      net.parameters()[p] = saved - h;
      const double down = net.loss_and_gradient(x, y, batch, {});
      net.parameters()[p] = saved;
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad[p]) / std::max(std::abs(fd) + std::abs(grad[p]), 1e-6));
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("loss is the mean over samples and outputs") {
  // A single linear layer with all-zero parameters predicts zero.
  Mlp net({2, 2});
  const std::vector<double> x = {1, 2, 3, 4};
  const std::vector<double> y = {1, 2, 3, 4};
  CHECK(net.loss_and_gradient(x, y, 2, {}) == doctest::Approx((1 + 4 + 9 + 16) / 4.0));
}

TEST_CASE("hidden layers use ReLU and the output is linear") {
  Mlp net({1, 1, 1});
  auto p = net.parameters();
  // layer 0: w = 1, b = 0; layer 1: w = -2, b = 0.5
  p[0] = 1;
  p[1] = 0;
  p[2] = -2;
  p[3] = 0.5;
  double out = 0;
  const double pos = 3, neg = -3;
  net.forward(std::span<const double>(&pos, 1), std::span<double>(&out, 1));
  CHECK(out == doctest::Approx(-5.5));
  net.forward(std::span<const double>(&neg, 1), std::span<double>(&out, 1));
  CHECK(out == doctest::Approx(0.5));
}

TEST_CASE("a single record is memorised") {
  Dataset d;
  d.records.push_back(make_record({1.0, -2.0, 3.0, 0.5}, {0.01, -0.02, 0.03, 0.04}));
  TrainConfig cfg;
  cfg.epochs = 2000;
  cfg.batch_size = 1;
  cfg.learning_rate = 1e-2;
  const TrainResult r = train(d, cfg, 5);
  CHECK(r.loss_trace.size() == 2000);
  CHECK(r.loss_trace.back() < 1e-10);
  const MirrorControls c = predict(r.model, {1.0, -2.0, 3.0, 0.5});
  CHECK(c.cm2_yaw == doctest::Approx(0.03).epsilon(1e-5));
}

TEST_CASE("training on plant data: smoothed loss settles and results are reproducible") {
  SimulatedPlant plant(SystemGeometry{}, 0.01, 1);
  plant.misalign(2, 0.5);
  const Dataset d = filter_complete(collect_random(plant, 400, 3));
  TrainConfig cfg;
  cfg.epochs = 600;
  const TrainResult a = train(d, cfg, 7);
  const TrainResult b = train(d, cfg, 7);
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(std::equal(a.model.net.parameters().begin(), a.model.net.parameters().end(),
                   b.model.net.parameters().begin()));

  const auto windows = testing::window_means(a.loss_trace, 100);
  CHECK(windows.back() < windows.front() / 100);
  CHECK(testing::smoothed_loss_non_increasing(windows));

  const TrainResult c = train(d, cfg, 8);
  CHECK_FALSE(c.loss_trace == a.loss_trace);
  CHECK(r_squared(a.model, d).mean > 0.99);
}

TEST_CASE("training rejects bad input") {
  TrainConfig cfg;
  CHECK_THROWS_AS(train(Dataset{}, cfg, 1), ValidationError);
  Dataset d;
  d.records.push_back(make_record({1, 2, 3, 4}, {0, 0, 0, 0}));
  d.records.front().measurement.a2.reset();
  CHECK_THROWS_AS(train(d, cfg, 1), ValidationError);

  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.layer_sizes = {3, 10, 4};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.beta1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("R-squared") {
  std::vector<Vec4> actual;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 50; ++k) actual.push_back({nd(rng), nd(rng), nd(rng), nd(rng)});

  CHECK(compute_r_squared(actual, actual).mean == doctest::Approx(1.0));

  Vec4 mean = Vec4::Zero();
  for (const Vec4& v : actual) mean += v;
  mean /= static_cast<double>(actual.size());
  const std::vector<Vec4> flat(actual.size(), mean);
  const RSquared r = compute_r_squared(flat, actual);
  for (double v : r.per_output) CHECK(std::abs(v) < 1e-12);

  // Hand computed: actual {1, 2, 3}, predicted {1, 2, 4} -> 1 - 1/2.
  std::vector<Vec4> a3, p3;
  for (double v : {1.0, 2.0, 3.0}) a3.push_back(Vec4::Constant(v));
  for (double v : {1.0, 2.0, 4.0}) p3.push_back(Vec4::Constant(v));
  CHECK(compute_r_squared(p3, a3).mean == doctest::Approx(0.5));

  std::vector<Vec4> constant_axis = actual;
  for (Vec4& v : constant_axis) v[2] = 1.0;
  try {
    compute_r_squared(actual, constant_axis);
    FAIL("expected UndefinedRSquared");
  } catch (const UndefinedRSquared& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("model JSON round trip preserves predictions bit for bit") {
  SimulatedPlant plant(SystemGeometry{}, 0.01, 1);
  const Dataset d = filter_complete(collect_random(plant, 200, 3));
  TrainConfig cfg;
  cfg.epochs = 50;
  const MlpModel m = train(d, cfg, 4).model;
  const std::string text = model_to_json(m);
  const MlpModel back = model_from_json(text);
  CHECK(model_to_json(back) == text);
  for (const SampleRecord& r : d.records) {
    CHECK(predict(back, r.measurement.as_vector()) == predict(m, r.measurement.as_vector()));
  }
  CHECK_THROWS(model_from_json("{\"layer_sizes\": [4, 4]}"));
}

TEST_CASE("loss trace CSV") {
  std::ostringstream out;
  write_loss_trace_csv({0.5, 0.25}, out);
  CHECK(out.str() == "epoch,mse\n1,0.5\n2,0.25\n");
}
