#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "beamalign/dataset.hpp"
#include "beamalign/metrics.hpp"
#include "beamalign/types.hpp"

namespace beamalign {

/// Fully connected network: ReLU on hidden layers, identity on the output.
/// Parameters live in one flat vector, layer by layer, each layer stored as
/// its weight matrix (out x in, row-major) followed by its bias vector.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static Mlp initialized(std::vector<int> layer_sizes, std::uint64_t seed);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  int inputs() const { return sizes_.front(); }
  int outputs() const { return sizes_.back(); }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  void forward(std::span<const double> input, std::span<double> output) const;

  /// Mean squared error over a batch (row-major, one sample per row) and its
  /// gradient with respect to every parameter. `gradient` may be empty.
  double loss_and_gradient(std::span<const double> inputs, std::span<const double> targets,
                           std::size_t batch, std::span<double> gradient) const;

 private:
  std::size_t weight_offset(std::size_t layer) const { return offsets_[layer]; }

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

struct Standardizer {
  Vec4 mean = Vec4::Zero();
  Vec4 scale = Vec4::Ones();

  static Standardizer fit(const std::vector<Vec4>& rows);
  Vec4 apply(const Vec4& v) const { return (v - mean).cwiseQuotient(scale); }
  Vec4 invert(const Vec4& v) const { return v.cwiseProduct(scale) + mean; }
};

/// Reverse model: (dx1, dy1, dx2, dy2) -> (cm1_yaw, cm1_pitch, cm2_yaw, cm2_pitch).
struct MlpModel {
  Mlp net;
  Standardizer input;
  Standardizer output;
};

struct TrainConfig {
  int epochs = 10'000;
  int batch_size = 10;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<int> layer_sizes = {4, 10, 10, 4};

  void validate() const;
};

struct TrainResult {
  MlpModel model;
  std::vector<double> loss_trace;  // per-epoch mean batch MSE, standardised units
};

/// Mini-batch Adam on MSE. Inputs are measurements, targets are controls.
/// Throws ValidationError on an empty set or a record without an A2 reading.
TrainResult train(const Dataset& train_set, const TrainConfig& cfg, std::uint64_t seed);

MirrorControls predict(const MlpModel& model, const Vec4& measurement);

RSquared r_squared(const MlpModel& model, const Dataset& d);

std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);
void write_loss_trace_csv(const std::vector<double>& trace, std::ostream& out);

}  // namespace beamalign
