#include "beamalign/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <json.hpp>

#include "beamalign/errors.hpp"
#include "beamalign/format.hpp"

namespace beamalign {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw ConfigError("mlp needs at least an input and an output layer");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] < 1 || sizes_[l + 1] < 1) throw ConfigError("mlp layer sizes must be positive");
    offsets_.push_back(total);
    total += static_cast<std::size_t>(sizes_[l + 1]) * static_cast<std::size_t>(sizes_[l] + 1);
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::initialized(std::vector<int> layer_sizes, std::uint64_t seed) {
  Mlp net(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < net.sizes_.size(); ++l) {
    const int in = net.sizes_[l];
    const int out = net.sizes_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    double* p = net.params_.data() + net.offsets_[l];
    for (int i = 0; i < out * (in + 1); ++i) p[i] = u(rng);
  }
  return net;
}

void Mlp::forward(std::span<const double> input, std::span<double> output) const {
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + static_cast<std::size_t>(out) * static_cast<std::size_t>(in);
    next.assign(static_cast<std::size_t>(out), 0.0);
    for (int o = 0; o < out; ++o) {
      double z = b[o];
      for (int i = 0; i < in; ++i) z += w[o * in + i] * cur[static_cast<std::size_t>(i)];
      next[static_cast<std::size_t>(o)] = (l + 1 < layers) ? std::max(z, 0.0) : z;
    }
    cur.swap(next);
  }
  std::copy(cur.begin(), cur.end(), output.begin());
}

double Mlp::loss_and_gradient(std::span<const double> inputs, std::span<const double> targets,
                              std::size_t batch, std::span<double> gradient) const {
  const std::size_t layers = sizes_.size() - 1;
  const bool want_grad = !gradient.empty();
  if (want_grad) std::fill(gradient.begin(), gradient.end(), 0.0);

  // Activations per layer for the whole batch, row-major (batch x width).
  // Scratch is per thread so concurrent evaluation of one model stays safe.
  thread_local std::vector<std::vector<double>> act;
  thread_local std::vector<double> delta, prev_delta;
  act.resize(layers + 1);
  act[0].assign(inputs.begin(), inputs.begin() + static_cast<std::ptrdiff_t>(batch * sizes_[0]));
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + static_cast<std::size_t>(out) * static_cast<std::size_t>(in);
    const bool hidden = l + 1 < layers;
    act[l + 1].assign(batch * static_cast<std::size_t>(out), 0.0);
    for (std::size_t s = 0; s < batch; ++s) {
      const double* x = act[l].data() + s * static_cast<std::size_t>(in);
      double* y = act[l + 1].data() + s * static_cast<std::size_t>(out);
      for (int o = 0; o < out; ++o) {
        double z = b[o];
        for (int i = 0; i < in; ++i) z += w[o * in + i] * x[i];
        y[o] = hidden ? std::max(z, 0.0) : z;
      }
    }
  }

  const int n_out = sizes_.back();
  const double norm = 1.0 / static_cast<double>(batch * static_cast<std::size_t>(n_out));
  delta.resize(batch * static_cast<std::size_t>(n_out));
  double loss = 0.0;
  for (std::size_t k = 0; k < delta.size(); ++k) {
    const double e = act[layers][k] - targets[k];
    loss += e * e;
    delta[k] = 2.0 * e * norm;
  }
  loss *= norm;
  if (!want_grad) return loss;

  for (std::size_t l = layers; l-- > 0;) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    const double* w = params_.data() + offsets_[l];
    double* gw = gradient.data() + offsets_[l];
    double* gb = gw + static_cast<std::size_t>(out) * static_cast<std::size_t>(in);
    for (std::size_t s = 0; s < batch; ++s) {
      const double* x = act[l].data() + s * static_cast<std::size_t>(in);
      const double* d = delta.data() + s * static_cast<std::size_t>(out);
      for (int o = 0; o < out; ++o) {
        gb[o] += d[o];
        for (int i = 0; i < in; ++i) gw[o * in + i] += d[o] * x[i];
      }
    }
    if (l == 0) break;
    // Back through the weights and the ReLU of the layer below.
    prev_delta.assign(batch * static_cast<std::size_t>(in), 0.0);
    for (std::size_t s = 0; s < batch; ++s) {
      const double* x = act[l].data() + s * static_cast<std::size_t>(in);
      const double* d = delta.data() + s * static_cast<std::size_t>(out);
      double* pd = prev_delta.data() + s * static_cast<std::size_t>(in);
      for (int i = 0; i < in; ++i) {
        if (x[i] <= 0.0) continue;
        double acc = 0.0;
        for (int o = 0; o < out; ++o) acc += w[o * in + i] * d[o];
        pd[i] = acc;
      }
    }
    delta.swap(prev_delta);
  }
  return loss;
}

Standardizer Standardizer::fit(const std::vector<Vec4>& rows) {
  Standardizer s;
  if (rows.empty()) return s;
  for (const auto& r : rows) s.mean += r;
  s.mean /= static_cast<double>(rows.size());
  Vec4 var = Vec4::Zero();
  for (const auto& r : rows) var += (r - s.mean).cwiseAbs2();
  var /= static_cast<double>(rows.size());
  for (int k = 0; k < 4; ++k) {
    const double sd = std::sqrt(var[k]);
    // Constant features are only centred.
    s.scale[k] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be at least 1");
  if (!(learning_rate > 0) || !(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1) || !(epsilon > 0)) {
    throw ConfigError("train: invalid Adam hyperparameters");
  }
  if (layer_sizes.size() < 2 || layer_sizes.front() != 4 || layer_sizes.back() != 4) {
    throw ConfigError("train: reverse model must map 4 measurements to 4 controls");
  }
}

namespace {

void split_rows(const Dataset& d, std::vector<Vec4>& inputs, std::vector<Vec4>& targets) {
  inputs.clear();
  targets.clear();
  for (const auto& r : d.records) {
    if (!r.complete()) throw ValidationError("dataset contains a record without an Aperture-2 reading");
    inputs.push_back(r.measurement.as_vector());
    targets.push_back(r.controls.as_vector());
  }
}

}  // namespace

TrainResult train(const Dataset& train_set, const TrainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (train_set.empty()) throw ValidationError("train: empty training set");
  std::vector<Vec4> raw_in, raw_out;
  split_rows(train_set, raw_in, raw_out);

  TrainResult result;
  MlpModel& model = result.model;
  model.input = Standardizer::fit(raw_in);
  model.output = Standardizer::fit(raw_out);
  std::mt19937_64 rng(seed);
  model.net = Mlp::initialized(cfg.layer_sizes, rng());

  const std::size_t n = raw_in.size();
  std::vector<double> x(n * 4), y(n * 4);
  for (std::size_t s = 0; s < n; ++s) {
    const Vec4 xi = model.input.apply(raw_in[s]);
    const Vec4 yi = model.output.apply(raw_out[s]);
    for (int k = 0; k < 4; ++k) {
      x[s * 4 + static_cast<std::size_t>(k)] = xi[k];
      y[s * 4 + static_cast<std::size_t>(k)] = yi[k];
    }
  }

  const std::size_t p = model.net.parameter_count();
  std::vector<double> grad(p), m(p, 0.0), v(p, 0.0);
  const auto batch_cap = static_cast<std::size_t>(cfg.batch_size);
  std::vector<double> bx(batch_cap * 4), by(batch_cap * 4);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  double beta1_pow = 1.0, beta2_pow = 1.0;
  result.loss_trace.reserve(static_cast<std::size_t>(cfg.epochs));
  auto params = model.net.parameters();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch_cap) {
      const std::size_t b = std::min(batch_cap, n - start);
      for (std::size_t s = 0; s < b; ++s) {
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(order[start + s] * 4), 4, bx.begin() + static_cast<std::ptrdiff_t>(s * 4));
        std::copy_n(y.begin() + static_cast<std::ptrdiff_t>(order[start + s] * 4), 4, by.begin() + static_cast<std::ptrdiff_t>(s * 4));
      }
      epoch_loss += model.net.loss_and_gradient(bx, by, b, grad) * static_cast<double>(b);

      beta1_pow *= cfg.beta1;
      beta2_pow *= cfg.beta2;
      const double step = cfg.learning_rate * std::sqrt(1.0 - beta2_pow) / (1.0 - beta1_pow);
      const double eps_hat = cfg.epsilon * std::sqrt(1.0 - beta2_pow);
      for (std::size_t k = 0; k < p; ++k) {
        m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
        v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
        params[k] -= step * m[k] / (std::sqrt(v[k]) + eps_hat);
      }
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(n));
  }
  return result;
}

MirrorControls predict(const MlpModel& model, const Vec4& measurement) {
  const Vec4 x = model.input.apply(measurement);
  Vec4 y;
  model.net.forward(std::span<const double>(x.data(), 4), std::span<double>(y.data(), 4));
  return MirrorControls::from_vector(model.output.invert(y));
}

RSquared r_squared(const MlpModel& model, const Dataset& d) {
  if (d.empty()) throw ValidationError("r_squared: empty dataset");
  std::vector<Vec4> inputs, targets, predicted;
  split_rows(d, inputs, targets);
  predicted.reserve(inputs.size());
  for (const auto& in : inputs) predicted.push_back(predict(model, in).as_vector());
  return compute_r_squared(predicted, targets);
}

namespace {

nlohmann::json vec_json(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

Vec4 json_vec(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw ValidationError("model json: expected a 4-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

std::string model_to_json(const MlpModel& model) {
  nlohmann::ordered_json j;
  j["layer_sizes"] = model.net.layer_sizes();
  nlohmann::ordered_json layers = nlohmann::ordered_json::array();
  const auto& sizes = model.net.layer_sizes();
  auto params = model.net.parameters();
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const auto nw = static_cast<std::size_t>(sizes[l + 1] * sizes[l]);
    const auto nb = static_cast<std::size_t>(sizes[l + 1]);
    nlohmann::ordered_json layer;
    layer["weights"] = std::vector<double>(params.begin() + static_cast<std::ptrdiff_t>(offset),
                                           params.begin() + static_cast<std::ptrdiff_t>(offset + nw));
    layer["biases"] = std::vector<double>(params.begin() + static_cast<std::ptrdiff_t>(offset + nw),
                                          params.begin() + static_cast<std::ptrdiff_t>(offset + nw + nb));
    layers.push_back(layer);
    offset += nw + nb;
  }
  j["layers"] = layers;
  j["activation"] = "relu_hidden_identity_output";
  j["input_mean"] = vec_json(model.input.mean);
  j["input_std"] = vec_json(model.input.scale);
  j["output_mean"] = vec_json(model.output.mean);
  j["output_std"] = vec_json(model.output.scale);
  return j.dump(2) + "\n";
}

MlpModel model_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    MlpModel model;
    model.net = Mlp(j.at("layer_sizes").get<std::vector<int>>());
    const auto& layers = j.at("layers");
    const auto& sizes = model.net.layer_sizes();
    if (layers.size() + 1 != sizes.size()) throw ValidationError("model json: layer count mismatch");
    auto params = model.net.parameters();
    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const auto w = layers[l].at("weights").get<std::vector<double>>();
      const auto b = layers[l].at("biases").get<std::vector<double>>();
      if (w.size() != static_cast<std::size_t>(sizes[l + 1] * sizes[l]) ||
          b.size() != static_cast<std::size_t>(sizes[l + 1])) {
        throw ValidationError("model json: layer " + std::to_string(l) + " has the wrong shape");
      }
      std::copy(w.begin(), w.end(), params.begin() + static_cast<std::ptrdiff_t>(offset));
      offset += w.size();
      std::copy(b.begin(), b.end(), params.begin() + static_cast<std::ptrdiff_t>(offset));
      offset += b.size();
    }
    model.input = {json_vec(j.at("input_mean")), json_vec(j.at("input_std"))};
    model.output = {json_vec(j.at("output_mean")), json_vec(j.at("output_std"))};
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model json: ") + e.what());
  }
}

void write_loss_trace_csv(const std::vector<double>& trace, std::ostream& out) {
  out << "epoch,mse\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out << i + 1 << ',' << fmt17(trace[i]) << '\n';
}

}  // namespace beamalign
