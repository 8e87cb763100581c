#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gsp/graph.hpp"
#include "gsp/sensors.hpp"

namespace gsp::tgcn {

/// Sliding windows over an N x T series: window w reads steps [w, w+L) and
/// targets step w + L - 1 + H. The first floor(split * W) windows train, the
/// rest test, so every train window precedes every test window.
struct WindowSet {
  Eigen::MatrixXd series;
  Eigen::Index input_length = 10;
  Eigen::Index horizon = 12;
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;

  Eigen::Index num_sensors() const { return series.rows(); }
  Eigen::Index size() const { return series.cols() - input_length - horizon + 1; }
  auto input(Eigen::Index w) const { return series.middleCols(w, input_length); }
  auto target(Eigen::Index w) const { return series.col(target_step(w)); }
  Eigen::Index target_step(Eigen::Index w) const { return w + input_length - 1 + horizon; }
  /// N x |windows| matrix of targets.
  Eigen::MatrixXd targets(std::span<const Eigen::Index> windows) const;
};

WindowSet make_windows(const Eigen::MatrixXd& series, Eigen::Index input_length = 10, Eigen::Index horizon = 12,
                       double split = 0.8);

/// ReLU(mixing * H * weight + bias), the bias being per node.
struct GraphConvLayer {
  Eigen::MatrixXd mixing;  // N x N, fixed
  Eigen::MatrixXd weight;  // F_in x F_out
  Eigen::VectorXd bias;    // N

  std::size_t parameter_count() const { return static_cast<std::size_t>(mixing.size() + weight.size() + bias.size()); }
  std::size_t trainable_count() const { return static_cast<std::size_t>(weight.size() + bias.size()); }
};

/// Gate blocks are stacked input, forget, candidate, output (rows of 4U).
struct LstmLayer {
  Eigen::MatrixXd input_weights;      // 4U x F_in
  Eigen::MatrixXd recurrent_weights;  // 4U x U
  Eigen::VectorXd bias;               // 4U

  Eigen::Index units() const { return recurrent_weights.cols(); }
  std::size_t parameter_count() const {
    return static_cast<std::size_t>(input_weights.size() + recurrent_weights.size() + bias.size());
  }
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // N x U
  Eigen::VectorXd bias;    // N

  std::size_t parameter_count() const { return static_cast<std::size_t>(weight.size() + bias.size()); }
};

/// Inputs and targets are clipped to [-clip, clip] and divided by clip so
/// the Tanh head covers them; predictions are multiplied back by clip.
struct OutputScaling {
  double clip = 3.0;
  double scale(double z) const { return std::clamp(z, -clip, clip) / clip; }
};

struct ModelShape {
  Eigen::Index nodes = 42;
  Eigen::Index input_length = 10;
  Eigen::Index gcn_filters = 8;
  Eigen::Index lstm_units = 50;
  double dropout = 0.2;
};

/// gcn1 -> gcn2 -> (filters become timesteps) -> lstm1 -> lstm2 -> dropout -> dense Tanh.
struct TgcnModel {
  GraphConvLayer gcn1;
  GraphConvLayer gcn2;
  LstmLayer lstm1;
  LstmLayer lstm2;
  DenseLayer dense;
  double dropout = 0.2;
  OutputScaling scaling;

  Eigen::Index nodes() const { return gcn1.mixing.rows(); }
  std::size_t trainable_count() const;
  std::size_t parameter_count() const;
};

/// Glorot-uniform kernels, zero biases with forget-gate bias 1. Both
/// mixing matrices are set to `mixing`.
TgcnModel init_model(const Eigen::MatrixXd& mixing, const ModelShape& shape, std::uint64_t seed);

/// Copy with every trainable tensor zeroed (gradient / moment buffers).
TgcnModel zeros_like(const TgcnModel& m);

/// Visits the matching trainable tensors of several same-shaped models with
/// f(name, tensor_of_model_1, tensor_of_model_2, ...).
template <typename F, typename... Models>
void for_each_trainable(F&& f, Models&... ms) {
  f("gcn1.weight", ms.gcn1.weight...);
  f("gcn1.bias", ms.gcn1.bias...);
  f("gcn2.weight", ms.gcn2.weight...);
  f("gcn2.bias", ms.gcn2.bias...);
  f("lstm1.input_weights", ms.lstm1.input_weights...);
  f("lstm1.recurrent_weights", ms.lstm1.recurrent_weights...);
  f("lstm1.bias", ms.lstm1.bias...);
  f("lstm2.input_weights", ms.lstm2.input_weights...);
  f("lstm2.recurrent_weights", ms.lstm2.recurrent_weights...);
  f("lstm2.bias", ms.lstm2.bias...);
  f("dense.weight", ms.dense.weight...);
  f("dense.bias", ms.dense.bias...);
}

Eigen::MatrixXd gcn_forward(const GraphConvLayer& layer, const Eigen::MatrixXd& features);

/// Hidden state after every step (S x U); zero initial hidden and cell state.
Eigen::MatrixXd lstm_forward(const LstmLayer& layer, const Eigen::MatrixXd& sequence);

/// One window (N x L, standardized units) to N outputs in (-1, 1), in
/// inference mode (dropout off).
Eigen::VectorXd model_forward(const TgcnModel& m, const Eigen::MatrixXd& window);

struct BatchLoss {
  double loss = 0.0;  ///< mean squared error in scaled units
  std::size_t samples = 0;
};

/// Mean squared error of the scaled targets over the batch. With `grads`,
/// also accumulates d loss / d parameter into it (it must be zeros_like(m)).
/// A null `dropout_rng` disables dropout.
BatchLoss loss_and_gradient(const TgcnModel& m, const WindowSet& ws, std::span<const Eigen::Index> batch,
                            TgcnModel* grads = nullptr, std::mt19937_64* dropout_rng = nullptr);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::size_t patience = 20;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;
};

struct EpochStats {
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double milliseconds = 0.0;
};

struct TrainResult {
  TgcnModel model;
  std::vector<EpochStats> curve;
  std::size_t best_epoch = 0;
  double ms_per_epoch = 0.0;
};

/// Mini-batch Adam on the train split; the tail of the train split is held
/// out for early stopping and the best-validation weights are returned.
TrainResult train(const TgcnModel& initial, const WindowSet& ws, const TrainConfig& config);

/// Predictions in standardized units, one column per window.
Eigen::MatrixXd predict(const TgcnModel& m, const WindowSet& ws, std::span<const Eigen::Index> windows);

/// Last observed input value per sensor, one column per window.
Eigen::MatrixXd benchmark_last_value(const WindowSet& ws, std::span<const Eigen::Index> windows);

/// Pooled RMSE over all entries. Throws ShapeMismatch.
double forecast_rmse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& targets);

/// Closed-form trainable count for N nodes with the default layer widths.
std::size_t expected_trainable_count(const ModelShape& shape);

void save_checkpoint(const std::filesystem::path& path, const TgcnModel& m);
TgcnModel load_checkpoint(const std::filesystem::path& path);

}  // namespace gsp::tgcn
