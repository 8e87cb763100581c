#include "gsp/tgcn.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "gsp/error.hpp"

namespace gsp::tgcn {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::MatrixXd WindowSet::targets(std::span<const Index> windows) const {
  MatrixXd out(num_sensors(), static_cast<Index>(windows.size()));
  for (std::size_t k = 0; k < windows.size(); ++k) out.col(static_cast<Index>(k)) = target(windows[k]);
  return out;
}

WindowSet make_windows(const MatrixXd& series, Index input_length, Index horizon, double split) {
  if (input_length < 1 || horizon < 1) throw Error(Errc::ConfigInvalid, "window length and horizon must be positive");
  if (!(split > 0.0 && split <= 1.0)) throw Error(Errc::ConfigInvalid, "split must be in (0, 1]");
  if (series.cols() < input_length + horizon)
    throw Error(Errc::SeriesTooShort, "need at least " + std::to_string(input_length + horizon) + " steps, got " +
                                          std::to_string(series.cols()));
  WindowSet ws;
  ws.series = series;
  ws.input_length = input_length;
  ws.horizon = horizon;
  const Index total = ws.size();
  const auto train_count = static_cast<Index>(std::floor(split * static_cast<double>(total)));
  for (Index w = 0; w < total; ++w) (w < train_count ? ws.train : ws.test).push_back(w);
  return ws;
}

std::size_t TgcnModel::trainable_count() const {
  return gcn1.trainable_count() + gcn2.trainable_count() + lstm1.parameter_count() + lstm2.parameter_count() +
         dense.parameter_count();
}

std::size_t TgcnModel::parameter_count() const {
  return gcn1.parameter_count() + gcn2.parameter_count() + lstm1.parameter_count() + lstm2.parameter_count() +
         dense.parameter_count();
}

std::size_t expected_trainable_count(const ModelShape& s) {
  const auto n = static_cast<std::size_t>(s.nodes);
  const auto l = static_cast<std::size_t>(s.input_length);
  const auto f = static_cast<std::size_t>(s.gcn_filters);
  const auto u = static_cast<std::size_t>(s.lstm_units);
  return (l * f + n) + (f * f + n) + 4 * ((n + u) * u + u) + 4 * ((u + u) * u + u) + (u * n + n);
}

namespace {

MatrixXd glorot(Index rows, Index cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  MatrixXd out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = dist(rng);
  return out;
}

LstmLayer init_lstm(Index inputs, Index units, std::mt19937_64& rng) {
  LstmLayer layer;
  layer.input_weights = glorot(4 * units, inputs, rng);
  layer.recurrent_weights = glorot(4 * units, units, rng);
  layer.bias = VectorXd::Zero(4 * units);
  layer.bias.segment(units, units).setOnes();
  return layer;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmCache {
  std::vector<MatrixXd> x;     // inputs, F x B
  std::vector<MatrixXd> h;     // h[0] = 0, h[t+1] after step t, U x B
  std::vector<MatrixXd> c;     // same layout as h
  std::vector<MatrixXd> gate;  // activated gates, 4U x B
};

void lstm_batch_forward(const LstmLayer& layer, std::vector<MatrixXd> inputs, LstmCache& cache) {
  const Index u = layer.units();
  const Index batch = inputs.empty() ? 0 : inputs.front().cols();
  if (!inputs.empty() && inputs.front().rows() != layer.input_weights.cols())
    throw Error(Errc::ShapeMismatch, "lstm expects " + std::to_string(layer.input_weights.cols()) + " features, got " +
                                         std::to_string(inputs.front().rows()));
  cache.x = std::move(inputs);
  cache.h.assign(1, MatrixXd::Zero(u, batch));
  cache.c.assign(1, MatrixXd::Zero(u, batch));
  cache.gate.clear();
  for (const auto& x : cache.x) {
    MatrixXd a = layer.input_weights * x + layer.recurrent_weights * cache.h.back();
    a.colwise() += layer.bias;
    a.topRows(2 * u) = a.topRows(2 * u).unaryExpr(&sigmoid);
    a.middleRows(2 * u, u) = a.middleRows(2 * u, u).array().tanh();
    a.bottomRows(u) = a.bottomRows(u).unaryExpr(&sigmoid);
    MatrixXd c = a.middleRows(u, u).cwiseProduct(cache.c.back()) + a.topRows(u).cwiseProduct(a.middleRows(2 * u, u));
    MatrixXd h = a.bottomRows(u).cwiseProduct(c.array().tanh().matrix());
    cache.gate.push_back(std::move(a));
    cache.c.push_back(std::move(c));
    cache.h.push_back(std::move(h));
  }
}

// Backpropagation through time. dh_out[t] is dLoss/dh after step t (may be
// empty for no direct gradient). Returns dLoss/dx per step when asked.
void lstm_batch_backward(const LstmLayer& layer, const LstmCache& cache, const std::vector<MatrixXd>& dh_out,
                         LstmLayer& grad, std::vector<MatrixXd>* dx) {
  const Index u = layer.units();
  const auto steps = cache.x.size();
  const Index batch = cache.h.front().cols();
  MatrixXd dh_next = MatrixXd::Zero(u, batch);
  MatrixXd dc_next = MatrixXd::Zero(u, batch);
  if (dx) dx->assign(steps, MatrixXd());
  MatrixXd da(4 * u, batch);
  for (std::size_t s = steps; s-- > 0;) {
    const MatrixXd& gate = cache.gate[s];
    const auto i = gate.topRows(u).array();
    const auto f = gate.middleRows(u, u).array();
    const auto g = gate.middleRows(2 * u, u).array();
    const auto o = gate.bottomRows(u).array();
    const Eigen::ArrayXXd tanh_c = cache.c[s + 1].array().tanh();

    Eigen::ArrayXXd dh = dh_next.array();
    if (dh_out[s].size() != 0) dh += dh_out[s].array();
    const Eigen::ArrayXXd dc = dh * o * (1.0 - tanh_c.square()) + dc_next.array();

    da.topRows(u) = (dc * g * i * (1.0 - i)).matrix();
    da.middleRows(u, u) = (dc * cache.c[s].array() * f * (1.0 - f)).matrix();
    da.middleRows(2 * u, u) = (dc * i * (1.0 - g.square())).matrix();
    da.bottomRows(u) = (dh * tanh_c * o * (1.0 - o)).matrix();

    grad.input_weights.noalias() += da * cache.x[s].transpose();
    grad.recurrent_weights.noalias() += da * cache.h[s].transpose();
    grad.bias += da.rowwise().sum();
    if (dx) (*dx)[s] = layer.input_weights.transpose() * da;
    dh_next = layer.recurrent_weights.transpose() * da;
    dc_next = (dc * f).matrix();
  }
}

struct ForwardCache {
  std::vector<MatrixXd> p1, z1, p2, z2;
  LstmCache l1, l2;
  MatrixXd dropout_mask;
  MatrixXd hidden;
  MatrixXd output;
};

MatrixXd relu(const MatrixXd& z) { return z.cwiseMax(0.0); }

void check_window_shape(const TgcnModel& m, const MatrixXd& window) {
  if (window.rows() != m.nodes() || window.cols() != m.gcn1.weight.rows())
    throw Error(Errc::ShapeMismatch, "window is " + std::to_string(window.rows()) + "x" + std::to_string(window.cols()) +
                                         ", model expects " + std::to_string(m.nodes()) + "x" +
                                         std::to_string(m.gcn1.weight.rows()));
}

// Forward pass over scaled windows; returns N x B Tanh outputs.
const MatrixXd& forward(const TgcnModel& m, const std::vector<MatrixXd>& windows, ForwardCache& cache,
                        std::mt19937_64* dropout_rng) {
  const auto batch = static_cast<Index>(windows.size());
  const Index n = m.nodes();
  const Index filters = m.gcn2.weight.cols();
  cache.p1.resize(windows.size());
  cache.z1.resize(windows.size());
  cache.p2.resize(windows.size());
  cache.z2.resize(windows.size());
  std::vector<MatrixXd> sequence(static_cast<std::size_t>(filters), MatrixXd(n, batch));
  for (Index b = 0; b < batch; ++b) {
    const auto k = static_cast<std::size_t>(b);
    check_window_shape(m, windows[k]);
    cache.p1[k] = m.gcn1.mixing * windows[k];
    cache.z1[k] = cache.p1[k] * m.gcn1.weight;
    cache.z1[k].colwise() += m.gcn1.bias;
    cache.p2[k] = m.gcn2.mixing * relu(cache.z1[k]);
    cache.z2[k] = cache.p2[k] * m.gcn2.weight;
    cache.z2[k].colwise() += m.gcn2.bias;
    // N x F -> F steps of N features
    for (Index t = 0; t < filters; ++t) sequence[static_cast<std::size_t>(t)].col(b) = cache.z2[k].col(t).cwiseMax(0.0);
  }
  lstm_batch_forward(m.lstm1, std::move(sequence), cache.l1);
  lstm_batch_forward(m.lstm2, std::vector<MatrixXd>(cache.l1.h.begin() + 1, cache.l1.h.end()), cache.l2);

  cache.hidden = cache.l2.h.back();
  if (dropout_rng && m.dropout > 0.0) {
    const double keep = 1.0 - m.dropout;
    std::bernoulli_distribution coin(keep);
    cache.dropout_mask.resize(cache.hidden.rows(), cache.hidden.cols());
    for (Index j = 0; j < cache.hidden.cols(); ++j)
      for (Index i = 0; i < cache.hidden.rows(); ++i) cache.dropout_mask(i, j) = coin(*dropout_rng) ? 1.0 / keep : 0.0;
    cache.hidden = cache.hidden.cwiseProduct(cache.dropout_mask);
  } else {
    cache.dropout_mask.resize(0, 0);
  }
  cache.output = m.dense.weight * cache.hidden;
  cache.output.colwise() += m.dense.bias;
  cache.output = cache.output.array().tanh();
  return cache.output;
}

MatrixXd scaled(const TgcnModel& m, const Eigen::Ref<const MatrixXd>& values) {
  return values.unaryExpr([&](double z) { return m.scaling.scale(z); });
}

}  // namespace

TgcnModel init_model(const MatrixXd& mixing, const ModelShape& shape, std::uint64_t seed) {
  if (mixing.rows() != shape.nodes || mixing.cols() != shape.nodes)
    throw Error(Errc::ShapeMismatch, "mixing matrix must be " + std::to_string(shape.nodes) + " square");
  std::mt19937_64 rng(seed);
  TgcnModel m;
  m.gcn1 = {mixing, glorot(shape.input_length, shape.gcn_filters, rng), VectorXd::Zero(shape.nodes)};
  m.gcn2 = {mixing, glorot(shape.gcn_filters, shape.gcn_filters, rng), VectorXd::Zero(shape.nodes)};
  m.lstm1 = init_lstm(shape.nodes, shape.lstm_units, rng);
  m.lstm2 = init_lstm(shape.lstm_units, shape.lstm_units, rng);
  m.dense = {glorot(shape.nodes, shape.lstm_units, rng), VectorXd::Zero(shape.nodes)};
  m.dropout = shape.dropout;
  return m;
}

TgcnModel zeros_like(const TgcnModel& m) {
  TgcnModel z = m;
  for_each_trainable([](const char*, auto& a) { a.setZero(); }, z);
  return z;
}

MatrixXd gcn_forward(const GraphConvLayer& layer, const MatrixXd& features) {
  const Index n = layer.mixing.rows();
  if (features.rows() != n || features.cols() != layer.weight.rows() || layer.bias.size() != n)
    throw Error(Errc::ShapeMismatch, "gcn input " + std::to_string(features.rows()) + "x" +
                                         std::to_string(features.cols()) + " does not fit layer");
  MatrixXd z = layer.mixing * features * layer.weight;
  z.colwise() += layer.bias;
  return relu(z);
}

MatrixXd lstm_forward(const LstmLayer& layer, const MatrixXd& sequence) {
  std::vector<MatrixXd> steps;
  for (Index t = 0; t < sequence.rows(); ++t) steps.emplace_back(sequence.row(t).transpose());
  LstmCache cache;
  lstm_batch_forward(layer, std::move(steps), cache);
  MatrixXd out(sequence.rows(), layer.units());
  for (Index t = 0; t < sequence.rows(); ++t) out.row(t) = cache.h[static_cast<std::size_t>(t + 1)].col(0).transpose();
  return out;
}

VectorXd model_forward(const TgcnModel& m, const MatrixXd& window) {
  check_window_shape(m, window);
  ForwardCache cache;
  return forward(m, {scaled(m, window)}, cache, nullptr).col(0);
}

BatchLoss loss_and_gradient(const TgcnModel& m, const WindowSet& ws, std::span<const Index> batch, TgcnModel* grads,
                            std::mt19937_64* dropout_rng) {
  if (batch.empty()) return {};
  std::vector<MatrixXd> inputs;
  inputs.reserve(batch.size());
  for (const auto w : batch) inputs.push_back(scaled(m, ws.input(w)));
  const MatrixXd target = scaled(m, ws.targets(batch));

  ForwardCache cache;
  const MatrixXd& out = forward(m, inputs, cache, dropout_rng);
  const MatrixXd residual = out - target;
  const auto count = static_cast<double>(residual.size());
  BatchLoss result{residual.squaredNorm() / count, batch.size()};
  if (!grads) return result;

  // dense Tanh head
  const MatrixXd d_pre = (2.0 / count) * residual.cwiseProduct((1.0 - out.array().square()).matrix());
  grads->dense.weight.noalias() += d_pre * cache.hidden.transpose();
  grads->dense.bias += d_pre.rowwise().sum();
  MatrixXd d_hidden = m.dense.weight.transpose() * d_pre;
  if (cache.dropout_mask.size() > 0) d_hidden = d_hidden.cwiseProduct(cache.dropout_mask);

  std::vector<MatrixXd> dh2(cache.l2.x.size());
  dh2.back() = d_hidden;
  std::vector<MatrixXd> dh1;
  lstm_batch_backward(m.lstm2, cache.l2, dh2, grads->lstm2, &dh1);
  std::vector<MatrixXd> d_sequence;
  lstm_batch_backward(m.lstm1, cache.l1, dh1, grads->lstm1, &d_sequence);

  const Index filters = m.gcn2.weight.cols();
  MatrixXd dz2(m.nodes(), filters);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto b = static_cast<Index>(k);
    for (Index t = 0; t < filters; ++t) dz2.col(t) = d_sequence[static_cast<std::size_t>(t)].col(b);
    dz2 = dz2.cwiseProduct((cache.z2[k].array() > 0.0).cast<double>().matrix());
    grads->gcn2.weight.noalias() += cache.p2[k].transpose() * dz2;
    grads->gcn2.bias += dz2.rowwise().sum();
    const MatrixXd dh1_nodes = m.gcn2.mixing.transpose() * (dz2 * m.gcn2.weight.transpose());
    const MatrixXd dz1 = dh1_nodes.cwiseProduct((cache.z1[k].array() > 0.0).cast<double>().matrix());
    grads->gcn1.weight.noalias() += cache.p1[k].transpose() * dz1;
    grads->gcn1.bias += dz1.rowwise().sum();
  }
  return result;
}

namespace {

double mean_loss(const TgcnModel& m, const WindowSet& ws, std::span<const Index> windows, std::size_t chunk) {
  double weighted = 0.0;
  std::size_t total = 0;
  for (std::size_t begin = 0; begin < windows.size(); begin += chunk) {
    const auto part = windows.subspan(begin, std::min(chunk, windows.size() - begin));
    const auto r = loss_and_gradient(m, ws, part);
    weighted += r.loss * static_cast<double>(r.samples);
    total += r.samples;
  }
  return total == 0 ? 0.0 : weighted / static_cast<double>(total);
}

}  // namespace

TrainResult train(const TgcnModel& initial, const WindowSet& ws, const TrainConfig& config) {
  if (ws.train.empty()) throw Error(Errc::EmptyTrainSet, "no training windows");
  if (ws.num_sensors() != initial.nodes())
    throw Error(Errc::ShapeMismatch, "window set has " + std::to_string(ws.num_sensors()) + " sensors, model " +
                                         std::to_string(initial.nodes()));
  if (config.batch_size == 0) throw Error(Errc::ConfigInvalid, "batch: must be positive");

  std::size_t held_out = 0;
  if (ws.train.size() >= 10)
    held_out = static_cast<std::size_t>(std::floor(config.validation_fraction * static_cast<double>(ws.train.size())));
  std::vector<Index> fit(ws.train.begin(), ws.train.end() - static_cast<std::ptrdiff_t>(held_out));
  const std::vector<Index> validation(ws.train.end() - static_cast<std::ptrdiff_t>(held_out), ws.train.end());

  TrainResult result{initial, {}, 0, 0.0};
  TgcnModel model = initial;
  TgcnModel first_moment = zeros_like(model);
  TgcnModel second_moment = zeros_like(model);
  std::mt19937_64 rng(config.seed);
  double best = std::numeric_limits<double>::infinity();
  std::size_t step = 0;
  std::size_t stale = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(fit.begin(), fit.end(), rng);
    double weighted = 0.0;
    for (std::size_t begin = 0; begin < fit.size(); begin += config.batch_size) {
      const auto batch = std::span<const Index>(fit).subspan(begin, std::min(config.batch_size, fit.size() - begin));
      TgcnModel grads = zeros_like(model);
      const auto r = loss_and_gradient(model, ws, batch, &grads, &rng);
      if (!std::isfinite(r.loss))
        throw Error(Errc::DivergedLoss, "non-finite loss at epoch " + std::to_string(epoch) + ", batch starting " +
                                            std::to_string(begin));
      weighted += r.loss * static_cast<double>(r.samples);
      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      for_each_trainable(
          [&](const char*, auto& param, const auto& grad, auto& m1, auto& m2) {
            m1 = config.beta1 * m1 + (1.0 - config.beta1) * grad;
            m2 = config.beta2 * m2 + (1.0 - config.beta2) * grad.cwiseAbs2();
            param.array() -= config.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + config.epsilon);
          },
          model, grads, first_moment, second_moment);
    }
    EpochStats stats;
    stats.train_loss = weighted / static_cast<double>(fit.size());
    stats.validation_loss = validation.empty() ? stats.train_loss : mean_loss(model, ws, validation, 256);
    stats.milliseconds = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.validation_loss))
      throw Error(Errc::DivergedLoss, "non-finite loss at epoch " + std::to_string(epoch));
    result.curve.push_back(stats);

    if (stats.validation_loss < best) {
      best = stats.validation_loss;
      result.model = model;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  double total_ms = 0.0;
  for (const auto& e : result.curve) total_ms += e.milliseconds;
  result.ms_per_epoch = result.curve.empty() ? 0.0 : total_ms / static_cast<double>(result.curve.size());
  return result;
}

MatrixXd predict(const TgcnModel& m, const WindowSet& ws, std::span<const Index> windows) {
  MatrixXd out(m.nodes(), static_cast<Index>(windows.size()));
  constexpr std::size_t chunk = 256;
  for (std::size_t begin = 0; begin < windows.size(); begin += chunk) {
    const auto part = windows.subspan(begin, std::min(chunk, windows.size() - begin));
    std::vector<MatrixXd> inputs;
    for (const auto w : part) inputs.push_back(scaled(m, ws.input(w)));
    ForwardCache cache;
    out.middleCols(static_cast<Index>(begin), static_cast<Index>(part.size())) =
        m.scaling.clip * forward(m, inputs, cache, nullptr);
  }
  return out;
}

MatrixXd benchmark_last_value(const WindowSet& ws, std::span<const Index> windows) {
  MatrixXd out(ws.num_sensors(), static_cast<Index>(windows.size()));
  for (std::size_t k = 0; k < windows.size(); ++k)
    out.col(static_cast<Index>(k)) = ws.series.col(windows[k] + ws.input_length - 1);
  return out;
}

double forecast_rmse(const MatrixXd& predictions, const MatrixXd& targets) {
  if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
    throw Error(Errc::ShapeMismatch, "predictions and targets differ in shape");
  if (predictions.size() == 0) return 0.0;
  // plain left-to-right sum so the value does not depend on SIMD width
  double sum = 0.0;
  for (Index k = 0; k < predictions.size(); ++k) {
    const double d = predictions.data()[k] - targets.data()[k];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predictions.size()));
}

}  // namespace gsp::tgcn
