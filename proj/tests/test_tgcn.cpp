#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gsp/graph.hpp"
#include "gsp/tgcn.hpp"
#include "support.hpp"

using namespace gsp;
using namespace gsp::tgcn;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// out[n][f] = relu(sum_m sum_k mixing[n][m] x[m][k] w[k][f] + b[n])
Eigen::MatrixXd triple_loop_gcn(const GraphConvLayer& layer, const Eigen::MatrixXd& x) {
  const auto n = layer.mixing.rows();
  Eigen::MatrixXd out(n, layer.weight.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index f = 0; f < layer.weight.cols(); ++f) {
      double acc = layer.bias(i);
      for (Eigen::Index m = 0; m < n; ++m)
        for (Eigen::Index k = 0; k < x.cols(); ++k) acc += layer.mixing(i, m) * x(m, k) * layer.weight(k, f);
      out(i, f) = std::max(0.0, acc);
    }
  return out;
}

// Central differences of the batch loss with respect to every trainable entry,
// returning the worst relative disagreement with the analytic gradient.
double worst_gradient_error(const TgcnModel& model, const WindowSet& ws, std::span<const Eigen::Index> batch) {
  TgcnModel grads = zeros_like(model);
  loss_and_gradient(model, ws, batch, &grads);
  TgcnModel probe = model;
  double worst = 0.0;
  const double h = 1e-6;
  for_each_trainable(
      [&](const char*, auto& param, const auto& grad) {
        for (Eigen::Index i = 0; i < param.size(); ++i) {
          const double saved = param.data()[i];
          param.data()[i] = saved + h;
          const double up = loss_and_gradient(probe, ws, batch).loss;
          param.data()[i] = saved - h;
          const double down = loss_and_gradient(probe, ws, batch).loss;
          param.data()[i] = saved;
          const double numeric = (up - down) / (2.0 * h);
          const double analytic = grad.data()[i];
          const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
          worst = std::max(worst, std::abs(numeric - analytic) / scale);
        }
      },
      probe, grads);
  return worst;
}

ModelShape small_shape(Eigen::Index nodes, Eigen::Index input_length = 4) {
  ModelShape s;
  s.nodes = nodes;
  s.input_length = input_length;
  s.gcn_filters = 3;
  s.lstm_units = 4;
  return s;
}

}  // namespace

TEST_SUITE("tgcn") {

TEST_CASE("window counts") {
  const auto one = make_windows(Eigen::MatrixXd::Random(2, 22));
  CHECK(one.size() == 1);
  CHECK(one.target_step(0) == 21);
  CHECK(make_windows(Eigen::MatrixXd::Zero(1, 2935)).size() == 2914);
  CHECK(testing::code_of([] { make_windows(Eigen::MatrixXd::Zero(1, 21)); }) == Errc::SeriesTooShort);

  const auto ws = make_windows(Eigen::MatrixXd::Zero(1, 121));
  CHECK(ws.train.size() == 80);
  CHECK(ws.test.size() == 20);
  CHECK(ws.train.back() < ws.test.front());
}

TEST_CASE("graph convolution") {
  std::mt19937_64 rng(1);
  SUBCASE("single node with identity weights is a ReLU") {
    const GraphConvLayer layer{Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(1)};
    Eigen::MatrixXd x(1, 3);
    x << 1.5, -2.0, 0.25;
    const Eigen::MatrixXd out = gcn_forward(layer, x);
    CHECK(out(0, 0) == 1.5);
    CHECK(out(0, 1) == 0.0);
    CHECK(out(0, 2) == 0.25);
  }
  SUBCASE("symmetric two-node graph equalizes identical inputs") {
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, 1, 0;
    const GraphConvLayer layer{normalized_adjacency(SensorGraph(a)), testing::random_matrix(rng, 3, 2),
                               Eigen::VectorXd::Zero(2)};
    Eigen::MatrixXd x(2, 3);
    x << 1, 2, 3, 3, 2, 1;
    const Eigen::MatrixXd out = gcn_forward(layer, x);
    CHECK((out.row(0) - out.row(1)).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("matches the triple loop") {
    const auto g = testing::random_connected_graph(rng, 6);
    const GraphConvLayer layer{normalized_adjacency(g), testing::random_matrix(rng, 5, 4), testing::random_vector(rng, 6)};
    const auto x = testing::random_matrix(rng, 6, 5);
    CHECK((gcn_forward(layer, x) - triple_loop_gcn(layer, x)).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("permutation equivariance") {
    const auto g = testing::random_connected_graph(rng, 5);
    const GraphConvLayer layer{normalized_adjacency(g), testing::random_matrix(rng, 3, 2), testing::random_vector(rng, 5)};
    const auto x = testing::random_matrix(rng, 5, 3);
    Eigen::PermutationMatrix<Eigen::Dynamic> p(5);
    p.indices() << 3, 0, 4, 1, 2;
    const GraphConvLayer permuted{p * layer.mixing * p.transpose(), layer.weight, p * layer.bias};
    CHECK((gcn_forward(permuted, p * x) - p * gcn_forward(layer, x)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("lstm") {
  std::mt19937_64 rng(2);
  SUBCASE("zero input with zero candidate bias stays at zero") {
    LstmLayer layer{testing::random_matrix(rng, 12, 2), testing::random_matrix(rng, 12, 3), Eigen::VectorXd::Zero(12)};
    layer.bias.segment(3, 3).setOnes();
    const Eigen::MatrixXd h = lstm_forward(layer, Eigen::MatrixXd::Zero(4, 2));
    CHECK(h.isZero());
  }
  SUBCASE("one unit by hand") {
    // gates i, f, c~, o with scalar weights
    const double wi = 0.5, wf = -0.3, wc = 0.8, wo = 0.2;
    const double ui = 0.1, uf = 0.4, uc = -0.6, uo = 0.7;
    const double bi = 0.05, bf = 1.0, bc = -0.1, bo = 0.0;
    LstmLayer layer{Eigen::Vector4d(wi, wf, wc, wo), Eigen::Vector4d(ui, uf, uc, uo), Eigen::Vector4d(bi, bf, bc, bo)};
    const Eigen::Vector3d x(1.0, -0.5, 2.0);
    double h = 0.0, c = 0.0;
    Eigen::VectorXd expected(3);
    for (int t = 0; t < 3; ++t) {
      const double i = sigmoid(wi * x(t) + ui * h + bi);
      const double f = sigmoid(wf * x(t) + uf * h + bf);
      const double g = std::tanh(wc * x(t) + uc * h + bc);
      const double o = sigmoid(wo * x(t) + uo * h + bo);
      c = f * c + i * g;
      h = o * std::tanh(c);
      expected(t) = h;
    }
    const Eigen::MatrixXd out = lstm_forward(layer, x);
    CHECK((out.col(0) - expected).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("parameter audit") {
  std::mt19937_64 rng(3);
  const auto g = testing::random_connected_graph(rng, 42);
  const auto m = init_model(normalized_adjacency(g), ModelShape{}, 1);
  CHECK(m.gcn1.parameter_count() == 1886);
  CHECK(m.gcn2.parameter_count() == 1870);
  CHECK(m.lstm1.parameter_count() == 18600);
  CHECK(m.lstm2.parameter_count() == 20200);
  CHECK(m.dense.parameter_count() == 2142);
  CHECK(m.trainable_count() == 41170);
  CHECK(expected_trainable_count(ModelShape{}) == 41170);
  ModelShape eleven;
  eleven.nodes = 11;
  CHECK(expected_trainable_count(eleven) == 33327);
  CHECK(m.lstm1.bias.segment(50, 50).isOnes());
  CHECK(m.lstm1.bias.head(50).isZero());
}

TEST_CASE("model outputs") {
  std::mt19937_64 rng(4);
  const auto g = testing::random_connected_graph(rng, 11);
  ModelShape shape;
  shape.nodes = 11;
  const auto m = init_model(normalized_adjacency(g), shape, 7);
  CHECK(m.nodes() == 11);
  const Eigen::VectorXd out = model_forward(m, 5.0 * testing::random_matrix(rng, 11, 10));
  CHECK(out.size() == 11);
  CHECK(out.cwiseAbs().maxCoeff() < 1.0);
  CHECK(testing::code_of([&] { model_forward(m, Eigen::MatrixXd::Zero(11, 9)); }) == Errc::ShapeMismatch);
}

TEST_CASE("analytic gradients match finite differences") {
  std::mt19937_64 rng(5);
  const auto g = testing::random_connected_graph(rng, 3);
  const auto shape = small_shape(3);
  auto m = init_model(normalized_adjacency(g), shape, 9);
  // non-zero biases so every gate and ReLU path carries gradient
  std::normal_distribution<double> jitter(0.0, 0.1);
  for_each_trainable([&](const char*, auto& t) { t = t.unaryExpr([&](double v) { return v + jitter(rng); }); }, m);
  const auto ws = make_windows(0.8 * testing::random_matrix(rng, 3, 4 + 12 + 2), 4, 12);
  REQUIRE(ws.size() == 3);
  const std::vector<Eigen::Index> batch{0, 1, 2};
  CHECK(worst_gradient_error(m, ws, batch) < 1e-4);
}

TEST_CASE("training") {
  std::mt19937_64 rng(6);
  const auto g = testing::random_connected_graph(rng, 3);
  const auto shape = small_shape(3);
  const auto m = init_model(normalized_adjacency(g), shape, 3);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 8;
  cfg.learning_rate = 1e-2;
  cfg.patience = 50;

  SUBCASE("zero targets are learnt") {
    const auto ws = make_windows(Eigen::MatrixXd::Zero(3, 60), 4, 12);
    auto start = m;
    start.dense.bias = Eigen::VectorXd::Constant(3, 0.5);  // zero inputs alone would already give zero output
    const auto before = loss_and_gradient(start, ws, ws.train).loss;
    CHECK(before > 0.1);
    const auto result = train(start, ws, cfg);
    REQUIRE(!result.curve.empty());
    for (const auto& e : result.curve) CHECK(std::isfinite(e.train_loss));
    CHECK(result.curve.back().train_loss < 1e-3);
    CHECK(result.curve.back().train_loss < before);
  }
  SUBCASE("restores the best validation epoch") {
    const auto ws = make_windows(testing::random_matrix(rng, 3, 80), 4, 12);
    cfg.epochs = 10;
    const auto result = train(m, ws, cfg);
    double best = 1e300;
    for (const auto& e : result.curve) best = std::min(best, e.validation_loss);
    CHECK(result.curve[result.best_epoch].validation_loss == best);
    CHECK(result.ms_per_epoch > 0.0);
  }
  SUBCASE("empty train split") {
    const auto ws = make_windows(testing::random_matrix(rng, 3, 17), 4, 12, 0.1);
    CHECK(ws.train.empty());
    CHECK(testing::code_of([&] { train(m, ws, cfg); }) == Errc::EmptyTrainSet);
  }
  SUBCASE("same seed, same model") {
    const auto ws = make_windows(testing::random_matrix(rng, 3, 60), 4, 12);
    cfg.epochs = 3;
    const auto a = train(m, ws, cfg);
    const auto b = train(m, ws, cfg);
    CHECK(a.model.dense.weight == b.model.dense.weight);
    CHECK(a.model.gcn1.weight == b.model.gcn1.weight);
  }
}

TEST_CASE("last-value benchmark") {
  const auto constant = make_windows(Eigen::MatrixXd::Constant(2, 40, 1.5));
  CHECK(forecast_rmse(benchmark_last_value(constant, constant.test), constant.targets(constant.test)) == 0.0);
  Eigen::MatrixXd ramp(1, 60);
  for (Eigen::Index t = 0; t < 60; ++t) ramp(0, t) = static_cast<double>(t);
  const auto ws = make_windows(ramp);
  CHECK(forecast_rmse(benchmark_last_value(ws, ws.test), ws.targets(ws.test)) == doctest::Approx(12.0));
  CHECK(testing::code_of([] { forecast_rmse(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 3)); }) ==
        Errc::ShapeMismatch);
  Eigen::MatrixXd p(1, 2), t(1, 2);
  p << 1, 3;
  t << 0, 0;
  CHECK(forecast_rmse(p, t) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 rng(8);
  const auto g = testing::random_connected_graph(rng, 5);
  ModelShape shape;
  shape.nodes = 5;
  const auto m = init_model(normalized_adjacency(g), shape, 2);
  const auto path = std::filesystem::temp_directory_path() / "gsp_test_checkpoint.bin";
  save_checkpoint(path, m);
  const auto back = load_checkpoint(path);
  CHECK(back.gcn1.mixing == m.gcn1.mixing);
  CHECK(back.lstm2.recurrent_weights == m.lstm2.recurrent_weights);
  CHECK(back.dense.bias == m.dense.bias);
  CHECK(back.dropout == m.dropout);
  const Eigen::MatrixXd window = testing::random_matrix(rng, 5, 10);
  CHECK(model_forward(back, window) == model_forward(m, window));
  std::filesystem::remove(path);
}

}
