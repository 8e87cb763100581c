#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include <doctest.h>

#include <Eigen/Dense>

#include "gsp/error.hpp"
#include "gsp/graph.hpp"
#include "gsp/sensors.hpp"

namespace gsp::testing {

/// Erdos-Renyi style graph with uniform weights in (0.1, 1].
inline SensorGraph random_graph(std::mt19937_64& rng, Eigen::Index n, double density = 0.4) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (coin(rng) < density) a(i, j) = a(j, i) = weight(rng);
  return SensorGraph(a);
}

/// Random graph that is guaranteed connected (a random spanning path plus extras).
inline SensorGraph random_connected_graph(std::mt19937_64& rng, Eigen::Index n, double density = 0.3) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) a(order[i - 1], order[i]) = a(order[i], order[i - 1]) = weight(rng);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (a(i, j) == 0.0 && coin(rng) < density) a(i, j) = a(j, i) = weight(rng);
  return SensorGraph(a);
}

inline SensorGraph path_graph(Eigen::Index n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) a(i - 1, i) = a(i, i - 1) = 1.0;
  return SensorGraph(a);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

/// Error code thrown by f; fails the test when nothing is thrown.
inline Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::ParseError;
}

inline SignalMatrix signals_from(const Eigen::MatrixXd& values) {
  SignalMatrix s;
  s.values = values;
  s.sensors = default_sensors(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index t = 0; t < values.cols(); ++t) s.times.push_back(static_cast<double>(t));
  return s;
}

}  // namespace gsp::testing
