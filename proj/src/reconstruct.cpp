#include "gsp/reconstruct.hpp"

#include <algorithm>

namespace gsp {

SampleMask SampleMask::from_indices(std::size_t n, const std::vector<Eigen::Index>& indices, std::size_t budget) {
  SampleMask mask;
  mask.selected.assign(n, false);
  for (const auto i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= n)
      throw Error(Errc::RangeOutOfBounds, "mask index " + std::to_string(i) + " outside [0," + std::to_string(n) + ")");
    mask.selected[static_cast<std::size_t>(i)] = true;
  }
  mask.budget = budget == 0 ? mask.count() : budget;
  return mask;
}

SampleMask SampleMask::full(std::size_t n) {
  SampleMask mask;
  mask.selected.assign(n, true);
  mask.budget = n;
  return mask;
}

std::size_t SampleMask::count() const {
  return static_cast<std::size_t>(std::count(selected.begin(), selected.end(), true));
}

std::vector<Eigen::Index> SampleMask::indices() const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < selected.size(); ++i)
    if (selected[i]) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

std::vector<Eigen::Index> SampleMask::complement() const {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < selected.size(); ++i)
    if (!selected[i]) out.push_back(static_cast<Eigen::Index>(i));
  return out;
}

std::string SampleMask::key() const {
  std::string out;
  for (const auto i : indices()) {
    if (!out.empty()) out += ',';
    out += std::to_string(i);
  }
  return out;
}

std::vector<Eigen::Index> window_steps(const std::vector<EventWindow>& windows, Eigen::Index num_steps) {
  if (windows.empty()) throw Error(Errc::EmptyWindows, "no event windows given");
  std::vector<bool> covered(static_cast<std::size_t>(num_steps), false);
  for (const auto& w : windows) {
    if (w.start >= w.end || static_cast<Eigen::Index>(w.end) > num_steps)
      throw Error(Errc::RangeOutOfBounds, "event window [" + std::to_string(w.start) + "," +
                                              std::to_string(w.end) + ") outside " + std::to_string(num_steps) +
                                              " steps");
    std::fill(covered.begin() + static_cast<std::ptrdiff_t>(w.start),
              covered.begin() + static_cast<std::ptrdiff_t>(w.end), true);
  }
  std::vector<Eigen::Index> steps;
  for (std::size_t t = 0; t < covered.size(); ++t)
    if (covered[t]) steps.push_back(static_cast<Eigen::Index>(t));
  return steps;
}

double reconstruction_rmse(const Eigen::MatrixXd& original, const Eigen::MatrixXd& reconstructed,
                           const std::vector<EventWindow>& windows) {
  if (original.rows() != reconstructed.rows() || original.cols() != reconstructed.cols())
    throw Error(Errc::ShapeMismatch, "original and reconstructed signals differ in shape");
  const auto steps = window_steps(windows, original.cols());
  double sum = 0.0;
  for (const auto t : steps) sum += (original.col(t) - reconstructed.col(t)).squaredNorm();
  const double count = static_cast<double>(steps.size()) * static_cast<double>(original.rows());
  return count == 0.0 ? 0.0 : std::sqrt(sum / count);
}

}  // namespace gsp
