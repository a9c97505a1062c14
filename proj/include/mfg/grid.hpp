#pragma once

// Tensor grids over the box [-L, L]^N and multilinear interpolation with
// constant extrapolation outside the box.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace mfg {

class TensorGrid {
 public:
  TensorGrid() = default;

  TensorGrid(std::vector<std::size_t> counts, double half_width) : counts_(std::move(counts)), half_width_(half_width) {
    if (counts_.empty()) throw std::invalid_argument("TensorGrid: no modes");
    if (!(half_width_ > 0.0)) throw std::invalid_argument("TensorGrid: half width must be positive");
    strides_.assign(counts_.size(), 1);
    for (std::size_t k = counts_.size(); k-- > 0;) {
      if (counts_[k] < 2) throw std::invalid_argument("TensorGrid: need at least two points per mode");
      if (k + 1 < counts_.size()) strides_[k] = strides_[k + 1] * counts_[k + 1];
    }
    size_ = strides_[0] * counts_[0];
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      std::vector<double> axis(counts_[k]);
      for (std::size_t i = 0; i < counts_[k]; ++i)
        axis[i] = -half_width_ + 2.0 * half_width_ * static_cast<double>(i) / static_cast<double>(counts_[k] - 1);
      axes_.push_back(std::move(axis));
    }
  }

  static TensorGrid uniform(std::size_t modes, std::size_t points, double half_width) {
    return TensorGrid(std::vector<std::size_t>(modes, points), half_width);
  }

  std::size_t modes() const { return counts_.size(); }
  std::size_t size() const { return size_; }
  double half_width() const { return half_width_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  const std::vector<std::size_t>& strides() const { return strides_; }
  const std::vector<double>& axis(std::size_t k) const { return axes_[k]; }
  double spacing(std::size_t k) const { return 2.0 * half_width_ / static_cast<double>(counts_[k] - 1); }

  /// Index along mode k of the flat node index.
  std::size_t axis_index(std::size_t flat, std::size_t k) const { return (flat / strides_[k]) % counts_[k]; }

  void node(std::size_t flat, std::span<double> out) const {
    for (std::size_t k = 0; k < counts_.size(); ++k) out[k] = axes_[k][axis_index(flat, k)];
  }

  std::vector<double> node(std::size_t flat) const {
    std::vector<double> x(modes());
    node(flat, x);
    return x;
  }

  /// Nodes at least `margin` grid cells away from the boundary along every mode.
  bool is_interior(std::size_t flat, std::size_t margin = 1) const {
    for (std::size_t k = 0; k < counts_.size(); ++k) {
      const std::size_t i = axis_index(flat, k);
      if (i < margin || i + margin >= counts_[k]) return false;
    }
    return true;
  }

  bool contains(std::span<const double> x) const {
    for (double c : x)
      if (std::abs(c) > half_width_) return false;
    return true;
  }

  /// Left cell index and weight of the right neighbour along mode k, with
  /// clamping to the box.
  void locate(std::size_t k, double x, std::size_t& cell, double& weight) const {
    const double h = spacing(k);
    double u = (std::clamp(x, -half_width_, half_width_) + half_width_) / h;
    const auto last = static_cast<double>(counts_[k] - 1);
    if (u >= last) u = last;
    auto i = static_cast<std::size_t>(u);
    if (i >= counts_[k] - 1) i = counts_[k] - 2;
    cell = i;
    weight = u - static_cast<double>(i);
  }

  /// Multilinear interpolation of a nodal field (stride `components`, use
  /// component `c`).
  double interpolate(std::span<const double> values, std::span<const double> x, std::size_t components = 1,
                     std::size_t c = 0) const {
    const std::size_t n = counts_.size();
    std::size_t cells[3];
    double weights[3];
    if (n > 3) throw std::invalid_argument("TensorGrid: interpolation supports at most three modes");
    for (std::size_t k = 0; k < n; ++k) locate(k, x[k], cells[k], weights[k]);
    double total = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
      double w = 1.0;
      std::size_t flat = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const bool up = (corner >> k) & 1u;
        w *= up ? weights[k] : 1.0 - weights[k];
        flat += (cells[k] + (up ? 1 : 0)) * strides_[k];
      }
      if (w != 0.0) total += w * values[flat * components + c];
    }
    return total;
  }

  /// Interpolates all `components` of a vector field at once.
  void interpolate_all(std::span<const double> values, std::span<const double> x, std::size_t components,
                       std::span<double> out) const {
    const std::size_t n = counts_.size();
    std::size_t cells[3];
    double weights[3];
    if (n > 3) throw std::invalid_argument("TensorGrid: interpolation supports at most three modes");
    for (std::size_t k = 0; k < n; ++k) locate(k, x[k], cells[k], weights[k]);
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(components), 0.0);
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
      double w = 1.0;
      std::size_t flat = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const bool up = (corner >> k) & 1u;
        w *= up ? weights[k] : 1.0 - weights[k];
        flat += (cells[k] + (up ? 1 : 0)) * strides_[k];
      }
      if (w == 0.0) continue;
      for (std::size_t c = 0; c < components; ++c) out[c] += w * values[flat * components + c];
    }
  }

 private:
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> strides_;
  std::vector<std::vector<double>> axes_;
  std::size_t size_ = 0;
  double half_width_ = 1.0;
};

}  // namespace mfg
