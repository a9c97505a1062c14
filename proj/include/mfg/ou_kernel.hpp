#pragma once

// The Ornstein-Uhlenbeck transition semigroup R_t and its likelihood-ratio
// gradient D R_t, by tensor Gauss-Hermite quadrature over the truncated modes.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/grid.hpp"
#include "mfg/parallel.hpp"
#include "mfg/spectral_core.hpp"

namespace mfg {

/// A real-valued function of the N mode coordinates.
using ScalarFn = std::function<double(std::span<const double>)>;

inline constexpr std::size_t kMaxTensorModes = 3;

/// Gauss-Hermite rule for the standard normal: sum_i w_i f(z_i) ~ E f(Z).
class QuadratureRule {
 public:
  explicit QuadratureRule(std::size_t nodes = 16) {
    if (nodes == 0) throw std::invalid_argument("QuadratureRule: need at least one node");
    nodes_.assign(nodes, 0.0);
    weights_.assign(nodes, 1.0);
    if (nodes == 1) return;
    // Jacobi matrix of the monic probabilists' Hermite recurrence.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes));
    Eigen::VectorXd sub(static_cast<Eigen::Index>(nodes - 1));
    for (std::size_t i = 1; i < nodes; ++i) sub(static_cast<Eigen::Index>(i - 1)) = std::sqrt(static_cast<double>(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw std::runtime_error("QuadratureRule: eigen-decomposition failed");
    std::vector<double> z(nodes), w(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      z[i] = es.eigenvalues()(static_cast<Eigen::Index>(i));
      const double v0 = es.eigenvectors()(0, static_cast<Eigen::Index>(i));
      w[i] = v0 * v0;
    }
    // Enforce exact symmetry about zero and unit total mass.
    double total = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      const std::size_t j = nodes - 1 - i;
      nodes_[i] = 0.5 * (z[i] - z[j]);
      weights_[i] = 0.5 * (w[i] + w[j]);
      total += weights_[i];
    }
    for (double& x : weights_) x /= total;
  }

  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

inline void require_tensor_compatible(const SpectrumSpec& spec, std::span<const double> x) {
  if (spec.modes() > kMaxTensorModes)
    throw std::invalid_argument("tensor quadrature supports at most " + std::to_string(kMaxTensorModes) + " modes");
  if (x.size() != spec.modes()) throw std::invalid_argument("point has " + std::to_string(x.size()) +
                                                            " coordinates, spectrum has " +
                                                            std::to_string(spec.modes()) + " modes");
}

struct RtEvaluation {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Value R_t phi(x) and, if requested, the gradient D R_t phi(x) from one
/// sweep over the tensor nodes.
inline RtEvaluation evaluate_Rt(const SpectrumSpec& spec, const QuadratureRule& rule, const ScalarFn& phi, double t,
                                std::span<const double> x, bool with_gradient) {
  require_tensor_compatible(spec, x);
  if (t < 0.0) throw std::invalid_argument("evaluate_Rt: negative time");
  const std::size_t n = spec.modes();
  RtEvaluation out;
  if (t == 0.0) {
    if (with_gradient) throw std::invalid_argument("gradient_DRt: the representation is singular at t = 0");
    out.value = phi(x);
    return out;
  }
  double mean[kMaxTensorModes], sd[kMaxTensorModes], lr[kMaxTensorModes];
  for (std::size_t k = 0; k < n; ++k) {
    mean[k] = semigroup_factor(spec, k, t) * x[k];
    sd[k] = std::sqrt(covariance_qk(spec, k, t));
    lr[k] = with_gradient ? smoothing_weight(spec, k, t) : 0.0;
  }
  const std::size_t q = rule.size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= q;
  double y[kMaxTensorModes];
  double grad[kMaxTensorModes] = {0.0, 0.0, 0.0};
  double value = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t r = idx;
    double w = 1.0;
    std::size_t node[kMaxTensorModes];
    for (std::size_t k = n; k-- > 0;) {
      node[k] = r % q;
      r /= q;
      w *= rule.weights()[node[k]];
      y[k] = mean[k] + sd[k] * rule.nodes()[node[k]];
    }
    const double f = phi(std::span<const double>(y, n));
    value += w * f;
    if (with_gradient)
      for (std::size_t k = 0; k < n; ++k) grad[k] += w * f * rule.nodes()[node[k]];
  }
  out.value = value;
  if (with_gradient) {
    out.gradient.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.gradient[k] = lr[k] * grad[k];
  }
  return out;
}

inline double apply_Rt(const SpectrumSpec& spec, const QuadratureRule& rule, const ScalarFn& phi, double t,
                       std::span<const double> x) {
  return evaluate_Rt(spec, rule, phi, t, x, false).value;
}

/// (D R_t phi(x))_k = Lambda_k(t) E[phi(e^{tA}x + sqrt(q(t)) Z) Z_k].
inline std::vector<double> gradient_DRt(const SpectrumSpec& spec, const QuadratureRule& rule, const ScalarFn& phi,
                                        double t, std::span<const double> x) {
  if (!(t > 0.0)) throw std::invalid_argument("gradient_DRt: the representation is singular at t = 0");
  return evaluate_Rt(spec, rule, phi, t, x, true).gradient;
}

struct SmoothingRow {
  double t = 0.0;
  double ratio = 0.0;  // sup_x |D R_t phi(x)| sqrt(t) / |phi|_inf
};

inline std::vector<SmoothingRow> smoothing_audit(const SpectrumSpec& spec, const QuadratureRule& rule,
                                                 const ScalarFn& phi, double sup_norm,
                                                 const std::vector<double>& t_grid,
                                                 const std::vector<std::vector<double>>& x_sample) {
  std::vector<SmoothingRow> rows;
  for (double t : t_grid) {
    double sup = 0.0;
    for (const auto& x : x_sample) {
      const auto g = gradient_DRt(spec, rule, phi, t, x);
      double s = 0.0;
      for (double c : g) s += c * c;
      sup = std::max(sup, std::sqrt(s));
    }
    rows.push_back({t, sup_norm > 0.0 ? sup * std::sqrt(t) / sup_norm : 0.0});
  }
  return rows;
}

/// R_t and D R_t acting on nodal fields of a tensor grid: the field is
/// extended off-grid by multilinear interpolation (constant outside the box),
/// which makes the tensor quadrature separable into one n x n matrix per mode.
class GridSemigroup {
 public:
  struct ModeKernel {
    Eigen::MatrixXd value;
    Eigen::MatrixXd derivative;
  };

  GridSemigroup(SpectrumSpec spec, TensorGrid grid, QuadratureRule rule)
      : spec_(std::move(spec)), grid_(std::move(grid)), rule_(std::move(rule)) {
    if (spec_.modes() != grid_.modes()) throw std::invalid_argument("GridSemigroup: grid and spectrum disagree on N");
    if (spec_.modes() > kMaxTensorModes) throw std::invalid_argument("GridSemigroup: at most three modes");
  }

  const TensorGrid& grid() const { return grid_; }
  const SpectrumSpec& spectrum() const { return spec_; }
  const QuadratureRule& rule() const { return rule_; }

  ModeKernel kernel(std::size_t k, double t, bool with_derivative) const {
    const std::size_t n = grid_.counts()[k];
    ModeKernel ker;
    ker.value = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (with_derivative) ker.derivative = Eigen::MatrixXd::Zero(ker.value.rows(), ker.value.cols());
    const double decay = semigroup_factor(spec_, k, t);
    const double sd = std::sqrt(covariance_qk(spec_, k, t));
    const double lr = with_derivative ? smoothing_weight(spec_, k, t) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mean = decay * grid_.axis(k)[i];
      for (std::size_t q = 0; q < rule_.size(); ++q) {
        std::size_t cell;
        double u;
        grid_.locate(k, mean + sd * rule_.nodes()[q], cell, u);
        const double w = rule_.weights()[q];
        const auto ii = static_cast<Eigen::Index>(i);
        const auto c = static_cast<Eigen::Index>(cell);
        ker.value(ii, c) += w * (1.0 - u);
        ker.value(ii, c + 1) += w * u;
        if (with_derivative) {
          const double wz = w * rule_.nodes()[q] * lr;
          ker.derivative(ii, c) += wz * (1.0 - u);
          ker.derivative(ii, c + 1) += wz * u;
        }
      }
    }
    return ker;
  }

  std::vector<ModeKernel> kernels(double t, bool with_derivative) const {
    std::vector<ModeKernel> out;
    for (std::size_t k = 0; k < grid_.modes(); ++k) out.push_back(kernel(k, t, with_derivative));
    return out;
  }

  /// Applies `matrix` along mode k of a flat nodal field.
  void apply_along(std::size_t k, const Eigen::MatrixXd& matrix, const std::vector<double>& in,
                   std::vector<double>& out) const {
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto n = static_cast<Eigen::Index>(grid_.counts()[k]);
    const auto inner = static_cast<Eigen::Index>(grid_.strides()[k]);
    const std::size_t block = static_cast<std::size_t>(n * inner);
    const std::size_t outer = grid_.size() / block;
    out.resize(grid_.size());
    for (std::size_t o = 0; o < outer; ++o) {
      Eigen::Map<const RowMat> src(in.data() + o * block, n, inner);
      Eigen::Map<RowMat> dst(out.data() + o * block, n, inner);
      dst.noalias() = matrix * src;
    }
  }

  /// value += scale * R_t f and, if gradient is non-null, gradient (node-major,
  /// N components) += scale * D R_t f.
  void accumulate(const std::vector<ModeKernel>& ker, const std::vector<double>& field, double scale,
                  std::vector<double>& value, std::vector<double>* gradient) const {
    const std::size_t n = grid_.modes();
    std::vector<double> a, b;
    auto chain = [&](std::size_t special) {
      a = field;
      for (std::size_t k = 0; k < n; ++k) {
        apply_along(k, k == special ? ker[k].derivative : ker[k].value, a, b);
        std::swap(a, b);
      }
    };
    chain(n);
    for (std::size_t g = 0; g < grid_.size(); ++g) value[g] += scale * a[g];
    if (!gradient) return;
    for (std::size_t c = 0; c < n; ++c) {
      chain(c);
      for (std::size_t g = 0; g < grid_.size(); ++g) (*gradient)[g * n + c] += scale * a[g];
    }
  }

  /// Largest Gaussian mass escaping the box over nodes in the central half of
  /// the box, where constant extrapolation biases R_t by at most this times |f|_inf.
  double interior_tail_mass(double t) const {
    if (!(t > 0.0)) return 0.0;
    double worst = 0.0;
    const double L = grid_.half_width();
    for (std::size_t k = 0; k < grid_.modes(); ++k) {
      const double decay = semigroup_factor(spec_, k, t);
      const double sd = std::sqrt(covariance_qk(spec_, k, t));
      double mode_worst = 0.0;
      for (double x : grid_.axis(k)) {
        if (std::abs(x) > 0.5 * L) continue;
        const double m = decay * x;
        const double mass = 0.5 * std::erfc((L - m) / (sd * std::sqrt(2.0))) +
                            0.5 * std::erfc((L + m) / (sd * std::sqrt(2.0)));
        mode_worst = std::max(mode_worst, mass);
      }
      worst += mode_worst;
    }
    return worst;
  }

 private:
  SpectrumSpec spec_;
  TensorGrid grid_;
  QuadratureRule rule_;
};

}  // namespace mfg
