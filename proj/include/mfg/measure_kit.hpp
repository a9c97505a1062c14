#pragma once

// Wasserstein-1 geometry on equal-weight particle measures, moment
// functionals, compactness-set membership tests, and CSV serialization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/assignment.hpp"
#include "mfg/csv.hpp"
#include "mfg/measure.hpp"
#include "mfg/parallel.hpp"
#include "mfg/rng.hpp"

namespace mfg {

enum class W1Method { Sorted, Assignment, Sliced };

inline std::string to_string(W1Method m) {
  switch (m) {
    case W1Method::Sorted: return "exact_sorted";
    case W1Method::Assignment: return "exact_assignment";
    case W1Method::Sliced: return "sliced";
  }
  return "unknown";
}

namespace detail {

inline void require_comparable(const ParticleMeasure& mu, const ParticleMeasure& nu) {
  if (mu.empty() || nu.empty()) throw std::invalid_argument("wasserstein1: empty measure");
  if (mu.modes() != nu.modes()) throw std::invalid_argument("wasserstein1: mismatched mode counts");
}

inline double euclid(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double sorted_gap(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

inline double sorted_gap_presorted(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

/// int_0^1 |F^{-1}(u) - G^{-1}(u)| du for sorted samples of any sizes; masses
/// are counted in integer units of 1 / (|a| |b|).
inline double quantile_gap(const std::vector<double>& a, const std::vector<double>& b) {
  const std::uint64_t ua = b.size(), ub = a.size();
  std::uint64_t left_a = ua, left_b = ub;
  std::size_t i = 0, j = 0;
  double s = 0.0;
  while (i < a.size() && j < b.size()) {
    const std::uint64_t w = std::min(left_a, left_b);
    s += static_cast<double>(w) * std::abs(a[i] - b[j]);
    left_a -= w;
    left_b -= w;
    if (left_a == 0) { ++i; left_a = ua; }
    if (left_b == 0) { ++j; left_b = ub; }
  }
  return s / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

}  // namespace detail

/// Brings two measures to a common particle count. Replication to the lcm is
/// exact; beyond `cap` a seeded bootstrap is used instead.
inline std::pair<ParticleMeasure, ParticleMeasure> reconcile_sizes(const ParticleMeasure& mu,
                                                                   const ParticleMeasure& nu,
                                                                   std::uint64_t seed = 0,
                                                                   std::size_t cap = 4096) {
  if (mu.size() == nu.size()) return {mu, nu};
  const std::size_t l = std::lcm(mu.size(), nu.size());
  auto resize = [&](const ParticleMeasure& m, std::size_t target, std::uint64_t tag) {
    std::vector<double> coords;
    coords.reserve(target * m.modes());
    if (target % m.size() == 0) {
      const std::size_t rep = target / m.size();
      for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t r = 0; r < rep; ++r) {
          auto p = m.particle(i);
          coords.insert(coords.end(), p.begin(), p.end());
        }
    } else {
      for (std::size_t i = 0; i < target; ++i) {
        auto p = m.particle(hash_key(seed, kBootstrapStream, tag, i) % m.size());
        coords.insert(coords.end(), p.begin(), p.end());
      }
    }
    return ParticleMeasure(m.modes(), std::move(coords));
  };
  const std::size_t target = l <= cap ? l : cap;
  return {resize(mu, target, 1), resize(nu, target, 2)};
}

/// Exact W1 in one mode through the monotone (sorted) coupling.
inline double wasserstein1_sorted(const ParticleMeasure& mu, const ParticleMeasure& nu) {
  detail::require_comparable(mu, nu);
  if (mu.modes() != 1) throw std::invalid_argument("wasserstein1_sorted: requires a single mode");
  if (mu.size() != nu.size()) {
    auto a = mu.data(), b = nu.data();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return detail::quantile_gap(a, b);
  }
  return detail::sorted_gap(mu.data(), nu.data());
}

/// Exact W1 via the linear assignment reduction (equal weights).
inline double wasserstein1_assignment(const ParticleMeasure& mu, const ParticleMeasure& nu) {
  detail::require_comparable(mu, nu);
  if (mu.size() != nu.size()) {
    auto [a, b] = reconcile_sizes(mu, nu);
    return wasserstein1_assignment(a, b);
  }
  const std::size_t n = mu.size();
  auto direct = [&](std::size_t i, std::size_t j) { return detail::euclid(mu.particle(i), nu.particle(j)); };
  std::vector<std::size_t> match;
  if (n > 4096) {
    solve_assignment(n, direct, &match);
  } else {
    // The solver revisits every entry many times; a dense table avoids the repeated sqrt.
    std::vector<double> table(n * n);
    parallel_for(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i)
        for (std::size_t j = 0; j < n; ++j) table[i * n + j] = direct(i, j);
    });
    solve_assignment(n, [&](std::size_t i, std::size_t j) { return table[i * n + j]; }, &match);
  }
  // Summing the matched costs in sorted order makes d(mu, nu) == d(nu, mu) bitwise.
  std::vector<double> costs(n);
  for (std::size_t i = 0; i < n; ++i) costs[i] = direct(i, match[i]);
  std::sort(costs.begin(), costs.end());
  double total = 0.0;
  for (double c : costs) total += c;
  return total / static_cast<double>(n);
}

/// Exact Monge-Kantorovich distance with Euclidean ground cost.
inline double wasserstein1(const ParticleMeasure& mu, const ParticleMeasure& nu, std::uint64_t seed = 0) {
  detail::require_comparable(mu, nu);
  if (mu.modes() == 1) return wasserstein1_sorted(mu, nu);
  if (mu.size() != nu.size()) {
    auto [a, b] = reconcile_sizes(mu, nu, seed);
    return wasserstein1(a, b, seed);
  }
  return mu.modes() == 1 ? wasserstein1_sorted(mu, nu) : wasserstein1_assignment(mu, nu);
}

/// E|theta_1| for theta uniform on the unit sphere of R^N.
inline double sliced_normalization(std::size_t modes) {
  const double n = static_cast<double>(modes);
  return std::tgamma(n / 2.0) / (std::sqrt(std::numbers::pi) * std::tgamma((n + 1.0) / 2.0));
}

/// Sliced surrogate: mean over random unit directions of the sorted 1-D W1 of
/// the projections, divided by E|theta_1| so that translations and isotropic
/// scalings are reproduced exactly.
inline double wasserstein1_sliced(const ParticleMeasure& mu, const ParticleMeasure& nu, std::size_t projections,
                                  std::uint64_t seed) {
  detail::require_comparable(mu, nu);
  if (projections == 0) throw std::invalid_argument("wasserstein1_sliced: need at least one projection");
  const std::size_t n = mu.modes();
  std::vector<double> dir(n), pa(mu.size()), pb(nu.size());
  double total = 0.0;
  for (std::size_t p = 0; p < projections; ++p) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        dir[k] = counter_normal(seed, kProjectionStream, p, k);
        norm += dir[k] * dir[k];
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& d : dir) d /= norm;
    auto project = [&](const ParticleMeasure& m, std::vector<double>& out) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        double a = 0.0;
        for (std::size_t k = 0; k < n; ++k) a += dir[k] * m.coord(i, k);
        out[i] = a;
      }
      std::sort(out.begin(), out.end());
    };
    project(mu, pa);
    project(nu, pb);
    total += pa.size() == pb.size() ? detail::sorted_gap_presorted(pa, pb) : detail::quantile_gap(pa, pb);
  }
  return total / static_cast<double>(projections) / sliced_normalization(n);
}

struct DistanceOptions {
  std::size_t exact_budget = 512;  // largest M solved by assignment when N >= 2
  std::size_t projections = 64;
  std::uint64_t seed = 0;
};

struct Distance {
  double value = 0.0;
  W1Method method = W1Method::Sorted;
};

inline Distance budgeted_wasserstein1(const ParticleMeasure& mu, const ParticleMeasure& nu,
                                      const DistanceOptions& opt = {}) {
  detail::require_comparable(mu, nu);
  if (mu.modes() == 1) return {wasserstein1_sorted(mu, nu), W1Method::Sorted};
  if (std::max(mu.size(), nu.size()) <= opt.exact_budget) return {wasserstein1(mu, nu, opt.seed), W1Method::Assignment};
  return {wasserstein1_sliced(mu, nu, opt.projections, opt.seed), W1Method::Sliced};
}

// ---------------------------------------------------------------- moments

struct MomentEstimate {
  double value = 0.0;
  double stderr_ = 0.0;  // standard error of the empirical mean
};

inline void require_mode(const ParticleMeasure& mu, std::size_t k) {
  if (k >= mu.modes()) throw std::out_of_range("mode index out of range");
}

inline MomentEstimate mode_second_moment_estimate(const ParticleMeasure& mu, std::size_t k) {
  require_mode(mu, k);
  const double m = static_cast<double>(mu.size());
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double v = mu.coord(i, k) * mu.coord(i, k);
    s += v;
    s2 += v * v;
  }
  const double mean = s / m;
  const double var = mu.size() > 1 ? std::max(0.0, (s2 - m * mean * mean) / (m - 1.0)) : 0.0;
  return {mean, std::sqrt(var / m)};
}

inline double mode_second_moment(const ParticleMeasure& mu, std::size_t k) {
  return mode_second_moment_estimate(mu, k).value;
}

inline MomentEstimate norm_fourth_moment_estimate(const ParticleMeasure& mu) {
  const double m = static_cast<double>(mu.size());
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double r2 = 0.0;
    for (double c : mu.particle(i)) r2 += c * c;
    const double v = r2 * r2;
    s += v;
    s2 += v * v;
  }
  const double mean = s / m;
  const double var = mu.size() > 1 ? std::max(0.0, (s2 - m * mean * mean) / (m - 1.0)) : 0.0;
  return {mean, std::sqrt(var / m)};
}

inline double norm_fourth_moment(const ParticleMeasure& mu) { return norm_fourth_moment_estimate(mu).value; }

inline std::vector<double> mode_means(const ParticleMeasure& mu) {
  std::vector<double> mean(mu.modes(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t k = 0; k < mu.modes(); ++k) mean[k] += mu.coord(i, k);
  for (double& v : mean) v /= static_cast<double>(mu.size());
  return mean;
}

inline std::vector<double> mode_variances(const ParticleMeasure& mu) {
  const auto mean = mode_means(mu);
  std::vector<double> var(mu.modes(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t k = 0; k < mu.modes(); ++k) {
      const double d = mu.coord(i, k) - mean[k];
      var[k] += d * d;
    }
  for (double& v : var) v /= static_cast<double>(std::max<std::size_t>(1, mu.size() - 1));
  return var;
}

// ------------------------------------------------------------- membership

/// Number of standard errors allowed on sampled moment comparisons.
inline constexpr double kStatisticalSlack = 3.0;

struct BoundCheck {
  double bound = 0.0;
  double observed = 0.0;
  double stderr_ = 0.0;
  bool raw_pass = true;    // observed <= bound
  bool slack_pass = true;  // observed <= bound + 3 stderr
};

struct MembershipReport {
  std::vector<BoundCheck> modes;  // second moments against a_k
  BoundCheck fourth;              // fourth norm moment against c_hat

  bool passed() const {
    return fourth.slack_pass && std::all_of(modes.begin(), modes.end(), [](const auto& c) { return c.slack_pass; });
  }
  bool raw_passed() const {
    return fourth.raw_pass && std::all_of(modes.begin(), modes.end(), [](const auto& c) { return c.raw_pass; });
  }
};

inline BoundCheck make_bound_check(const MomentEstimate& est, double bound) {
  BoundCheck c;
  c.bound = bound;
  c.observed = est.value;
  c.stderr_ = est.stderr_;
  c.raw_pass = est.value <= bound;
  c.slack_pass = est.value <= bound + kStatisticalSlack * est.stderr_;
  return c;
}

/// Membership in Q_{m0}: per-mode second moments bounded by a_k and the fourth
/// norm moment bounded by c_hat.
inline MembershipReport check_Qm0_membership(const ParticleMeasure& mu, std::span<const double> bounds,
                                             double c_hat) {
  if (bounds.size() < mu.modes()) throw std::invalid_argument("check_Qm0_membership: fewer bounds than modes");
  MembershipReport r;
  for (std::size_t k = 0; k < mu.modes(); ++k)
    r.modes.push_back(make_bound_check(mode_second_moment_estimate(mu, k), bounds[k]));
  r.fourth = make_bound_check(norm_fourth_moment_estimate(mu), c_hat);
  return r;
}

// ------------------------------------------------------------------ paths

struct PathDistance {
  double value = 0.0;
  std::size_t argmax = 0;
  W1Method method = W1Method::Sorted;
};

/// rho_inf(m1, m2) = max over mesh points of W1.
inline PathDistance path_sup_distance(const MeasurePath& a, const MeasurePath& b, const DistanceOptions& opt = {}) {
  if (!same_mesh(a.times(), b.times())) throw std::invalid_argument("path_sup_distance: time meshes differ");
  std::vector<Distance> d(a.steps());
  parallel_for(
      a.steps(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) d[j] = budgeted_wasserstein1(a.at(j), b.at(j), opt);
      },
      1);
  PathDistance out;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (j == 0 || d[j].value > out.value) {
      out.value = d[j].value;
      out.argmax = j;
    }
    if (d[j].method == W1Method::Sliced) out.method = W1Method::Sliced;
    else if (d[j].method == W1Method::Assignment && out.method == W1Method::Sorted) out.method = W1Method::Assignment;
  }
  return out;
}

struct ModulusEntry {
  double gap = 0.0;
  double distance = 0.0;
};

struct ModulusReport {
  std::vector<ModulusEntry> entries;
  /// Smallest C with d_1(m(t), m(s)) <= C (sqrt|t-s| + |t-s|) on the sampled pairs.
  double fitted_constant = 0.0;
  W1Method method = W1Method::Sorted;
};

struct ModulusOptions {
  std::size_t max_pairs = 20000;
  DistanceOptions distance;
};

inline ModulusReport path_modulus(const MeasurePath& m, const ModulusOptions& opt = {}) {
  if (m.steps() < 2) throw std::invalid_argument("path_modulus: need at least two mesh points");
  const std::size_t n = m.steps();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t all = n * (n - 1) / 2;
  const std::size_t stride = all <= opt.max_pairs ? 1 : (all + opt.max_pairs - 1) / opt.max_pairs;
  std::size_t counter = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j, ++counter)
      // Consecutive pairs are always kept: they carry the small-gap behaviour.
      if (counter % stride == 0 || j == i + 1) pairs.emplace_back(i, j);

  ModulusReport report;
  report.entries.resize(pairs.size());
  if (m.modes() == 1) {
    std::vector<std::vector<double>> sorted(n);
    for (std::size_t j = 0; j < n; ++j) {
      sorted[j] = m.at(j).data();
      std::sort(sorted[j].begin(), sorted[j].end());
    }
    bool equal_sizes = true;
    for (std::size_t j = 1; j < n; ++j) equal_sizes = equal_sizes && sorted[j].size() == sorted[0].size();
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      auto [i, j] = pairs[p];
      report.entries[p].gap = m.times()[j] - m.times()[i];
      report.entries[p].distance = equal_sizes ? detail::sorted_gap_presorted(sorted[i], sorted[j])
                                               : detail::quantile_gap(sorted[i], sorted[j]);
    }
  } else {
    parallel_for(
        pairs.size(),
        [&](std::size_t begin, std::size_t end) {
          for (std::size_t p = begin; p < end; ++p) {
            auto [i, j] = pairs[p];
            const auto d = budgeted_wasserstein1(m.at(i), m.at(j), opt.distance);
            report.entries[p] = {m.times()[j] - m.times()[i], d.value};
          }
        },
        1);
    if (m.at(0).size() > opt.distance.exact_budget) report.method = W1Method::Sliced;
    else report.method = W1Method::Assignment;
  }
  for (const auto& e : report.entries) {
    const double scale = std::sqrt(e.gap) + e.gap;
    report.fitted_constant = std::max(report.fitted_constant, e.distance / scale);
  }
  return report;
}

// ----------------------------------------------------------------- mixing

/// Indices [0, M) in seeded random order.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  CounterStream rng(derive_seed(seed, kShuffleStream));
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
  return perm;
}

/// Positions that take their particle from the second cloud in a pooled
/// mixture (1 - w) a + w b: ceil(w M) of them, chosen by seeded shuffle.
inline std::vector<char> pooling_mask(std::size_t particles, double weight_b, std::uint64_t seed) {
  if (!(weight_b >= 0.0 && weight_b <= 1.0)) throw std::invalid_argument("mix: weight must lie in [0, 1]");
  const auto take = static_cast<std::size_t>(std::ceil(weight_b * static_cast<double>(particles) - 1e-12));
  const auto perm = seeded_permutation(particles, seed);
  std::vector<char> from_b(particles, 0);
  for (std::size_t i = 0; i < std::min(take, particles); ++i) from_b[perm[i]] = 1;
  return from_b;
}

inline ParticleMeasure mix(const ParticleMeasure& a, const ParticleMeasure& b, double weight_b, std::uint64_t seed) {
  if (a.size() != b.size() || a.modes() != b.modes()) throw std::invalid_argument("mix: clouds must match in size");
  const auto from_b = pooling_mask(a.size(), weight_b, seed);
  std::vector<double> coords(a.data());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (from_b[i])
      for (std::size_t k = 0; k < a.modes(); ++k) coords[i * a.modes() + k] = b.coord(i, k);
  return ParticleMeasure(a.modes(), std::move(coords));
}

/// Path mixture with one particle selection shared by all mesh times, so
/// trajectories stay intact.
inline MeasurePath mix(const MeasurePath& a, const MeasurePath& b, double weight_b, std::uint64_t seed) {
  if (!same_mesh(a.times(), b.times())) throw std::invalid_argument("mix: time meshes differ");
  const auto from_b = pooling_mask(a.at(0).size(), weight_b, seed);
  std::vector<ParticleMeasure> out;
  out.reserve(a.steps());
  for (std::size_t j = 0; j < a.steps(); ++j) {
    const auto& ma = a.at(j);
    const auto& mb = b.at(j);
    if (ma.size() != from_b.size() || mb.size() != from_b.size())
      throw std::invalid_argument("mix: clouds must match in size");
    std::vector<double> coords(ma.data());
    const std::size_t n = ma.modes();
    for (std::size_t i = 0; i < ma.size(); ++i)
      if (from_b[i])
        for (std::size_t k = 0; k < n; ++k) coords[i * n + k] = mb.coord(i, k);
    out.emplace_back(n, std::move(coords));
  }
  return MeasurePath(a.times(), std::move(out));
}

inline ParticleMeasure translate(const ParticleMeasure& mu, std::span<const double> shift) {
  std::vector<double> coords(mu.data());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t k = 0; k < mu.modes(); ++k) coords[i * mu.modes() + k] += shift[k];
  return ParticleMeasure(mu.modes(), std::move(coords));
}

inline MeasurePath constant_path(const std::vector<double>& times, const ParticleMeasure& mu) {
  return MeasurePath(times, std::vector<ParticleMeasure>(times.size(), mu));
}

// -------------------------------------------------------------------- CSV

inline void write_measure_csv(const std::filesystem::path& file, const ParticleMeasure& mu) {
  csv::Writer w(file);
  std::vector<std::string> header;
  for (std::size_t k = 0; k < mu.modes(); ++k) header.push_back("mode_" + std::to_string(k + 1));
  w.header(header);
  std::vector<std::string> row(mu.modes());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t k = 0; k < mu.modes(); ++k) row[k] = csv::num(mu.coord(i, k));
    w.row_strings(row);
  }
}

inline ParticleMeasure read_measure_csv(const std::filesystem::path& file) {
  const auto lines = csv::read_lines(file);
  if (lines.size() < 2) throw std::invalid_argument(file.string() + ": no particles");
  const auto header = csv::split(lines[0]);
  for (std::size_t k = 0; k < header.size(); ++k)
    if (header[k] != "mode_" + std::to_string(k + 1))
      throw std::invalid_argument(file.string() + ": header must be mode_1,...,mode_N");
  const std::size_t n = header.size();
  std::vector<double> coords;
  coords.reserve((lines.size() - 1) * n);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = csv::split(lines[l]);
    if (cells.size() != n)
      throw std::invalid_argument(file.string() + ":" + std::to_string(l + 1) + ": wrong column count");
    for (auto c : cells) coords.push_back(csv::parse_double(c));
  }
  return ParticleMeasure(n, std::move(coords));
}

inline std::string measure_file_name(std::size_t j) {
  std::ostringstream os;
  os << "measure_" << std::setw(4) << std::setfill('0') << j << ".csv";
  return os.str();
}

/// Writes times.csv plus one measure file per written mesh point; every
/// `stride`-th point and the final one are written.
inline void write_path_dir(const std::filesystem::path& dir, const MeasurePath& path, std::size_t stride = 1) {
  std::filesystem::create_directories(dir);
  stride = std::max<std::size_t>(stride, 1);
  csv::Writer times(dir / "times.csv");
  times.header({"index", "time"});
  for (std::size_t j = 0; j < path.steps(); ++j) {
    if (j % stride != 0 && j + 1 != path.steps()) continue;
    times.row(j, path.times()[j]);
    write_measure_csv(dir / measure_file_name(j), path.at(j));
  }
}

inline MeasurePath read_path_dir(const std::filesystem::path& dir) {
  const auto lines = csv::read_lines(dir / "times.csv");
  if (lines.size() < 2 || lines[0] != "index,time")
    throw std::invalid_argument((dir / "times.csv").string() + ": expected header index,time");
  std::vector<double> times;
  std::vector<ParticleMeasure> measures;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = csv::split(lines[l]);
    if (cells.size() != 2) throw std::invalid_argument("times.csv: wrong column count");
    const auto j = static_cast<std::size_t>(csv::parse_double(cells[0]));
    times.push_back(csv::parse_double(cells[1]));
    measures.push_back(read_measure_csv(dir / measure_file_name(j)));
  }
  return MeasurePath(std::move(times), std::move(measures));
}

}  // namespace mfg
