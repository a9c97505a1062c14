#pragma once

// Hand-rolled generators and small oracles shared by the unit suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <unistd.h>

#include "mfg/measure.hpp"
#include "mfg/rng.hpp"
#include "mfg/spectral_core.hpp"

namespace testing_support {

using mfg::CounterStream;
using mfg::ParticleMeasure;

inline ParticleMeasure random_cloud(CounterStream& rng, std::size_t modes, std::size_t particles, double spread = 1.0,
                                    double shift = 0.0) {
  std::vector<double> c(modes * particles);
  for (double& x : c) x = shift + spread * rng.normal();
  return ParticleMeasure(modes, std::move(c));
}

/// Strictly decreasing negative list of `modes` eigenvalues.
inline mfg::SpectrumSpec random_spectrum(CounterStream& rng, std::size_t modes) {
  std::vector<double> lam;
  double cur = -rng.uniform(0.3, 2.0);
  for (std::size_t k = 0; k < modes; ++k) {
    lam.push_back(cur);
    cur -= rng.uniform(0.1, 3.0);
  }
  return mfg::SpectrumSpec::from_list(lam, 0.5);
}

/// Adaptive Simpson quadrature, used as an independent integral oracle.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int depth = 40) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        if (d <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
          return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
      };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

/// Brute-force W1 over all permutations (tiny instances only).
inline double brute_force_w1(const ParticleMeasure& a, const ParticleMeasure& b) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < a.modes(); ++k) {
        const double d = a.coord(i, k) - b.coord(perm[i], k);
        d2 += d * d;
      }
      s += std::sqrt(d2);
    }
    best = std::min(best, s / static_cast<double>(a.size()));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Fresh path under the build tree's scratch area; removed if it exists.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mfg_tests_" + std::to_string(::getpid())) / name;
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p.parent_path());
  return p;
}

}  // namespace testing_support
