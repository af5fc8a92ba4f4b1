// Copyright 2026 The ntpqpt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Derivative-free Nelder-Mead simplex minimizer with dimension-adaptive
// coefficients (reflection 1, expansion 1 + 2/n, contraction 0.75 - 1/(2n),
// shrink 1 - 1/n) and re-initialization of the simplex around the incumbent
// after each convergence.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace ntpqpt {

struct NelderMeadOptions {
  double diameter_tol = 1e-9;
  std::size_t max_evals = 50000;
  double initial_step = 0.1;
  /// Re-initializations around the best point after convergence; stops early
  /// once a restart no longer improves the objective.
  int max_reinits = 4;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  std::size_t evals = 0;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline double simplex_diameter(const std::vector<std::vector<double>>& pts, std::size_t best) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == best) continue;
    for (std::size_t k = 0; k < pts[i].size(); ++k) d = std::max(d, std::abs(pts[i][k] - pts[best][k]));
  }
  return d;
}

}  // namespace detail

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opts = {}) {
  const std::size_t n = x0.size();
  NelderMeadResult res;
  res.x = x0;
  res.f = f(x0);
  res.evals = 1;
  if (n == 0) {
    res.converged = true;
    return res;
  }
  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double gamma = 1.0 + 2.0 / dn;
  const double rho = 0.75 - 1.0 / (2.0 * dn);
  const double sigma = 1.0 - 1.0 / dn;

  auto eval = [&](const std::vector<double>& x) {
    ++res.evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  double step = opts.initial_step;
  for (int reinit = 0; reinit <= opts.max_reinits && res.evals < opts.max_evals; ++reinit) {
    const double start_f = res.f;
    std::vector<std::vector<double>> pts(n + 1, res.x);
    std::vector<double> vals(n + 1, res.f);
    for (std::size_t i = 0; i < n; ++i) {
      const double h = res.x[i] != 0.0 ? step * std::max(1.0, std::abs(res.x[i])) : step;
      pts[i + 1][i] += h;
      vals[i + 1] = eval(pts[i + 1]);
    }
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    bool converged = false;
    while (res.evals < opts.max_evals) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
      if (detail::simplex_diameter(pts, best) < opts.diameter_tol) {
        converged = true;
        break;
      }
      ++res.iterations;
      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= n; ++i)
        if (i != worst)
          for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / dn;

      for (std::size_t k = 0; k < n; ++k) xr[k] = centroid[k] + alpha * (centroid[k] - pts[worst][k]);
      const double fr = eval(xr);
      if (fr < vals[best]) {
        for (std::size_t k = 0; k < n; ++k) xe[k] = centroid[k] + gamma * (xr[k] - centroid[k]);
        const double fe = eval(xe);
        if (fe < fr) {
          pts[worst] = xe;
          vals[worst] = fe;
        } else {
          pts[worst] = xr;
          vals[worst] = fr;
        }
        continue;
      }
      if (fr < vals[second]) {
        pts[worst] = xr;
        vals[worst] = fr;
        continue;
      }
      const bool outside = fr < vals[worst];
      for (std::size_t k = 0; k < n; ++k)
        xc[k] = outside ? centroid[k] + rho * (xr[k] - centroid[k]) : centroid[k] - rho * (centroid[k] - pts[worst][k]);
      const double fc = eval(xc);
      if (fc < (outside ? fr : vals[worst])) {
        pts[worst] = xc;
        vals[worst] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= n; ++i) {
        if (i == best) continue;
        for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[best][k] + sigma * (pts[i][k] - pts[best][k]);
        vals[i] = eval(pts[i]);
      }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    if (*it <= res.f) {
      res.f = *it;
      res.x = pts[static_cast<std::size_t>(it - vals.begin())];
    }
    res.converged = converged;
    if (!(res.f < start_f) && reinit > 0) break;
    step = std::max(step * 0.1, 10.0 * opts.diameter_tol);
  }
  return res;
}

}  // namespace ntpqpt
