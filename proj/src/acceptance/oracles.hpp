#pragma once
// Independent reference computations shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include <boost/math/distributions/chi_squared.hpp>

namespace oracle {

inline double chi_square_quantile(double dof, double p) {
  return boost::math::quantile(boost::math::chi_squared(dof), p);
}

// Asymptotic Kolmogorov distribution P(sqrt(n) D_n <= x), inverted by bisection.
inline double kolmogorov_cdf(double x) {
  if (x <= 0.0) return 0.0;
  double s = 0.0;
  for (int k = 1; k < 200; ++k) {
    s += (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
  }
  return 1.0 - 2.0 * s;
}

inline double kolmogorov_quantile(double p) {
  double lo = 0.2, hi = 5.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (kolmogorov_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Kolmogorov–Smirnov statistic of samples against U(0,1).
inline double ks_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max(d, std::max((i + 1) / n - xs[i], xs[i] - i / n));
  }
  return d;
}

inline double chi_square_stat(const std::vector<double>& counts, double expected) {
  double s = 0.0;
  for (double c : counts) s += (c - expected) * (c - expected) / expected;
  return s;
}

// Jacobi polynomials of degree ≤ 2 from the hypergeometric closed form in
// y = (x − 1)/2.
inline double jacobi_closed_form(int n, double a, double b, double x) {
  const double y = (x - 1.0) / 2.0;
  switch (n) {
    case 0:
      return 1.0;
    case 1:
      return (a + 1.0) + (a + b + 2.0) * y;
    case 2:
      return (a + 1.0) * (a + 2.0) / 2.0 + (a + 2.0) * (a + b + 3.0) * y + (a + b + 3.0) * (a + b + 4.0) / 2.0 * y * y;
    default:
      return std::numeric_limits<double>::quiet_NaN();
  }
}

// Exact discrete OT by enumerating every support of size n + m − 1 and solving
// the marginal equations on it; the minimum over feasible solutions is attained
// at a vertex of the transportation polytope. Small instances only.
inline double transport_bruteforce(const Eigen::MatrixXd& cost, const std::vector<double>& a,
                                   const std::vector<double>& b) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const int cells = n * m;
  const int k = n + m - 1;
  Eigen::VectorXd rhs(n + m);
  for (int i = 0; i < n; ++i) rhs(i) = a[static_cast<std::size_t>(i)];
  for (int j = 0; j < m; ++j) rhs(n + j) = b[static_cast<std::size_t>(j)];
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
  for (;;) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + m, k);
    for (int c = 0; c < k; ++c) {
      const int cell = pick[static_cast<std::size_t>(c)];
      A(cell / m, c) = 1.0;
      A(n + cell % m, c) = 1.0;
    }
    const Eigen::VectorXd x = A.completeOrthogonalDecomposition().solve(rhs);
    if ((A * x - rhs).cwiseAbs().maxCoeff() < 1e-12 && x.minCoeff() > -1e-12) {
      double v = 0.0;
      for (int c = 0; c < k; ++c) {
        const int cell = pick[static_cast<std::size_t>(c)];
        v += x(c) * cost(cell / m, cell % m);
      }
      best = std::min(best, v);
    }
    int i = k - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == cells - k + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

// Minimum-cost perfect assignment (Hungarian method with potentials, O(n³)).
inline double assignment_min_cost(const Eigen::MatrixXd& c) {
  const int n = static_cast<int>(c.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0), way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = c(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += c(p[static_cast<std::size_t>(j)] - 1, j - 1);
  return total;
}

}  // namespace oracle
