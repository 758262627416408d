#include "ppw/transport.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ppw/errors.hpp"
#include "ppw/network_simplex.hpp"

namespace ppw {
namespace {

constexpr double kWeightTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr double kCertifyTol = 1e-9;
constexpr int kMaxRounds = 10000;

void check_weights(const std::vector<double>& w, std::size_t n, const char* name) {
  require(w.size() == n, std::string(name) + " has the wrong length");
  double s = 0.0;
  for (double v : w) {
    require(std::isfinite(v) && v >= 0.0, std::string(name) + " must be finite and nonnegative");
    s += v;
  }
  require(std::abs(s - 1.0) <= kWeightTol, std::string(name) + " must sum to 1");
}

double log_sum_exp(const std::vector<double>& v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

}  // namespace

std::string to_string(Solver s) { return s == Solver::Exact ? "exact" : "entropic"; }

Solver solver_from_string(const std::string& s) {
  if (s == "exact") return Solver::Exact;
  if (s == "entropic") return Solver::Entropic;
  throw InvalidInput("unknown solver '" + s + "' (expected exact or entropic)");
}

OTResult sinkhorn(const Eigen::MatrixXd& cost, const std::vector<double>& a, const std::vector<double>& b,
                  const OTOptions& opts) {
  const auto n = static_cast<std::size_t>(cost.rows());
  const auto m = static_cast<std::size_t>(cost.cols());
  check_weights(a, n, "source weights");
  check_weights(b, m, "target weights");
  const double cmax = std::max(cost.maxCoeff(), 1e-300);
  const double eps_final = opts.epsilon * cmax;
  std::vector<double> la(n), lb(m);
  for (std::size_t i = 0; i < n; ++i) la[i] = a[i] > 0 ? std::log(a[i]) : -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) lb[j] = b[j] > 0 ? std::log(b[j]) : -std::numeric_limits<double>::infinity();
  std::vector<double> f(n, 0.0), g(m, 0.0), buf(std::max(n, m));
  OTResult out;
  out.solver = Solver::Entropic;
  double eps = cmax;
  std::uint64_t iters = 0;
  for (;;) {
    eps = std::max(eps, eps_final);
    for (int it = 0; it < opts.max_iterations; ++it) {
      ++iters;
      for (std::size_t i = 0; i < n; ++i) {
        buf.resize(m);
        for (std::size_t j = 0; j < m; ++j) buf[j] = (g[j] - cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) / eps + lb[j];
        f[i] = a[i] > 0 ? -eps * log_sum_exp(buf) : 0.0;
      }
      for (std::size_t j = 0; j < m; ++j) {
        buf.resize(n);
        for (std::size_t i = 0; i < n; ++i) buf[i] = (f[i] - cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) / eps + la[i];
        g[j] = b[j] > 0 ? -eps * log_sum_exp(buf) : 0.0;
      }
      // Columns are exact after the g update; measure the row error.
      double err = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (a[i] <= 0) continue;
        double r = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          if (b[j] > 0) r += std::exp((f[i] + g[j] - cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) / eps + la[i] + lb[j]);
        }
        err += std::abs(r - a[i]);
      }
      if (err < opts.tolerance) break;
    }
    if (eps <= eps_final) break;
    eps *= 0.5;
  }
  out.iterations = iters;

  // Round the entropic plan onto the transportation polytope.
  Eigen::MatrixXd P(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
      P(ii, jj) = (a[i] > 0 && b[j] > 0) ? std::exp((f[i] + g[j] - cost(ii, jj)) / eps + la[i] + lb[j]) : 0.0;
    }
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double r = P.row(ii).sum();
    if (r > a[i]) P.row(ii) *= a[i] / r;
  }
  for (std::size_t j = 0; j < m; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double c = P.col(jj).sum();
    if (c > b[j]) P.col(jj) *= b[j] / c;
  }
  Eigen::VectorXd er(static_cast<Eigen::Index>(n)), ec(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) er(static_cast<Eigen::Index>(i)) = std::max(0.0, a[i] - P.row(static_cast<Eigen::Index>(i)).sum());
  for (std::size_t j = 0; j < m; ++j) ec(static_cast<Eigen::Index>(j)) = std::max(0.0, b[j] - P.col(static_cast<Eigen::Index>(j)).sum());
  const double mass = er.sum();
  if (mass > 0.0) P += er * ec.transpose() / mass;

  out.value = (P.array() * cost.array()).sum();
  double dual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fc = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (b[j] > 0) fc = std::min(fc, cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - g[j]);
    }
    if (a[i] > 0) dual += a[i] * fc;
  }
  for (std::size_t j = 0; j < m; ++j) dual += b[j] * g[j];
  out.dual_value = dual;
  out.duality_gap = std::max(0.0, out.value - dual);

  double merr = 0.0;
  for (std::size_t i = 0; i < n; ++i) merr = std::max(merr, std::abs(P.row(static_cast<Eigen::Index>(i)).sum() - a[i]));
  for (std::size_t j = 0; j < m; ++j) merr = std::max(merr, std::abs(P.col(static_cast<Eigen::Index>(j)).sum() - b[j]));
  out.marginal_error = merr;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double v = P(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v > 1e-15) out.plan.push_back({static_cast<int>(i), static_cast<int>(j), v});
    }
  return out;
}

OTResult solve_discrete_ot(const Eigen::MatrixXd& cost, const std::vector<double>& a,
                           const std::vector<double>& b, const OTOptions& opts) {
  const auto n = static_cast<std::size_t>(cost.rows());
  const auto m = static_cast<std::size_t>(cost.cols());
  require(n >= 1 && m >= 1, "cost matrix must be nonempty");
  require(cost.allFinite(), "cost matrix must be finite");
  check_weights(a, n, "source weights");
  check_weights(b, m, "target weights");
  if (opts.solver == Solver::Entropic || n * m > opts.exact_limit) {
    OTResult r = sinkhorn(cost, a, b, opts);
    r.fell_back = opts.solver == Solver::Exact;
    return r;
  }
  // Rescale b so both sides carry exactly the same mass.
  const double sa = std::accumulate(a.begin(), a.end(), 0.0);
  const double sb = std::accumulate(b.begin(), b.end(), 0.0);
  std::vector<double> bb(b);
  for (double& v : bb) v *= sa / sb;
  const double cmin = cost.minCoeff();
  const double cmax = cost.maxCoeff();
  NetworkSimplex<double> ns(a, bb, std::max(std::abs(cmin), std::abs(cmax)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) ns.add_arc(static_cast<int>(i), static_cast<int>(j), cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  ns.solve(kPivotTol);

  OTResult out;
  out.solver = Solver::Exact;
  out.iterations = ns.pivots();
  std::vector<double> row(n, 0.0), col(m, 0.0);
  long double total = 0;
  double min_rc = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < ns.arc_count(); ++e) {
    const double f = ns.flow(e);
    const int i = ns.arc_source(e);
    const int j = ns.arc_sink(e);
    min_rc = std::min(min_rc, ns.reduced_cost(i, j, ns.cost(e)));
    if (f > 0.0) {
      out.plan.push_back({i, j, f});
      row[static_cast<std::size_t>(i)] += f;
      col[static_cast<std::size_t>(j)] += f;
      total += static_cast<long double>(f) * ns.cost(e);
    }
  }
  out.value = static_cast<double>(total);
  out.dual_value = out.value;
  out.min_reduced_cost = min_rc;
  double merr = 0.0;
  for (std::size_t i = 0; i < n; ++i) merr = std::max(merr, std::abs(row[i] - a[i]));
  for (std::size_t j = 0; j < m; ++j) merr = std::max(merr, std::abs(col[j] - b[j]));
  out.marginal_error = merr;
  if (min_rc < -kCertifyTol * std::max(1.0, cmax - cmin) || merr > kWeightTol) {
    throw NumericalError("exact transport failed its optimality certificate");
  }
  return out;
}

namespace {

// Squared geodesic costs between sources and target nodes with a cheap lower
// bound used to prune reduced-cost sweeps.
class CostModel {
 public:
  CostModel(const Manifold& m, std::span<const Point> src, std::span<const Point> dst) : m_(m), src_(src), dst_(dst) {
    sphere_ = m.is_sphere();
    for (const Point& p : dst) {
      dx_.push_back(p[0]);
      dy_.push_back(p[1]);
      dz_.push_back(p[2]);
    }
    if (!sphere_) build_buckets();
  }

  /// Calls f(j) for every target j within distance r of source i, and possibly
  /// for others. On tori only grid cells meeting the ball are visited.
  template <class F>
  void for_candidates(std::size_t i, double r, F&& f) const {
    if (sphere_ || cells_.size() <= 1) {
      for (std::size_t j = 0; j < dst_.size(); ++j) f(j);
      return;
    }
    const int d = m_.dim();
    const auto s = m_.to_fractional(src_[i]);
    std::array<int, 3> lo{0, 0, 0}, span{1, 1, 1};
    for (int k = 0; k < d; ++k) {
      const double w = r * row_norm_[static_cast<std::size_t>(k)];
      const double sk = s[static_cast<std::size_t>(k)] - std::floor(s[static_cast<std::size_t>(k)]);
      const int g = grid_[static_cast<std::size_t>(k)];
      const int a = static_cast<int>(std::floor((sk - w) * g));
      const int b = static_cast<int>(std::floor((sk + w) * g));
      lo[static_cast<std::size_t>(k)] = a;
      span[static_cast<std::size_t>(k)] = std::min(g, b - a + 1);
    }
    for (int c0 = 0; c0 < span[0]; ++c0)
      for (int c1 = 0; c1 < span[1]; ++c1)
        for (int c2 = 0; c2 < span[2]; ++c2) {
          const std::array<int, 3> c{c0, c1, c2};
          std::size_t cell = 0;
          for (int k = d - 1; k >= 0; --k) {
            const int g = grid_[static_cast<std::size_t>(k)];
            const int idx = ((lo[static_cast<std::size_t>(k)] + c[static_cast<std::size_t>(k)]) % g + g) % g;
            cell = cell * static_cast<std::size_t>(g) + static_cast<std::size_t>(idx);
          }
          for (std::size_t t = start_[cell]; t < start_[cell + 1]; ++t) f(static_cast<std::size_t>(cells_[t]));
        }
  }

  double cost(std::size_t i, std::size_t j) const { return m_.distance_sq(src_[i], dst_[j]); }

  /// Lower bound on cost(i, j): squared chord length on the sphere.
  double lower(std::size_t i, std::size_t j) const {
    if (!sphere_) return cost(i, j);
    const Point& p = src_[i];
    const double dot = p[0] * dx_[j] + p[1] * dy_[j] + p[2] * dz_[j];
    return 2.0 - 2.0 * dot;
  }

  /// Indices of the k nearest targets to source i.
  void nearest(std::size_t i, std::size_t k, std::vector<std::pair<double, int>>& buf, std::vector<int>& out) const {
    buf.clear();
    for (std::size_t j = 0; j < dst_.size(); ++j) buf.emplace_back(lower(i, j), static_cast<int>(j));
    k = std::min(k, buf.size());
    std::nth_element(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(k) - 1, buf.end());
    out.clear();
    for (std::size_t t = 0; t < k; ++t) out.push_back(buf[t].second);
  }

  std::size_t sources() const { return src_.size(); }
  std::size_t sinks() const { return dst_.size(); }

 private:
  const Manifold& m_;
  std::span<const Point> src_;
  std::span<const Point> dst_;
  // Buckets targets on a regular grid in fractional coordinates. A displacement
  // x has fractional coordinates G⁻¹x, so |s_k| ≤ ‖row k of G⁻¹‖·|x|.
  void build_buckets() {
    const int d = m_.dim();
    const Eigen::MatrixXd inv = m_.generators().inverse();
    const double per_axis = std::pow(static_cast<double>(dst_.size()) / 4.0, 1.0 / d);
    const int g = std::max(1, static_cast<int>(std::floor(per_axis)));
    std::size_t total = 1;
    for (int k = 0; k < d; ++k) {
      grid_[static_cast<std::size_t>(k)] = g;
      row_norm_[static_cast<std::size_t>(k)] = inv.row(k).norm();
      total *= static_cast<std::size_t>(g);
    }
    std::vector<std::size_t> cell_of(dst_.size());
    start_.assign(total + 1, 0);
    for (std::size_t j = 0; j < dst_.size(); ++j) {
      const auto s = m_.to_fractional(dst_[j]);
      std::size_t cell = 0;
      for (int k = d - 1; k >= 0; --k) {
        const double sk = s[static_cast<std::size_t>(k)] - std::floor(s[static_cast<std::size_t>(k)]);
        const int idx = std::min(g - 1, static_cast<int>(std::floor(sk * g)));
        cell = cell * static_cast<std::size_t>(g) + static_cast<std::size_t>(idx);
      }
      cell_of[j] = cell;
      ++start_[cell + 1];
    }
    for (std::size_t c = 0; c < total; ++c) start_[c + 1] += start_[c];
    cells_.resize(dst_.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t j = 0; j < dst_.size(); ++j) cells_[fill[cell_of[j]]++] = static_cast<int>(j);
  }

  bool sphere_ = true;
  std::vector<double> dx_, dy_, dz_;
  std::array<int, 3> grid_{1, 1, 1};
  std::array<double, 3> row_norm_{0.0, 0.0, 0.0};
  std::vector<std::size_t> start_;
  std::vector<int> cells_;
};

W2Estimate exact_column_generation(const Manifold& m, std::span<const Point> points, const QuadratureTarget& target) {
  const std::size_t n = points.size();
  const std::size_t M = target.nodes.size();
  const CostModel model(m, points, target.nodes);
  const double diam2 = m.diameter() * m.diameter();
  // a = 1/N, b = 1/M scaled by N·M: integer supplies M and demands N.
  NetworkSimplex<std::int64_t> ns(std::vector<std::int64_t>(n, static_cast<std::int64_t>(M)),
                                  std::vector<std::int64_t>(M, static_cast<std::int64_t>(n)), diam2);
  const std::size_t per = (M + n - 1) / n;
  const std::size_t k0 = std::min(M, 8 * per + 8);
  std::vector<std::pair<double, int>> buf;
  std::vector<int> near;
  for (std::size_t i = 0; i < n; ++i) {
    model.nearest(i, k0, buf, near);
    for (int j : near) ns.add_arc(static_cast<int>(i), j, model.cost(i, static_cast<std::size_t>(j)));
  }
  // Pricing is 10× looser than the simplex optimality test, so an arc the
  // simplex accepts as optimal is never priced out again.
  const double tol = 10.0 * kPivotTol * std::max(1.0, diam2);
  const std::size_t add_cap = std::max<std::size_t>(4, 4 * per);
  W2Estimate est;
  std::vector<std::pair<double, int>> viol;
  for (int round = 1;; ++round) {
    ns.solve(kPivotTol);
    est.rounds = round;
    double min_rc = 0.0;
    std::size_t added = 0;
    double vmax = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < M; ++j) vmax = std::max(vmax, ns.sink_potential(static_cast<int>(j)));
    for (std::size_t i = 0; i < n; ++i) {
      const double ui = ns.source_potential(static_cast<int>(i));
      if (vmax - ui - tol <= 0.0) continue;
      viol.clear();
      // Only targets with cost < vmax − u_i can price out negative.
      model.for_candidates(i, std::sqrt(vmax - ui), [&](std::size_t j) {
        const double t = ns.sink_potential(static_cast<int>(j)) - ui;
        if (t <= tol) return;
        if (model.lower(i, j) >= t) return;
        const double rc = model.cost(i, j) - t;
        if (rc < -tol) viol.emplace_back(rc, static_cast<int>(j));
        min_rc = std::min(min_rc, rc);
      });
      if (viol.empty()) continue;
      const std::size_t take = std::min(add_cap, viol.size());
      std::partial_sort(viol.begin(), viol.begin() + static_cast<std::ptrdiff_t>(take), viol.end());
      for (std::size_t t = 0; t < take; ++t) {
        const int j = viol[t].second;
        ns.add_arc(static_cast<int>(i), j, model.cost(i, static_cast<std::size_t>(j)));
        ++added;
      }
    }
    est.min_reduced_cost = min_rc;
    if (added == 0) break;
    if (round >= kMaxRounds) throw NumericalError("column generation did not converge");
  }
  if (ns.artificial_flow() != 0) throw NumericalError("column generation ended with artificial flow");
  if (est.min_reduced_cost < -kCertifyTol) throw NumericalError("exact transport failed its optimality certificate");
  const long double total = ns.total_cost() / (static_cast<long double>(n) * static_cast<long double>(M));
  est.value = std::sqrt(std::max(0.0, static_cast<double>(total)));
  est.pivots = ns.pivots();
  est.columns = ns.arc_count();
  est.solver = Solver::Exact;
  return est;
}

}  // namespace

W2Estimate w2_to_volume(const Manifold& m, std::span<const Point> points, const QuadratureTarget& target,
                        const W2Options& opts) {
  require(!points.empty(), "point set must be nonempty");
  require(!target.nodes.empty(), "target must be nonempty");
  for (const Point& p : points) m.validate(p);
  const std::size_t n = points.size();
  const std::size_t M = target.nodes.size();
  W2Estimate est;
  const bool exact = opts.solver == Solver::Exact && n * M <= opts.exact_limit;
  if (exact) {
    est = exact_column_generation(m, points, target);
  } else {
    require(n * M <= (std::size_t{1} << 27), "transport instance too large for the entropic solver");
    Eigen::MatrixXd cost(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(M));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < M; ++j) cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.distance_sq(points[i], target.nodes[j]);
    OTOptions eo = opts.entropic;
    eo.solver = Solver::Entropic;
    const OTResult r = sinkhorn(cost, std::vector<double>(n, 1.0 / static_cast<double>(n)), target.weights, eo);
    est.value = std::sqrt(std::max(0.0, r.value));
    est.solver = Solver::Entropic;
    est.duality_gap = r.duality_gap;
    est.pivots = r.iterations;
    est.fell_back = opts.solver == Solver::Exact;
  }
  est.M = M;
  est.q = target.q;
  est.undersampled_target = M < n;
  double low = est.value;
  if (est.solver == Solver::Entropic) low = std::sqrt(std::max(0.0, est.value * est.value - est.duality_gap));
  est.bracket_low = std::max(0.0, low - target.q);
  est.bracket_high = est.value + target.q;
  return est;
}

W2Estimate w2_to_volume(const Manifold& m, std::span<const Point> points, std::size_t M, const W2Options& opts) {
  require(M >= 1, "target size must be at least 1");
  return w2_to_volume(m, points, quadrature_target(m, M), opts);
}

W2Estimate w2_to_volume(const PointSet& ps, std::size_t M, const W2Options& opts) {
  return w2_to_volume(ps.manifold(), ps.points, M, opts);
}

double ball_volume_constant(const Manifold& m) {
  if (m.is_sphere()) return 0.25;
  const double covol = std::abs(m.generators().determinant());
  const double unit_ball = m.dim() == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
  return unit_ball / covol;
}

double w1_packing_lower_bound(std::size_t N, const Manifold& m) {
  require(N >= 1, "N must be at least 1");
  const double c = ball_volume_constant(m);
  const int d = m.dim();
  const double dn = static_cast<double>(N);
  double delta = std::pow(1.0 / ((d + 1) * c * dn), 1.0 / d);
  delta = std::min(delta, m.diameter() / 2.0);
  return std::max(0.0, delta * (1.0 - dn * c * std::pow(delta, d)));
}

}  // namespace ppw
