#include "ppw/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>

#include "ppw/errors.hpp"
#include "ppw/samplers.hpp"
#include "ppw/transport.hpp"

namespace ppw {
namespace {

constexpr double kTailExponent = 40.0;
constexpr double kHeadPerPoint = 64.0;

std::vector<double> sphere_profile(int lmax, std::span<const Point> pts) {
  const std::size_t n = pts.size();
  std::vector<double> acc(static_cast<std::size_t>(lmax) + 1, 0.0);
  // Pairs are processed in blocks so the recurrence runs over contiguous arrays.
  constexpr std::size_t kBlock = 512;
  std::vector<double> u, p0, p1;
  u.reserve(kBlock);
  auto flush = [&]() {
    const std::size_t b = u.size();
    if (b == 0) return;
    p0.assign(b, 1.0);
    p1 = u;
    acc[0] += static_cast<double>(b);
    if (lmax >= 1) {
      double s = 0.0;
      for (std::size_t i = 0; i < b; ++i) s += p1[i];
      acc[1] += s;
    }
    for (int l = 1; l < lmax; ++l) {
      const double a = (2.0 * l + 1.0) / (l + 1.0), c = static_cast<double>(l) / (l + 1.0);
      double s = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        const double next = a * u[i] * p1[i] - c * p0[i];
        p0[i] = p1[i];
        p1[i] = next;
        s += next;
      }
      acc[static_cast<std::size_t>(l) + 1] += s;
    }
    u.clear();
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point& x = pts[i];
      const Point& y = pts[j];
      u.push_back(std::clamp(x[0] * y[0] + x[1] * y[1] + x[2] * y[2], -1.0, 1.0));
      if (u.size() == kBlock) flush();
    }
  }
  flush();
  std::vector<double> S(acc.size());
  for (std::size_t l = 0; l < acc.size(); ++l) {
    S[l] = std::max(0.0, (2.0 * static_cast<double>(l) + 1.0) * (static_cast<double>(n) + 2.0 * acc[l]));
  }
  return S;
}

std::vector<double> torus_profile(const Spectrum& spec, std::span<const Point> pts) {
  const Manifold& m = spec.manifold();
  const int d = m.dim();
  const auto& freqs = spec.frequencies();
  long long K = 0;
  for (const Frequency& f : freqs)
    for (int i = 0; i < d; ++i) K = std::max(K, std::llabs(f.k[static_cast<std::size_t>(i)]));
  const std::size_t width = static_cast<std::size_t>(2 * K + 1);
  std::vector<std::complex<double>> acc(freqs.size(), 0.0);
  std::vector<std::complex<double>> table(width * static_cast<std::size_t>(d));
  for (const Point& p : pts) {
    const auto s = m.to_fractional(p);
    for (int i = 0; i < d; ++i) {
      for (long long k = -K; k <= K; ++k) {
        const double ph = 2.0 * std::numbers::pi * static_cast<double>(k) * s[static_cast<std::size_t>(i)];
        table[static_cast<std::size_t>(i) * width + static_cast<std::size_t>(k + K)] = {std::cos(ph), std::sin(ph)};
      }
    }
    for (std::size_t f = 0; f < freqs.size(); ++f) {
      std::complex<double> e = table[static_cast<std::size_t>(freqs[f].k[0] + K)];
      for (int i = 1; i < d; ++i)
        e *= table[static_cast<std::size_t>(i) * width + static_cast<std::size_t>(freqs[f].k[static_cast<std::size_t>(i)] + K)];
      acc[f] += e;
    }
  }
  std::vector<double> S(spec.size(), 0.0);
  std::size_t f = 0;
  for (std::size_t l = 0; l < spec.size(); ++l) {
    for (std::size_t c = 0; c < spec.members(l).size(); ++c, ++f) S[l] += std::norm(acc[f]);
  }
  return S;
}

// Spectrum whose first `count` eigenspaces are complete.
Spectrum spectrum_with_shells(const Manifold& m, std::size_t count) {
  if (m.is_sphere()) return Spectrum(m, static_cast<double>(count) - 1.0);
  double cutoff = 1.0;
  for (;;) {
    Spectrum s(m, cutoff);
    if (s.size() >= count) return s;
    cutoff *= 1.5;
  }
}

}  // namespace

double eigenspace_statistic(const Spectrum& spec, std::span<const Point> points, std::size_t l) {
  require(l < spec.size(), "eigenspace index beyond the precomputed spectrum");
  const std::size_t n = points.size();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += eigenspace_kernel_Z(spec, l, points[i], points[i]);
    for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * eigenspace_kernel_Z(spec, l, points[i], points[j]);
  }
  return std::max(0.0, s);
}

double eigenspace_statistic(const PointSet& ps, std::size_t l) {
  return eigenspace_statistic(spectrum_with_shells(ps.manifold(), l + 1), ps.points, l);
}

std::vector<double> eigenspace_profile(const Spectrum& spec, std::span<const Point> points) {
  if (spec.manifold().is_sphere()) return sphere_profile(static_cast<int>(spec.size()) - 1, points);
  return torus_profile(spec, points);
}

SmoothingEvaluator::SmoothingEvaluator(const Manifold& m, std::vector<Point> points)
    : m_(m), points_(std::move(points)) {
  require(!points_.empty(), "smoothing bound needs at least one point");
  const double N = static_cast<double>(points_.size());
  if (m_.is_sphere()) {
    cap_ = std::ceil(std::sqrt(kHeadPerPoint * N)) + 16.0;
  } else {
    const int d = m_.dim();
    const double vd = d == 2 ? std::numbers::pi : 4.0 / 3.0 * std::numbers::pi;
    const double det = std::abs(m_.generators().determinant());
    cap_ = std::pow(kHeadPerPoint * N / (vd * det), 1.0 / d);
    const Eigen::MatrixXd dual = m_.dual_generators();
    mu_ = 0.5 * std::sqrt(dual.colwise().squaredNorm().sum());
  }
}

void SmoothingEvaluator::ensure_shells(std::size_t count) {
  if (spec_ && spec_->size() >= count) return;
  spec_ = spectrum_with_shells(m_, count);
  S_ = eigenspace_profile(*spec_, points_);
}

void SmoothingEvaluator::ensure_radius(double radius) {
  if (spec_ && spec_->cutoff() >= radius) return;
  spec_ = Spectrum(m_, radius);
  S_ = eigenspace_profile(*spec_, points_);
}

std::size_t SmoothingEvaluator::default_l_max(double t) {
  require(t > 0.0 && std::isfinite(t), "smoothing time must be positive");
  if (m_.is_sphere()) {
    // smallest ℓ with ℓ(ℓ+1)t ≥ 40
    double l = std::ceil((-1.0 + std::sqrt(1.0 + 4.0 * kTailExponent / t)) / 2.0);
    while (l > 1.0 && (l - 1.0) * l * t >= kTailExponent) l -= 1.0;
    return static_cast<std::size_t>(std::clamp(l, 1.0, cap_));
  }
  // Some dual vector lies within 2μ beyond any radius, so this spectrum
  // reaches the first shell with λ̃t ≥ 40 unless the cap intervenes.
  const double r40 = std::sqrt(kTailExponent / t) / (2.0 * std::numbers::pi);
  ensure_radius(std::max(1e-9, std::min(r40 + 2.0 * mu_, cap_)));
  for (std::size_t l = 1; l < spec_->size(); ++l) {
    if ((*spec_)[l].eigenvalue * t >= kTailExponent) return l;
  }
  return std::max<std::size_t>(1, spec_->size() - 1);
}

double SmoothingEvaluator::tail_bound(std::size_t l_max, double t) const {
  const double N2 = static_cast<double>(points_.size()) * static_cast<double>(points_.size());
  if (m_.is_sphere()) {
    // m_ℓ/λ̃_ℓ ≤ 2/ℓ and e^{−ℓ(ℓ+1)t} ≤ e^{−ℓ²t}, then Σ_{ℓ>L} ≤ ∫_L^∞ 2e^{−tx²}/x dx = E₁(L²t).
    const double L = static_cast<double>(l_max);
    return N2 * boost::math::expint(1, L * L * t);
  }
  // Σ_{|j|>R} g(|j|) = −g(R)F(R) + ∫_R^∞ F(s)(−g′(s)) ds with g(s) = e^{−as²}/(cs²),
  // F the dual-lattice counting function and F ≤ V_d(s+μ)^d·|det G| from
  // disjoint Voronoi cells of radius ≤ μ.
  const int d = m_.dim();
  const double c = 4.0 * std::numbers::pi * std::numbers::pi;
  const double a = c * t;
  const double R = std::sqrt((*spec_)[l_max].eigenvalue / c);
  std::size_t FR = 0;
  for (std::size_t l = 0; l <= l_max; ++l) FR += static_cast<std::size_t>((*spec_)[l].multiplicity);
  const double vd = d == 2 ? std::numbers::pi : 4.0 / 3.0 * std::numbers::pi;
  const double det = std::abs(m_.generators().determinant());
  auto integrand = [&](double s) {
    const double F = vd * std::pow(s + mu_, d) * det;
    return F * std::exp(-a * s * s) * (2.0 * a / (c * s) + 2.0 / (c * s * s * s));
  };
  double err = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, R, std::numeric_limits<double>::infinity(), 15, 1e-12, &err);
  const double g = std::exp(-a * R * R) / (c * R * R);
  const double tail = (integral + err) * (1.0 + 1e-9) - g * static_cast<double>(FR);
  return N2 * std::max(0.0, tail);
}

SmoothingBound SmoothingEvaluator::bound(const SmoothingBoundConfig& cfg) {
  require(cfg.t > 0.0 && std::isfinite(cfg.t), "smoothing time must be positive");
  require(!cfg.l_max || *cfg.l_max >= 1, "l_max must be at least 1");
  const std::size_t l_max = cfg.l_max ? *cfg.l_max : default_l_max(cfg.t);
  ensure_shells(l_max + 1);
  SmoothingBound out;
  out.t = cfg.t;
  out.l_max = l_max;
  const double d = m_.is_sphere() ? 2.0 : static_cast<double>(m_.dim());
  out.smoothing_term = std::sqrt(std::max(0.0, d * cfg.t + cfg.K_M * std::pow(cfg.t, 1.5)));
  for (std::size_t l = 1; l <= l_max; ++l) {
    const double lam = (*spec_)[l].eigenvalue;
    out.head += std::exp(-lam * cfg.t) / lam * S_[l];
  }
  out.tail = tail_bound(l_max, cfg.t);
  const double N = static_cast<double>(points_.size());
  out.value = out.smoothing_term + 2.0 * std::sqrt((out.head + out.tail) / (N * N));
  return out;
}

SmoothingBound smoothing_bound(const PointSet& ps, const SmoothingBoundConfig& cfg) {
  SmoothingEvaluator ev(ps.manifold(), ps.points);
  return ev.bound(cfg);
}

SmoothingBound optimize_smoothing_time(SmoothingEvaluator& ev, const SmoothingBoundConfig& cfg) {
  const double lo = -2.0 * std::log(static_cast<double>(ev.size()));
  auto eval = [&](double logt) {
    SmoothingBoundConfig c = cfg;
    c.t = std::exp(logt);
    c.l_max.reset();
    return ev.bound(c);
  };
  if (lo >= 0.0) return eval(0.0);
  constexpr int kGrid = 20;
  std::vector<SmoothingBound> grid;
  std::size_t best = 0;
  for (int i = 0; i < kGrid; ++i) {
    grid.push_back(eval(lo * (1.0 - static_cast<double>(i) / (kGrid - 1))));
    if (grid.back().value < grid[best].value) best = grid.size() - 1;
  }
  auto at = [&](std::size_t i) { return lo * (1.0 - static_cast<double>(i) / (kGrid - 1)); };
  double a = at(best == 0 ? 0 : best - 1);
  double b = at(std::min<std::size_t>(best + 1, kGrid - 1));
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  SmoothingBound f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
    if (f1.value < f2.value) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = eval(x2);
    }
  }
  SmoothingBound out = f1.value < f2.value ? f1 : f2;
  return grid[best].value < out.value ? grid[best] : out;
}

SmoothingBound optimize_smoothing_time(const PointSet& ps, const SmoothingBoundConfig& cfg) {
  SmoothingEvaluator ev(ps.manifold(), ps.points);
  return optimize_smoothing_time(ev, cfg);
}

namespace {

// Σ_i w_i f_i² Σ_j w_j K_ij² − Σ_ij w_i w_j f_i f_j K_ij² on one grid.
double variance_on_grid(const EnsembleSpec& spec, const TestFunction& f, std::size_t M) {
  const QuadratureTarget q = quadrature_target(spec.manifold(), M);
  const std::size_t n = q.nodes.size();
  Eigen::VectorXd w(static_cast<Eigen::Index>(n)), fv(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    w[static_cast<Eigen::Index>(i)] = q.weights[i];
    fv[static_cast<Eigen::Index>(i)] = f(q.nodes[i]);
  }
  const Eigen::VectorXd wf = w.cwiseProduct(fv);
  double total = 0.0;
  if (spec.is_projection()) {
    const std::size_t N = spec.N();
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      real_basis_eval(spec, q.nodes[i], std::span<double>(phi.col(static_cast<Eigen::Index>(i)).data(), N));
    constexpr Eigen::Index kBlock = 256;
    for (Eigen::Index r0 = 0; r0 < static_cast<Eigen::Index>(n); r0 += kBlock) {
      const Eigen::Index b = std::min(kBlock, static_cast<Eigen::Index>(n) - r0);
      const Eigen::MatrixXd K2 = (phi.middleCols(r0, b).transpose() * phi).array().square().matrix();
      const Eigen::VectorXd kw = K2 * w, kwf = K2 * wf;
      for (Eigen::Index i = 0; i < b; ++i) {
        const double fi = fv[r0 + i], wi = w[r0 + i];
        total += wi * fi * (fi * kw[i] - kwf[i]);
      }
    }
    return total;
  }
  if (!spec.has_kernel()) throw UnsupportedVariant("variance_exact needs an ensemble with a determinantal kernel");
  for (std::size_t i = 0; i < n; ++i) {
    double kw = 0.0, kwf = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double k = kernel_abs(spec, q.nodes[i], q.nodes[j]);
      kw += w[static_cast<Eigen::Index>(j)] * k * k;
      kwf += wf[static_cast<Eigen::Index>(j)] * k * k;
    }
    const double fi = fv[static_cast<Eigen::Index>(i)];
    total += w[static_cast<Eigen::Index>(i)] * fi * (fi * kw - kwf);
  }
  return total;
}

}  // namespace

ExactVariance variance_exact(const EnsembleSpec& spec, const TestFunction& f, std::size_t M) {
  require(M >= 16 && M <= 4000, "variance_exact grid size must lie in [16, 4000]");
  if (!spec.has_kernel()) throw UnsupportedVariant("variance_exact needs an ensemble with a determinantal kernel");
  ExactVariance out;
  out.M = M;
  out.value = variance_on_grid(spec, f, M);
  out.refinement_delta = std::abs(out.value - variance_on_grid(spec, f, M / 4));
  return out;
}

VarianceEstimate summed_variance(const std::vector<std::vector<double>>& values) {
  const std::size_t R = values.size();
  require(R >= 3, "variance estimate needs at least three replicas");
  const std::size_t K = values[0].size();
  const double Rd = static_cast<double>(R);
  VarianceEstimate out;
  out.replicas = R;
  std::vector<double> mean(K, 0.0), s2(K, 0.0);
  for (const auto& row : values) {
    require(row.size() == K, "replica rows must have equal length");
    for (std::size_t k = 0; k < K; ++k) mean[k] += row[k];
  }
  for (double& m : mean) m /= Rd;
  // Centered sums keep the leave-one-out formulas free of cancellation.
  std::vector<double> s1(K, 0.0);
  double tot_var = 0.0;
  for (const auto& row : values) {
    double sum_row = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double c = row[k] - mean[k];
      s1[k] += c;
      s2[k] += c * c;
      sum_row += c;
    }
    tot_var += sum_row * sum_row;
  }
  for (std::size_t k = 0; k < K; ++k) {
    out.mean += mean[k];
    out.variance += (s2[k] - s1[k] * s1[k] / Rd) / (Rd - 1.0);
  }
  out.mean_stderr = std::sqrt(tot_var / (Rd - 1.0) / Rd);
  std::vector<double> loo(R, 0.0);
  double loo_mean = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    for (std::size_t k = 0; k < K; ++k) {
      const double c = values[r][k] - mean[k];
      const double a = s1[k] - c, b = s2[k] - c * c;
      loo[r] += (b - a * a / (Rd - 1.0)) / (Rd - 2.0);
    }
    loo_mean += loo[r];
  }
  loo_mean /= Rd;
  double ss = 0.0;
  for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
  out.variance_stderr = std::sqrt((Rd - 1.0) / Rd * ss);
  return out;
}

VarianceEstimate summed_variance_mc(const EnsembleSpec& spec, const std::vector<TestFunction>& fs,
                                    std::size_t replicas, std::uint64_t seed) {
  require(replicas >= 100, "Monte Carlo variance needs at least 100 replicas");
  require(!fs.empty(), "at least one test function is required");
  const Sampler sampler(spec);
  std::vector<std::vector<double>> values(replicas, std::vector<double>(fs.size(), 0.0));
  for (std::size_t r = 0; r < replicas; ++r) {
    const PointSet ps = sampler.draw(derive_seed(seed, r));
    for (std::size_t k = 0; k < fs.size(); ++k) {
      double s = 0.0;
      for (const Point& p : ps.points) s += fs[k](p);
      values[r][k] = s;
    }
  }
  return summed_variance(values);
}

VarianceEstimate variance_mc(const EnsembleSpec& spec, const TestFunction& f, std::size_t replicas,
                             std::uint64_t seed) {
  return summed_variance_mc(spec, {f}, replicas, seed);
}

double gaf_variance_bound(int l, std::size_t N) {
  require(l >= 1, "the eigenspace bound needs l >= 1");
  require(N >= 1, "degree must be positive");
  const double lam = static_cast<double>(l) * (l + 1);
  return (2.0 * l + 1.0) * lam * lam * std::numbers::pi * std::numbers::pi / (6.0 * static_cast<double>(N));
}

std::string to_string(RateModel m) { return m == RateModel::PurePower ? "pure_power" : "power_with_sqrt_log"; }

RateModel rate_model_from_string(const std::string& s) {
  if (s == "pure_power") return RateModel::PurePower;
  if (s == "power_with_sqrt_log") return RateModel::PowerWithSqrtLog;
  throw InvalidInput("unknown rate model: " + s);
}

RateFit fit_rate(std::span<const RatePoint> records, RateModel model) {
  std::vector<double> ns;
  for (const RatePoint& r : records) {
    require(std::isfinite(r.w2) && r.w2 > 0.0, "rate fit needs positive W2 values");
    require(std::isfinite(r.N) && r.N >= 2.0, "rate fit needs N >= 2");
    ns.push_back(r.N);
  }
  std::sort(ns.begin(), ns.end());
  require(std::unique(ns.begin(), ns.end()) - ns.begin() >= 4, "rate fit needs at least 4 distinct N values");
  const double n = static_cast<double>(records.size());
  std::vector<double> x, y;
  for (const RatePoint& r : records) {
    x.push_back(std::log(r.N));
    y.push_back(model == RateModel::PurePower ? std::log(r.w2) : std::log(r.w2 / std::sqrt(std::log(r.N))));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  RateFit fit;
  fit.model = model;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residuals.push_back(r);
    fit.residual_sse += r * r;
  }
  const double s2 = fit.residual_sse / (n - 2.0);
  fit.slope_stderr = std::sqrt(s2 / sxx);
  fit.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  return fit;
}

}  // namespace ppw
