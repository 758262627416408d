#include "ppw/samplers.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "ppw/errors.hpp"

namespace ppw {
namespace {

using cplx = std::complex<double>;

constexpr Eigen::Index kChunk = 64;

cplx complex_normal(Rng& rng) {
  const double re = standard_normal(rng);
  const double im = standard_normal(rng);
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Eval {
  cplx logd;  // f'/f, finite where f' underflows
  double residual;
  bool exact;  // f(z) == 0
};

// Newton ratio and normalized residual |f|/Σ|c_n||z|^n, via the reversed
// polynomial outside the unit disk.
Eval newton_eval(const std::vector<cplx>& c, cplx z) {
  const int n = static_cast<int>(c.size()) - 1;
  if (std::abs(z) <= 1.0) {
    cplx f = c[static_cast<std::size_t>(n)], d = 0.0;
    double scale = std::abs(c[static_cast<std::size_t>(n)]);
    const double az = std::abs(z);
    for (int k = n - 1; k >= 0; --k) {
      d = d * z + f;
      f = f * z + c[static_cast<std::size_t>(k)];
      scale = scale * az + std::abs(c[static_cast<std::size_t>(k)]);
    }
    if (f == cplx(0.0)) return {0.0, 0.0, true};
    return {d / f, std::abs(f) / scale, false};
  }
  const cplx w = 1.0 / z;
  const double aw = std::abs(w);
  // g(w) = Σ c_{N−k} w^k
  cplx g = c[0], d = 0.0;
  double scale = std::abs(c[0]);
  for (int k = 1; k <= n; ++k) {
    d = d * w + g;
    g = g * w + c[static_cast<std::size_t>(k)];
    scale = scale * aw + std::abs(c[static_cast<std::size_t>(k)]);
  }
  // f'/f = N/z − g'(w)/(g(w) z²)
  if (g == cplx(0.0)) return {0.0, 0.0, true};
  const cplx logd = static_cast<double>(n) / z - d / (g * z * z);
  return {logd, std::abs(g) / scale, false};
}

std::vector<cplx> companion_roots(const std::vector<cplx>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  std::vector<cplx> a(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
  const cplx lead = c[static_cast<std::size_t>(n)];
  for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(j) * static_cast<std::size_t>(n)] = -c[static_cast<std::size_t>(n - 1 - j)] / lead;
  for (int i = 1; i < n; ++i) a[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] = 1.0;
  std::vector<cplx> w(static_cast<std::size_t>(n));
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericalError("companion eigenvalue solver did not converge");
  return w;
}

std::vector<cplx> aberth_roots(const std::vector<cplx>& c) {
  const auto n = c.size() - 1;
  // Start from the stereographic images of an equal-area point set, rotated
  // off the poles and off the real axis: real polynomials would otherwise
  // keep conjugation-symmetric iterates on the imaginary axis.
  const auto start = quadrature_target(Manifold::sphere2(), n).nodes;
  std::vector<cplx> z(n);
  const cplx spin = std::polar(1.0, 0.5);
  for (std::size_t k = 0; k < n; ++k) {
    const Point& p = start[k];
    const double ca = std::cos(0.3), sa = std::sin(0.3);
    const Point r{{p[0], ca * p[1] - sa * p[2], sa * p[1] + ca * p[2]}};
    z[k] = spin * stereographic(r);
  }
  std::vector<char> done(n, 0);
  for (int iter = 0; iter < 500; ++iter) {
    bool all = true;
    for (std::size_t k = 0; k < n; ++k) {
      if (done[k]) continue;
      const Eval e = newton_eval(c, z[k]);
      if (e.exact) {
        done[k] = 1;
        continue;
      }
      cplx s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != k) s += 1.0 / (z[k] - z[j]);
      }
      const cplx delta = 1.0 / (e.logd - s);
      if (!std::isfinite(delta.real()) || !std::isfinite(delta.imag())) return {};
      z[k] -= delta;
      if (std::abs(delta) <= 1e-14 * std::max(1.0, std::abs(z[k]))) {
        done[k] = 1;
      } else {
        all = false;
      }
    }
    if (all) return z;
  }
  return {};
}

}  // namespace

RootResult polynomial_roots(const std::vector<cplx>& coeffs, RootMethod method) {
  require(coeffs.size() >= 2, "polynomial must have degree at least 1");
  require(coeffs.back() != cplx(0.0), "leading coefficient must be nonzero");
  const std::size_t n = coeffs.size() - 1;
  double mx = 0.0;
  for (const cplx& v : coeffs) mx = std::max(mx, std::abs(v));
  std::vector<cplx> c(coeffs);
  for (cplx& v : c) v /= mx;
  // Exact zeros at the origin are split off.
  std::size_t zeros = 0;
  while (zeros < n && c[zeros] == cplx(0.0)) ++zeros;
  const std::vector<cplx> rest(c.begin() + static_cast<std::ptrdiff_t>(zeros), c.end());

  RootResult out;
  out.roots.assign(zeros, cplx(0.0));
  if (rest.size() >= 2) {
    if (method == RootMethod::Auto) method = rest.size() - 1 <= 256 ? RootMethod::Companion : RootMethod::Aberth;
    std::vector<cplx> r;
    if (method == RootMethod::Aberth) r = aberth_roots(rest);
    // Non-convergent Aberth runs fall back to the companion matrix.
    if (r.empty()) r = companion_roots(rest);
    for (cplx& z : r) {
      Eval e = newton_eval(rest, z);
      for (int it = 0; it < 8 && !e.exact && e.residual > 1e-16; ++it) {
        const cplx z2 = z - 1.0 / e.logd;
        if (!std::isfinite(z2.real()) || !std::isfinite(z2.imag())) break;
        const Eval e2 = newton_eval(rest, z2);
        if (e2.residual >= e.residual) break;
        z = z2;
        e = e2;
      }
      out.max_residual = std::max(out.max_residual, e.residual);
      out.roots.push_back(z);
    }
  }
  if (out.roots.size() != n) throw NumericalError("root finder returned the wrong number of roots");
  for (const cplx& z : out.roots) {
    if (std::isnan(z.real()) || std::isnan(z.imag())) throw NumericalError("root finder produced NaN");
  }
  return out;
}

ProjectionSampler::ProjectionSampler(const EnsembleSpec& spec, HkpvOptions opts) : spec_(spec), opts_(opts) {
  if (!spec.is_projection()) throw UnsupportedVariant("HKPV sampling needs a projection ensemble");
  require(opts.safety > 1.0, "envelope safety factor must exceed 1");
  if (spec.as<ensemble::Harmonic>()) {
    const std::size_t N = spec.N();
    const std::size_t G = std::max(opts.grid_min, opts.grid_per_point * N);
    const auto grid = quadrature_target(spec.manifold(), G);
    auto phi = std::make_shared<Eigen::MatrixXd>(static_cast<Eigen::Index>(G), static_cast<Eigen::Index>(N));
    std::vector<double> row(N);
    for (std::size_t g = 0; g < G; ++g) {
      real_basis_eval(spec, grid.nodes[g], row);
      for (std::size_t k = 0; k < N; ++k) (*phi)(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(k)) = row[k];
    }
    grid_basis_ = std::move(phi);
  }
}

bool ProjectionSampler::attempt(Rng& rng, double safety, std::vector<Point>& out, std::uint64_t& proposals) const {
  const Manifold& m = spec_.manifold();
  const Eigen::MatrixXd& phi = *grid_basis_;
  const auto N = static_cast<Eigen::Index>(spec_.N());
  Eigen::MatrixXd E(N, N);
  Eigen::VectorXd res = phi.rowwise().squaredNorm();
  Eigen::VectorXd v(N), c, w;
  Eigen::MatrixXd t;
  out.clear();
  // Grid residuals only decrease as points are accepted, so a sup taken a few
  // steps back still bounds the current density; refresh in blocks of about
  // r/16 for r remaining points.
  Eigen::Index refreshed = 0;
  double bound = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    const Eigen::Index block = std::max<Eigen::Index>(1, (N - i) / 16);
    if (i == 0 || i - refreshed >= block) {
      if (i > refreshed) {
        t.noalias() = phi * E.middleCols(refreshed, i - refreshed);
        res -= t.rowwise().squaredNorm();
        res = res.cwiseMax(0.0);
        refreshed = i;
      }
      bound = safety * res.maxCoeff();
    }
    Point x;
    for (;;) {
      x = uniform_sample(m, rng);
      ++proposals;
      real_basis_eval(spec_, x, std::span<double>(v.data(), static_cast<std::size_t>(N)));
      const double vv = v.squaredNorm();
      // px = |v|² − |c|² only shrinks as frame coefficients are added, so a
      // candidate can be rejected before the full projection is known.
      const double level = uniform01(rng) * bound;
      c.resize(i);
      double px = vv;
      bool rejected = false;
      for (Eigen::Index lo = 0; lo < i; lo += kChunk) {
        const Eigen::Index len = std::min(kChunk, i - lo);
        c.segment(lo, len).noalias() = E.middleCols(lo, len).transpose() * v;
        px -= c.segment(lo, len).squaredNorm();
        if (px <= level) {
          rejected = true;
          break;
        }
      }
      if (rejected) continue;
      if (px > bound) return false;
      if (px > level) break;
    }
    w = v;
    w.noalias() -= E.leftCols(i) * c;
    c.noalias() = E.leftCols(i).transpose() * w;
    w.noalias() -= E.leftCols(i) * c;
    const double nw = w.norm();
    if (!(nw > 0.0)) return false;
    E.col(i) = w / nw;
    out.push_back(x);
  }
  return true;
}

PointSet ProjectionSampler::draw(Rng& rng, std::uint64_t seed) const {
  PointSet ps{{}, spec_, seed, {}};
  if (const auto* j = spec_.as<ensemble::Jittered>()) {
    for (std::size_t k = 0; k < spec_.N(); ++k) ps.points.push_back(j->partition->sample_in_cell(k, rng));
    return ps;
  }
  double safety = opts_.safety;
  std::uint64_t proposals = 0;
  int recal = 0;
  for (;;) {
    if (attempt(rng, safety, ps.points, proposals)) break;
    if (recal == opts_.max_recalibrations) throw NumericalError("HKPV envelope violated after recalibration");
    ++recal;
    safety *= 1.5;
  }
  ps.metadata["proposals"] = std::to_string(proposals);
  ps.metadata["envelope_safety"] = fmt(safety);
  ps.metadata["envelope_recalibrations"] = std::to_string(recal);
  return ps;
}

PointSet sample_projection_dpp(const EnsembleSpec& spec, Rng& rng, std::uint64_t seed) {
  return ProjectionSampler(spec).draw(rng, seed);
}

PointSet sample_spherical_ensemble(std::size_t N, Rng& rng, std::uint64_t seed) {
  PointSet ps{{}, EnsembleSpec::spherical(N), seed, {}};
  const auto n = static_cast<lapack_int>(N);
  std::vector<cplx> A(N * N), B(N * N), alpha(N), beta(N);
  int retries = 0;
  for (;; ++retries) {
    for (cplx& v : A) v = complex_normal(rng);
    for (cplx& v : B) v = complex_normal(rng);
    // Eigenvalues of A⁻¹B: B x = λ A x.
    const lapack_int info = LAPACKE_zggev(LAPACK_COL_MAJOR, 'N', 'N', n, B.data(), n, A.data(), n, alpha.data(),
                                          beta.data(), nullptr, 1, nullptr, 1);
    if (info == 0) break;
    if (retries == 3) throw NumericalError("generalized eigenvalue solver failed after 3 retries");
  }
  for (std::size_t k = 0; k < N; ++k) {
    const cplx z = beta[k] == cplx(0.0) ? cplx(std::numeric_limits<double>::infinity(), 0.0) : alpha[k] / beta[k];
    ps.points.push_back(lift_stereographic(z));
  }
  ps.metadata["retries"] = std::to_string(retries);
  return ps;
}

PointSet sample_gaf_zeros(std::size_t N, Rng& rng, std::uint64_t seed, bool start_at_one) {
  PointSet ps{{}, EnsembleSpec::gaf_zeros(N, start_at_one), seed, {}};
  std::vector<cplx> c(N + 1);
  const double half = 0.5 * (std::lgamma(N + 1.0) - 2.0 * std::lgamma(N / 2.0 + 1.0));
  for (std::size_t k = 0; k <= N; ++k) {
    const double lb = 0.5 * (std::lgamma(N + 1.0) - std::lgamma(k + 1.0) - std::lgamma(static_cast<double>(N - k) + 1.0));
    c[k] = complex_normal(rng) * std::exp(lb - half);
  }
  if (start_at_one) c[0] = 0.0;
  const RootResult r = polynomial_roots(c);
  for (const cplx& z : r.roots) ps.points.push_back(lift_stereographic(z));
  ps.metadata["max_residual"] = fmt(r.max_residual);
  if (r.max_residual > 1e-6) ps.metadata["warning"] = "root residual above 1e-6";
  return ps;
}

PointSet sample_iid(const Manifold& m, std::size_t N, Rng& rng, std::uint64_t seed) {
  require(N >= 1, "N must be at least 1");
  PointSet ps{{}, EnsembleSpec::iid(m, N), seed, {}};
  ps.points.reserve(N);
  for (std::size_t k = 0; k < N; ++k) ps.points.push_back(uniform_sample(m, rng));
  return ps;
}

Sampler::Sampler(const EnsembleSpec& spec) : spec_(spec) {
  if (spec.is_projection()) hkpv_ = std::make_shared<const ProjectionSampler>(spec);
}

PointSet Sampler::draw(std::uint64_t seed) const {
  Rng rng = make_rng(seed);
  if (hkpv_) return hkpv_->draw(rng, seed);
  if (spec_.as<ensemble::Spherical>()) return sample_spherical_ensemble(spec_.N(), rng, seed);
  if (const auto* g = spec_.as<ensemble::GafZeros>()) return sample_gaf_zeros(spec_.N(), rng, seed, g->start_at_one);
  PointSet ps = sample_iid(spec_.manifold(), spec_.N(), rng, seed);
  ps.spec = spec_;
  return ps;
}

PointSet sample(const EnsembleSpec& spec, std::uint64_t seed) { return Sampler(spec).draw(seed); }

}  // namespace ppw
