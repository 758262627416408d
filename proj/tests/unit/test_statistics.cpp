#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ppw/errors.hpp"
#include "ppw/samplers.hpp"
#include "ppw/statistics.hpp"
#include "ppw/transport.hpp"

using namespace ppw;

namespace {

std::vector<Point> random_points(const Manifold& m, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(uniform_sample(m, rng));
  return pts;
}

double y10(const Point& p) { return std::sqrt(3.0) * p[2]; }
double y20(const Point& p) { return std::sqrt(5.0) / 2.0 * (3.0 * p[2] * p[2] - 1.0); }

PointSet as_pointset(const Manifold& m, std::vector<Point> pts) {
  return PointSet{std::move(pts), EnsembleSpec::iid(m, 1), 0, {}};
}

}  // namespace

TEST_SUITE("statistics") {
  TEST_CASE("eigenspace statistic: single point and antipodes") {
    const Manifold s2 = Manifold::sphere2();
    const Spectrum sp(s2, 6);
    const Point x = sphere_point(0.4, 1.3);
    for (std::size_t l = 0; l < sp.size(); ++l) {
      CHECK(eigenspace_statistic(sp, std::vector<Point>{x}, l) == doctest::Approx(2.0 * l + 1).epsilon(1e-13));
    }
    const Point y{{-x[0], -x[1], -x[2]}};
    CHECK(eigenspace_statistic(sp, std::vector<Point>{x, y}, 1) == doctest::Approx(0.0).epsilon(1e-12));

    const Manifold t2 = Manifold::torus(2);
    const Spectrum st(t2, 3);
    const Point z = t2.from_fractional({0.3, 0.8, 0.0});
    for (std::size_t l = 0; l < st.size(); ++l) {
      CHECK(eigenspace_statistic(st, std::vector<Point>{z}, l) == doctest::Approx(static_cast<double>(st[l].multiplicity)));
    }
  }

  TEST_CASE("eigenspace statistic matches explicit harmonics") {
    const Manifold s2 = Manifold::sphere2();
    const Spectrum sp(s2, 4);
    for (int rep = 0; rep < 5; ++rep) {
      const auto pts = random_points(s2, 5, 30 + rep);
      std::vector<double> sums(25, 0.0);
      for (const Point& p : pts) {
        const auto y = real_spherical_harmonics(4, p);
        for (std::size_t k = 0; k < 25; ++k) sums[k] += y[k];
      }
      for (std::size_t l = 0; l <= 4; ++l) {
        double ref = 0.0;
        for (std::size_t k = l * l; k < (l + 1) * (l + 1); ++k) ref += sums[k] * sums[k];
        CHECK(std::abs(eigenspace_statistic(sp, pts, l) - ref) < 1e-10 * std::max(1.0, ref));
      }
      // Degree 2 from Cartesian forms, independent of any recurrence.
      double ref2 = 0.0;
      const double s15 = std::sqrt(15.0), s5 = std::sqrt(5.0);
      auto acc = [&](auto g) {
        double s = 0.0;
        for (const Point& p : pts) s += g(p);
        ref2 += s * s;
      };
      acc([&](const Point& p) { return s15 * p[0] * p[1]; });
      acc([&](const Point& p) { return s15 * p[1] * p[2]; });
      acc([&](const Point& p) { return s5 / 2.0 * (3 * p[2] * p[2] - 1); });
      acc([&](const Point& p) { return s15 * p[0] * p[2]; });
      acc([&](const Point& p) { return s15 / 2.0 * (p[0] * p[0] - p[1] * p[1]); });
      CHECK(eigenspace_statistic(sp, pts, 2) == doctest::Approx(ref2).epsilon(1e-10));
    }
  }

  TEST_CASE("eigenspace statistic is permutation invariant and bounded") {
    const Manifold s2 = Manifold::sphere2();
    const Spectrum sp(s2, 5);
    auto pts = random_points(s2, 12, 41);
    const double a = eigenspace_statistic(sp, pts, 3);
    std::mt19937 g(3);
    std::shuffle(pts.begin(), pts.end(), g);
    CHECK(eigenspace_statistic(sp, pts, 3) == doctest::Approx(a).epsilon(1e-12));
    CHECK(a >= 0.0);
    CHECK(a <= 144.0 * 7.0);
  }

  TEST_CASE("profiles agree with pair sums") {
    Eigen::Matrix2d hex;
    hex << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
    for (const Manifold& m : {Manifold::sphere2(), Manifold::torus(2), Manifold::torus(hex), Manifold::torus(3)}) {
      const Spectrum sp(m, m.is_sphere() ? 9.0 : 3.2);
      const auto pts = random_points(m, 17, 52);
      const auto prof = eigenspace_profile(sp, pts);
      REQUIRE(prof.size() == sp.size());
      for (std::size_t l = 0; l < sp.size(); ++l) {
        const double ref = eigenspace_statistic(sp, pts, l);
        CHECK(std::abs(prof[l] - ref) < 1e-9 * std::max(1.0, ref));
      }
      CHECK(prof[0] == doctest::Approx(17.0 * 17.0));
    }
  }

  TEST_CASE("smoothing bound composition and monotone truncation") {
    for (const Manifold& m : {Manifold::sphere2(), Manifold::torus(2), Manifold::torus(3)}) {
      const auto pts = random_points(m, 30, 61);
      SmoothingEvaluator ev(m, pts);
      for (double t : {1e-3, 1e-2, 0.1}) {
        double prev = INFINITY;
        for (std::size_t L : {1u, 2u, 4u, 8u, 16u, 32u}) {
          const SmoothingBound b = ev.bound({0.0, t, L});
          const double d = m.is_sphere() ? 2.0 : m.dim();
          CHECK(b.smoothing_term == doctest::Approx(std::sqrt(d * t)));
          CHECK(b.value == doctest::Approx(b.smoothing_term + 2.0 * std::sqrt((b.head + b.tail) / 900.0)));
          CHECK(b.value <= prev * (1.0 + 1e-12));
          prev = b.value;
        }
      }
      CHECK_THROWS_AS(ev.bound({0.0, 0.0, {}}), InvalidInput);
      CHECK_THROWS_AS(ev.bound({0.0, -1.0, {}}), InvalidInput);
    }
  }

  TEST_CASE("tail over-bounds the worst-case remainder") {
    // With S_ℓ = N²m_ℓ the remainder Σ_{ℓ>L} e^{−λ̃t}m_ℓ/λ̃ is summed directly.
    for (const Manifold& m : {Manifold::sphere2(), Manifold::torus(2), Manifold::torus(3)}) {
      const auto pts = random_points(m, 4, 71);
      SmoothingEvaluator ev(m, pts);
      const Spectrum big(m, m.is_sphere() ? 3000.0 : 12.0);
      for (double t : {1e-3, 1e-2, 0.1}) {
        for (std::size_t L : {1u, 3u, 10u}) {
          double rest = 0.0;
          for (std::size_t l = L + 1; l < big.size(); ++l)
            rest += std::exp(-big[l].eigenvalue * t) / big[l].eigenvalue * static_cast<double>(big[l].multiplicity);
          const SmoothingBound b = ev.bound({0.0, t, L});
          CHECK(b.tail >= 16.0 * rest);
          // Not absurdly loose either; the lattice-count bound is coarse for
          // the first few torus shells.
          if (rest > 1e-300 && (m.is_sphere() || L == 10)) CHECK(b.tail <= 16.0 * rest * 50.0 + 1e-12);
        }
      }
    }
  }

  TEST_CASE("smoothing bound dominates the transport lower bracket") {
    const Manifold s2 = Manifold::sphere2();
    const auto spec = EnsembleSpec::harmonic(s2, 4);
    for (int r = 0; r < 3; ++r) {
      const PointSet ps = sample(spec, derive_seed(81, r));
      const W2Estimate w = w2_to_volume(ps, 64 * ps.size());
      const SmoothingBound b = smoothing_bound(ps, {0.0, 1.0 / static_cast<double>(ps.size()), {}});
      CHECK(b.value >= w.bracket_low);
      CHECK(optimize_smoothing_time(ps).value >= w.bracket_low);
    }
    const PointSet pt = sample(EnsembleSpec::harmonic(Manifold::torus(2), 4, 2), 5);
    CHECK(optimize_smoothing_time(pt).value >= w2_to_volume(pt, 64 * pt.size()).bracket_low);
  }

  TEST_CASE("optimized time beats a log grid") {
    const Manifold s2 = Manifold::sphere2();
    for (std::size_t n : {10u, 100u}) {
      const auto pts = random_points(s2, n, 91);
      SmoothingEvaluator ev(s2, pts);
      const SmoothingBound best = optimize_smoothing_time(ev);
      const double lo = -2.0 * std::log(static_cast<double>(n));
      double grid_best = INFINITY, arg = 0.0;
      for (int i = 0; i < 20; ++i) {
        const double lt = lo * (1.0 - i / 19.0);
        const double v = ev.bound({0.0, std::exp(lt), {}}).value;
        if (v < grid_best) {
          grid_best = v;
          arg = lt;
        }
      }
      CHECK(best.value <= grid_best * (1.0 + 1e-12));
      CHECK(std::abs(std::log(best.t) - arg) <= -lo / 19.0 + 1e-9);
      CHECK(best.t >= std::exp(lo) * (1 - 1e-12));
      CHECK(best.t <= 1.0);
    }
    const SmoothingBound one = optimize_smoothing_time(as_pointset(s2, random_points(s2, 1, 3)));
    CHECK(std::isfinite(one.value));
    CHECK(one.value > 0.0);
  }

  TEST_CASE("exact variance: constants and jittered cells") {
    const auto h = EnsembleSpec::harmonic(Manifold::sphere2(), 3);
    CHECK(std::abs(variance_exact(h, [](const Point&) { return 2.5; }, 1000).value) < 1e-9);

    const Manifold t2 = Manifold::torus(2);
    const auto jit = EnsembleSpec::jittered(t2, 4);
    // Smooth bump of support radius 0.15 centred at (0.25, 0.25), inside one cell.
    auto bump = [&](const Point& p) {
      const auto s = t2.to_fractional(p);
      const double dx = s[0] - 0.25, dy = s[1] - 0.25;
      const double r2 = (dx * dx + dy * dy) / 0.0225;
      return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
    };
    // Per-cell closed form N∫f² − N²(∫f)² by a fine midpoint rule; the bump
    // lives in one cell.
    const int g = 2000;
    double i1 = 0.0, i2 = 0.0;
    for (int a = 0; a < g; ++a)
      for (int b = 0; b < g; ++b) {
        const double v = bump(t2.from_fractional({(a + 0.5) / g, (b + 0.5) / g, 0.0}));
        i1 += v;
        i2 += v * v;
      }
    i1 /= double(g) * g;
    i2 /= double(g) * g;
    const double ref = 4.0 * i2 - 16.0 * i1 * i1;
    const ExactVariance v = variance_exact(jit, bump, 4000);
    CHECK(v.value == doctest::Approx(ref).epsilon(2e-2));
    CHECK(v.refinement_delta >= 0.0);
    CHECK_THROWS_AS(variance_exact(EnsembleSpec::iid(t2, 5), bump), UnsupportedVariant);
  }

  TEST_CASE("exact and Monte Carlo variances agree") {
    const auto h = EnsembleSpec::harmonic(Manifold::sphere2(), 2);
    const ExactVariance ex = variance_exact(h, y10);
    const VarianceEstimate mc = variance_mc(h, y10, 2000, 101);
    CHECK(std::abs(ex.value - mc.variance) < 5.0 * mc.variance_stderr);
    CHECK(ex.refinement_delta < 1e-2 * ex.value);
  }

  TEST_CASE("Monte Carlo variance: constant, iid closed form, GAF symmetry") {
    const auto h = EnsembleSpec::harmonic(Manifold::sphere2(), 1);
    const VarianceEstimate one = variance_mc(h, [](const Point&) { return 1.0; }, 100, 3);
    CHECK(one.mean == doctest::Approx(4.0));
    CHECK(std::abs(one.variance) < 1e-20);

    // iid: Var = N(∫f² − (∫f)²) with f = Y₂⁰ + 1/2, ∫f = 1/2, ∫f² = 1 + 1/4.
    const auto iid = EnsembleSpec::iid(Manifold::sphere2(), 50);
    const VarianceEstimate vi = variance_mc(iid, [](const Point& p) { return y20(p) + 0.5; }, 2000, 4);
    CHECK(std::abs(vi.variance - 50.0) < 5.0 * vi.variance_stderr);
    CHECK(std::abs(vi.mean - 25.0) < 5.0 * vi.mean_stderr);

    const VarianceEstimate vg = variance_mc(EnsembleSpec::gaf_zeros(16), y10, 2000, 5);
    CHECK(std::abs(vg.mean) < 5.0 * vg.mean_stderr);
    CHECK_THROWS_AS(variance_mc(iid, y10, 50, 1), InvalidInput);
  }

  TEST_CASE("variance identity for constant-diagonal projections") {
    // E S_ℓ = Σ_m Var(Σ_n Y_ℓ^m) since the means vanish.
    const auto h = EnsembleSpec::harmonic(Manifold::sphere2(), 2);
    const Sampler s(h);
    const Spectrum sp(Manifold::sphere2(), 2);
    std::vector<std::vector<double>> vals;
    double mean_s = 0.0, mean_s2 = 0.0;
    const int R = 1000;
    for (int r = 0; r < R; ++r) {
      const PointSet ps = s.draw(derive_seed(111, r));
      std::vector<double> row(3, 0.0);
      for (const Point& p : ps.points) {
        const auto y = real_spherical_harmonics(1, p);
        for (int k = 0; k < 3; ++k) row[k] += y[k + 1];
      }
      vals.push_back(row);
      const double st = eigenspace_statistic(sp, ps.points, 1);
      mean_s += st;
      mean_s2 += st * st;
    }
    mean_s /= R;
    const double se = std::sqrt((mean_s2 / R - mean_s * mean_s) / R);
    const VarianceEstimate v = summed_variance(vals);
    CHECK(std::abs(mean_s - v.variance) < 5.0 * std::max(se, v.variance_stderr));
  }

  TEST_CASE("harmonic variance grows like sqrt(N) times the degree") {
    // C is fixed on L=4 and reused for L=8 and L=16.
    const Manifold s2 = Manifold::sphere2();
    auto var = [&](int L, int l) {
      const auto h = EnsembleSpec::harmonic(s2, L);
      return variance_exact(h, [l](const Point& p) { return std::sqrt(2.0 * l + 1.0) * legendre_P(l, p[2]); }, 3000)
          .value;
    };
    double C = 0.0;
    for (int l : {1, 2}) C = std::max(C, var(4, l) / (5.0 * l));
    for (int L : {8, 16})
      for (int l : {1, 2}) CHECK(var(L, l) <= C * (L + 1.0) * l * (1.0 + 1e-3));
  }

  TEST_CASE("GAF variance bound") {
    CHECK(gaf_variance_bound(1, 4) == doctest::Approx(std::numbers::pi * std::numbers::pi / 2.0).epsilon(1e-14));
    CHECK(gaf_variance_bound(1, 4) == doctest::Approx(4.934802200544679).epsilon(1e-14));
    for (int l : {1, 2, 5}) CHECK(gaf_variance_bound(l, 20) == doctest::Approx(gaf_variance_bound(l, 10) / 2.0));
    CHECK_THROWS_AS(gaf_variance_bound(0, 4), InvalidInput);

    std::vector<TestFunction> fs;
    for (int k = 1; k <= 3; ++k) fs.push_back([k](const Point& p) { return real_spherical_harmonics(1, p)[k]; });
    const VarianceEstimate v = summed_variance_mc(EnsembleSpec::gaf_zeros(64), fs, 2000, 121);
    CHECK(v.variance <= gaf_variance_bound(1, 64) + 5.0 * v.variance_stderr);
  }

  TEST_CASE("rate fits on synthetic data") {
    std::vector<RatePoint> pure, logc;
    for (double n : {16.0, 64.0, 256.0, 1024.0, 4096.0}) {
      pure.push_back({n, 1.0 / std::sqrt(n)});
      logc.push_back({n, std::sqrt(std::log(n) / n)});
    }
    const RateFit a = fit_rate(pure, RateModel::PurePower);
    CHECK(a.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(a.residual_sse < 1e-25);
    const RateFit b = fit_rate(logc, RateModel::PurePower);
    CHECK(b.slope > -0.5);
    const RateFit c = fit_rate(logc, RateModel::PowerWithSqrtLog);
    CHECK(c.slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(c.residual_sse < 1e-25);
    CHECK(b.residual_sse > c.residual_sse);

    std::vector<RatePoint> bad = pure;
    bad[2].w2 = 0.0;
    CHECK_THROWS_AS(fit_rate(bad, RateModel::PurePower), InvalidInput);
    std::vector<RatePoint> few(pure.begin(), pure.begin() + 3);
    CHECK_THROWS_AS(fit_rate(few, RateModel::PurePower), InvalidInput);
    CHECK(rate_model_from_string(to_string(RateModel::PowerWithSqrtLog)) == RateModel::PowerWithSqrtLog);
  }
}
