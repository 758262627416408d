#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "ppw/errors.hpp"
#include "ppw/manifold.hpp"

using namespace ppw;

namespace {

Point p2(double a, double b) { return Point{{a, b, 0.0}}; }

double brute_torus_distance(const Eigen::MatrixXd& g, const Point& a, const Point& b, int r) {
  double best = 1e300;
  const int d = static_cast<int>(g.rows());
  for (int i = -r; i <= r; ++i)
    for (int j = -r; j <= r; ++j)
      for (int k = (d == 3 ? -r : 0); k <= (d == 3 ? r : 0); ++k) {
        Eigen::Vector3d shift = Eigen::Vector3d::Zero();
        Eigen::VectorXd kk(d);
        kk(0) = i;
        kk(1) = j;
        if (d == 3) kk(2) = k;
        shift.head(d) = g * kk;
        double s = 0;
        for (int c = 0; c < d; ++c) s += std::pow(a[c] - b[c] - shift(c), 2);
        best = std::min(best, s);
      }
  return std::sqrt(best);
}

}  // namespace

TEST_SUITE("manifold") {
  TEST_CASE("sphere distance identity and antipodes") {
    const auto s2 = Manifold::sphere2();
    const Point x{{0.0, 0.6, 0.8}};
    CHECK(geodesic_distance(s2, x, x) == doctest::Approx(0.0));
    const Point y{{0.0, -0.6, -0.8}};
    CHECK(geodesic_distance(s2, x, y) == doctest::Approx(M_PI).epsilon(1e-14));
  }

  TEST_CASE("torus distance wraps around") {
    const auto t2 = Manifold::torus(2);
    const double d = geodesic_distance(t2, p2(0.1, 0.1), p2(0.9, 0.9));
    // brute-force minimum over shifts in {-1,0,1}^2
    const double oracle = brute_torus_distance(Eigen::MatrixXd::Identity(2, 2), p2(0.1, 0.1), p2(0.9, 0.9), 1);
    CHECK(d == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(d == doctest::Approx(std::sqrt(0.08)).epsilon(1e-12));
  }

  TEST_CASE("non-finite coordinates are rejected") {
    const auto s2 = Manifold::sphere2();
    const Point bad{{NAN, 0.0, 1.0}};
    CHECK_THROWS_AS(geodesic_distance(s2, bad, bad), InvalidInput);
    const auto t2 = Manifold::torus(2);
    CHECK_THROWS_AS(geodesic_distance(t2, p2(INFINITY, 0), p2(0, 0)), InvalidInput);
  }

  TEST_CASE("invalid generators are rejected") {
    Eigen::MatrixXd g(2, 2);
    g << 1, 2, 2, 4;
    CHECK_THROWS_AS(Manifold::torus(g), InvalidInput);
    CHECK_THROWS_AS(Manifold::torus(4), InvalidInput);
  }

  TEST_CASE("triangle inequality on random triples") {
    Rng rng = make_rng(7);
    Eigen::MatrixXd hex(2, 2);
    hex << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
    for (const auto& m : {Manifold::sphere2(), Manifold::torus(2), Manifold::torus(3), Manifold::torus(hex)}) {
      double worst = 0.0;
      for (int i = 0; i < 10000; ++i) {
        const Point a = uniform_sample(m, rng), b = uniform_sample(m, rng), c = uniform_sample(m, rng);
        const double dab = m.distance(a, b), dbc = m.distance(b, c), dac = m.distance(a, c);
        worst = std::max(worst, dac - dab - dbc);
        CHECK(m.distance(a, b) == doctest::Approx(m.distance(b, a)).epsilon(1e-15));
      }
      CHECK(worst <= 1e-10);
    }
  }

  TEST_CASE("general lattice distance matches wide brute force") {
    Eigen::MatrixXd skew(2, 2);
    skew << 1.0, 3.3, 0.0, 0.4;  // highly skewed basis of a lattice with covolume 0.4
    const auto t = Manifold::torus(skew);
    Rng rng = make_rng(11);
    for (int i = 0; i < 2000; ++i) {
      const Point a = uniform_sample(t, rng), b = uniform_sample(t, rng);
      CHECK(t.distance(a, b) == doctest::Approx(brute_torus_distance(skew, a, b, 6)).epsilon(1e-12));
    }
    Eigen::MatrixXd g3(3, 3);
    g3 << 1.0, 0.3, 0.2, 0.0, 1.1, 0.4, 0.0, 0.0, 0.9;
    const auto t3 = Manifold::torus(g3);
    for (int i = 0; i < 500; ++i) {
      const Point a = uniform_sample(t3, rng), b = uniform_sample(t3, rng);
      CHECK(t3.distance(a, b) == doctest::Approx(brute_torus_distance(g3, a, b, 3)).epsilon(1e-12));
    }
  }

  TEST_CASE("torus distance is invariant under lattice translations") {
    Eigen::MatrixXd hex(2, 2);
    hex << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
    const auto t = Manifold::torus(hex);
    Rng rng = make_rng(3);
    for (int i = 0; i < 1000; ++i) {
      const Point a = uniform_sample(t, rng), b = uniform_sample(t, rng);
      Point shifted = a;
      const int k0 = static_cast<int>(rng() % 7) - 3, k1 = static_cast<int>(rng() % 7) - 3;
      shifted[0] += k0 * hex(0, 0) + k1 * hex(0, 1);
      shifted[1] += k0 * hex(1, 0) + k1 * hex(1, 1);
      CHECK(std::abs(t.distance(shifted, b) - t.distance(a, b)) <= 1e-12);
      CHECK(std::abs(t.distance(t.canonical(shifted), b) - t.distance(a, b)) <= 1e-12);
    }
  }

  TEST_CASE("uniform sampling replays under a fixed seed") {
    const auto s2 = Manifold::sphere2();
    Rng a = make_rng(42), b = make_rng(42);
    CHECK(uniform_sample(s2, a) == uniform_sample(s2, b));
  }

  TEST_CASE("sphere samples have centred coordinates") {
    const auto s2 = Manifold::sphere2();
    Rng rng = make_rng(2024);
    const int n = 100000;
    double sum[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) {
      const Point p = uniform_sample(s2, rng);
      CHECK(std::abs(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0) < 1e-12);
      for (int k = 0; k < 3; ++k) sum[k] += p[k];
    }
    const double sigma = (1.0 / std::sqrt(3.0)) / std::sqrt(static_cast<double>(n));
    for (double s : sum) CHECK(std::abs(s / n) < 4.0 * sigma);
  }

  TEST_CASE("torus samples pass a per-coordinate KS test") {
    const auto t2 = Manifold::torus(2);
    Rng rng = make_rng(99);
    const int n = 100000;
    std::vector<double> xs, ys;
    for (int i = 0; i < n; ++i) {
      const Point p = uniform_sample(t2, rng);
      xs.push_back(p[0]);
      ys.push_back(p[1]);
    }
    const double crit = oracle::kolmogorov_quantile(0.999) / std::sqrt(static_cast<double>(n));
    CHECK(oracle::ks_uniform(xs) < crit);
    CHECK(oracle::ks_uniform(ys) < crit);
  }

  TEST_CASE("partition errors and trivial cases") {
    CHECK_THROWS_AS(equal_area_partition(Manifold::sphere2(), 0), InvalidInput);
    const auto one = equal_area_partition(Manifold::sphere2(), 1);
    REQUIRE(one.size() == 1);
    CHECK(one.cells()[0].volume == doctest::Approx(1.0));
    CHECK(one.cells()[0].diameter == doctest::Approx(M_PI));
    const auto t1 = equal_area_partition(Manifold::torus(2), 1);
    CHECK(t1.cells()[0].diameter == doctest::Approx(std::sqrt(2.0) / 2.0));
  }

  TEST_CASE("torus grid partition") {
    for (int k : {2, 3, 5, 10}) {
      const auto part = equal_area_partition(Manifold::torus(2), static_cast<std::size_t>(k * k));
      for (const Cell& c : part.cells()) {
        CHECK(c.volume == doctest::Approx(1.0 / (k * k)).epsilon(1e-12));
        if (k > 1) CHECK(c.diameter == doctest::Approx(std::sqrt(2.0) / k).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("partitions have exact equal volumes and locate their own cells") {
    Eigen::MatrixXd hex(2, 2);
    hex << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
    Rng rng = make_rng(5);
    for (const auto& m : {Manifold::sphere2(), Manifold::torus(2), Manifold::torus(3), Manifold::torus(hex)}) {
      for (std::size_t n : {1u, 2u, 3u, 7u, 12u, 50u, 100u, 101u, 1000u}) {
        const auto part = equal_area_partition(m, n);
        REQUIRE(part.size() == n);
        double total = 0.0;
        for (const Cell& c : part.cells()) {
          CHECK(std::abs(c.volume - 1.0 / static_cast<double>(n)) < 1e-12);
          total += c.volume;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
        for (std::size_t i = 0; i < n; i += std::max<std::size_t>(1, n / 37)) {
          for (int rep = 0; rep < 5; ++rep) {
            const Point p = part.sample_in_cell(i, rng);
            CHECK(part.locate(p) == i);
            CHECK(m.distance(p, part.cells()[i].center) <= part.cells()[i].radius + 1e-12);
          }
        }
      }
    }
  }

  TEST_CASE("sphere partition diameter bounds") {
    const auto part = equal_area_partition(Manifold::sphere2(), 100);
    CHECK(part.max_diameter() <= 0.7);
    const auto q = quadrature_target(Manifold::sphere2(), 1024);
    CHECK(q.q <= 0.22);
    for (double w : q.weights) CHECK(w == doctest::Approx(1.0 / 1024));
  }

  TEST_CASE("sphere rectangle geometry matches dense sampling") {
    Rng rng = make_rng(17);
    for (int trial = 0; trial < 60; ++trial) {
      const double t0 = M_PI * uniform01(rng), t1 = t0 + (M_PI - t0) * uniform01(rng);
      const double w = 2.0 * M_PI * uniform01(rng);
      const double f0 = 2.0 * M_PI * uniform01(rng);
      const Point p = uniform_sample(Manifold::sphere2(), rng);
      double far = 0.0;
      const int g = 300;
      for (int i = 0; i <= g; ++i)
        for (int j = 0; j <= g; ++j)
          far = std::max(far, Manifold::sphere_distance(p, sphere_point(t0 + (t1 - t0) * i / g, f0 + w * j / g)));
      std::vector<Point> boundary;
      const int e = 250;
      for (int i = 0; i <= e; ++i) {
        boundary.push_back(sphere_point(t0 + (t1 - t0) * i / e, f0));
        boundary.push_back(sphere_point(t0 + (t1 - t0) * i / e, f0 + w));
        boundary.push_back(sphere_point(t0, f0 + w * i / e));
        boundary.push_back(sphere_point(t1, f0 + w * i / e));
      }
      double diam = 0.0;
      for (const Point& a : boundary)
        for (const Point& b : boundary) diam = std::max(diam, Manifold::sphere_distance(a, b));
      const double far_exact = sphere_rect_farthest(p, t0, t1, f0, f0 + w);
      const double diam_exact = sphere_rect_diameter(t0, t1, f0, f0 + w);
      CHECK(far_exact >= far - 1e-12);
      CHECK(far_exact <= far + 1e-2);
      CHECK(diam_exact >= diam - 1e-12);
      CHECK(diam_exact <= diam + 1e-2);
    }
  }

  TEST_CASE("quadrature targets on the torus") {
    const auto q1 = quadrature_target(Manifold::torus(2), 1);
    CHECK(q1.nodes[0][0] == doctest::Approx(0.5));
    CHECK(q1.nodes[0][1] == doctest::Approx(0.5));
    CHECK(q1.q == doctest::Approx(std::sqrt(2.0) / 2.0));
    const auto q4 = quadrature_target(Manifold::torus(2), 4);
    CHECK(q4.q == doctest::Approx(std::sqrt(2.0) / 4.0));
    for (const Point& p : q4.nodes) {
      CHECK((p[0] == doctest::Approx(0.25) || p[0] == doctest::Approx(0.75)));
      CHECK((p[1] == doctest::Approx(0.25) || p[1] == doctest::Approx(0.75)));
    }
  }

  TEST_CASE("doubling the target size shrinks the quantization radius") {
    for (const auto& m : {Manifold::sphere2(), Manifold::torus(2)}) {
      for (std::size_t n = 4; n <= 8192; n *= 2) {
        const double q = quadrature_target(m, n).q;
        const double q2 = quadrature_target(m, 2 * n).q;
        CHECK(q2 <= q);
        CHECK(q / q2 <= 2.2);
      }
    }
  }
}
