#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ppw/errors.hpp"
#include "ppw/rng.hpp"
#include "ppw/spectral.hpp"

using namespace ppw;

namespace {

// Jacobi polynomial from the explicit finite sum
// P_n^{(a,b)}(x) = Σ_s C(n+a, n−s) C(n+b, s) ((x−1)/2)^s ((x+1)/2)^{n−s}.
double jacobi_series(int n, double a, double b, double x) {
  auto binom = [](double top, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r *= (top - k + i) / i;
    return r;
  };
  double sum = 0.0;
  for (int s = 0; s <= n; ++s) {
    sum += binom(n + a, n - s) * binom(n + b, s) * std::pow((x - 1) / 2, s) * std::pow((x + 1) / 2, n - s);
  }
  return sum;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("legendre spot values") {
    CHECK(legendre_P(0, 0.77) == 1.0);
    CHECK(legendre_P(1, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    const double u = 0.3;
    CHECK(std::abs(legendre_P(4, u) - (35 * std::pow(u, 4) - 30 * u * u + 3) / 8) < 1e-13);
    CHECK(legendre_P(7, 1.0 + 1e-13) == doctest::Approx(1.0));
  }

  TEST_CASE("legendre bounded on [-1,1]") {
    double worst = 0.0;
    for (int i = 0; i <= 2000; ++i) {
      const auto p = legendre_all(200, -1.0 + i / 1000.0);
      for (double v : p) worst = std::max(worst, std::abs(v));
    }
    CHECK(worst <= 1.0 + 1e-12);
  }

  TEST_CASE("jacobi against explicit sum and closed forms") {
    CHECK(jacobi_P(0, 1.3, 0.2, 0.4) == 1.0);
    CHECK(std::abs(jacobi_P(1, 1.0, 0.5, 0.2) - (2.0 + 3.5 * (0.2 - 1.0) / 2.0)) < 1e-15);
    for (int n = 0; n <= 12; ++n) {
      for (double x : {-0.9, -0.3, 0.1, 0.65, 1.0}) {
        CHECK(std::abs(jacobi_P(n, 1.0, 0.5, x) - jacobi_series(n, 1.0, 0.5, x)) < 1e-10 * std::max(1.0, std::abs(jacobi_series(n, 1.0, 0.5, x))));
      }
    }
    for (int L = 0; L <= 20; ++L) {
      for (double a : {-0.5, 0.0, 1.5}) {
        const double p = jacobi_P(L, a, a, 0.37);
        const double q = jacobi_P(L, a, a, -0.37);
        CHECK(std::abs(q - (L % 2 ? -p : p)) < 1e-10 * std::max(1.0, std::abs(p)));
      }
    }
    CHECK(std::abs(jacobi_P(9, 0.0, 0.0, 0.42) - legendre_P(9, 0.42)) < 1e-14);
    CHECK_THROWS_AS(jacobi_P(3, -1.0, 0.0, 0.1), InvalidInput);
    CHECK_THROWS_AS(jacobi_P(3, 0.0, -2.0, 0.1), InvalidInput);
  }

  TEST_CASE("sphere spectrum descriptors") {
    const Spectrum s(Manifold::sphere2(), 6);
    REQUIRE(s.size() == 7);
    for (std::size_t l = 0; l < s.size(); ++l) {
      CHECK(s[l].eigenvalue == doctest::Approx(double(l) * (l + 1)));
      CHECK(s[l].multiplicity == static_cast<long long>(2 * l + 1));
    }
  }

  TEST_CASE("torus spectrum shells") {
    const Spectrum s(Manifold::torus(2), 3.0);
    // |k|² ∈ {0,1,2,4,5,8,9}: multiplicities 1,4,4,4,8,4,4.
    REQUIRE(s.size() == 7);
    const long long mult[] = {1, 4, 4, 4, 8, 4, 4};
    const double r2[] = {0, 1, 2, 4, 5, 8, 9};
    for (std::size_t l = 0; l < s.size(); ++l) {
      CHECK(s[l].multiplicity == mult[l]);
      CHECK(s[l].eigenvalue == doctest::Approx(4 * std::numbers::pi * std::numbers::pi * r2[l]));
      CHECK(s.members(l).size() == static_cast<std::size_t>(mult[l]));
      if (l > 0) CHECK(s[l].eigenvalue > s[l - 1].eigenvalue);
    }
    // Hexagonal lattice: first nonzero dual shell has 6 members.
    Eigen::MatrixXd g(2, 2);
    g << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
    const Spectrum h(Manifold::torus(g), 1.2);
    REQUIRE(h.size() >= 2);
    CHECK(h[1].multiplicity == 6);
  }

  TEST_CASE("eigenspace kernel values") {
    const Manifold s2 = Manifold::sphere2();
    const Spectrum sp(s2, 5);
    Rng rng = make_rng(7);
    const Point x = uniform_sample(s2, rng);
    for (std::size_t l = 0; l < sp.size(); ++l) CHECK(eigenspace_kernel_Z(sp, l, x, x) == doctest::Approx(2.0 * l + 1));
    CHECK(std::abs(eigenspace_kernel_Z(sp, 1, sphere_point(M_PI / 2, 0), sphere_point(M_PI / 2, M_PI / 2))) < 1e-15);

    const Manifold t2 = Manifold::torus(2);
    const Spectrum st(t2, 2.0);
    const Point a = t2.from_fractional({0.5, 0.3, 0});
    const Point b = t2.from_fractional({0.25, 0.3, 0});
    CHECK(eigenspace_kernel_Z(st, 1, a, b) == doctest::Approx(2.0));
    for (std::size_t l = 0; l < st.size(); ++l) CHECK(eigenspace_kernel_Z(st, l, a, a) == doctest::Approx(double(st[l].multiplicity)));
    CHECK_THROWS_AS(eigenspace_kernel_Z(st, st.size(), a, b), InvalidInput);
  }

  TEST_CASE("szego quantities") {
    for (double th : {0.1, 1.0, 3.0}) CHECK(szego_quantities(5, -0.5, -0.5, th).k == doctest::Approx(1 / std::sqrt(M_PI)));
    CHECK(szego_quantities(0, 1.0, 0.0, 1.0).bound_quantity == 0.0);
    CHECK_THROWS_AS(szego_quantities(3, 1, 0, 0.0), InvalidInput);
    CHECK_THROWS_AS(szego_quantities(3, 1, 0, M_PI), InvalidInput);
    double sweep = 0.0;
    for (int L : {10, 20, 50}) sweep = std::max(sweep, szego_quantities(L, 1.0, 0.0, M_PI - 0.01).bound_quantity);
    CHECK(szego_quantities(50, 1.0, 0.0, M_PI - 0.01).bound_quantity <= sweep);
  }

  TEST_CASE("szego bound uniform near pi") {
    const double pairs[][2] = {{1, 0}, {1, 0.5}, {2, 1}, {4, 3}};
    for (const auto& ab : pairs) {
      double worst = 0.0;
      for (int L = 10; L <= 200; ++L) {
        for (int i = 0; i < 200; ++i) {
          const double th = M_PI - 3.0 / L * (1.0 - i / 200.0);
          worst = std::max(worst, szego_quantities(L, ab[0], ab[1], th).bound_quantity);
        }
      }
      CAPTURE(ab[0]);
      CHECK(worst < 1.0);
    }
  }

  TEST_CASE("hormander envelope and calibration") {
    CHECK(hormander_envelope(50, 2, 0.0, 2.5) == doctest::Approx(125.0));
    CHECK(hormander_envelope(1, 2, 0.4, 2.0) == doctest::Approx(2.0 / 1.4));
    const double c = calibrate_hormander_constant(Manifold::sphere2(), 10, 10000);
    CHECK(c == doctest::Approx(hormander_constant(Manifold::sphere2())).epsilon(1e-12));
    const double ct = calibrate_hormander_constant(Manifold::torus(2), 6, 10000);
    CHECK(ct == doctest::Approx(hormander_constant(Manifold::torus(2))).epsilon(1e-12));
    // The constant at a larger degree stays of the same order.
    CHECK(calibrate_hormander_constant(Manifold::sphere2(), 20, 10000) < 2 * c);
  }
}
