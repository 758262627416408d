#include <doctest.h>

#include <cmath>

#include "ppw/errors.hpp"
#include "ppw/lattice.hpp"

using namespace ppw;

TEST_SUITE("lattice") {
  TEST_CASE("ball counts") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(count_ball(LatticeNorm::p_norm(inf), 1, 2) == 9);
    CHECK(count_ball(LatticeNorm::p_norm(2), 2, 2) == 13);
    CHECK(count_ball(LatticeNorm::p_norm(1), 2, 2) == 13);
    CHECK(count_ball(LatticeNorm::p_norm(2), 0, 2) == 1);
    CHECK(count_ball(LatticeNorm::p_norm(inf), 2, 3) == 125);
    CHECK(count_ball(LatticeNorm::p_norm(1), 1, 3) == 7);
    // Dual-basis norm with the identity basis is the Euclidean norm.
    CHECK(count_ball(LatticeNorm::dual_basis(Eigen::MatrixXd::Identity(2, 2)), 2, 2) == 13);
  }

  TEST_CASE("general p monotone between 1 and infinity") {
    for (double L : {3.0, 7.5, 12.0}) {
      const auto c1 = count_ball(LatticeNorm::p_norm(1), L, 2);
      const auto c3 = count_ball(LatticeNorm::p_norm(3), L, 2);
      const auto ci = count_ball(LatticeNorm::p_norm(std::numeric_limits<double>::infinity()), L, 2);
      CHECK(c1 <= c3);
      CHECK(c3 <= ci);
    }
  }

  TEST_CASE("annulus differences") {
    CHECK(annulus_difference_count(LatticeNorm::p_norm(2), {1, 0, 0}, 2, 2) == 5);
    // Brute force over a wide box.
    const auto norm = LatticeNorm::p_norm(1.5);
    const IntVec k{2, -1, 0};
    long long expect = 0;
    for (long long a = -20; a <= 20; ++a)
      for (long long b = -20; b <= 20; ++b) {
        const IntVec j{a, b, 0};
        const IntVec jk{a - k[0], b - k[1], 0};
        if (norm(j, 2) <= 9.0 && norm(jk, 2) > 9.0) ++expect;
      }
    CHECK(annulus_difference_count(norm, k, 9.0, 2) == expect);
    CHECK_THROWS_AS(annulus_difference_count(norm, {0, 0, 0}, 3, 2), InvalidInput);
  }

  TEST_CASE("gauss circle") {
    const auto g = gauss_circle_check(1.0);
    CHECK(g.count == 5);
    CHECK(g.holds);
    for (int i = 0; i < 54; ++i) {
      const double r = 1.0 + 3.7 * i;
      const auto c = gauss_circle_check(r);
      CHECK(c.count == count_ball(LatticeNorm::p_norm(2), r, 2));
      CHECK(c.holds);
    }
  }

  TEST_CASE("invalid input") {
    CHECK_THROWS_AS(LatticeNorm::p_norm(0.5), InvalidInput);
    Eigen::MatrixXd sing(2, 2);
    sing << 1, 2, 2, 4;
    CHECK_THROWS_AS(LatticeNorm::dual_basis(sing), InvalidInput);
    CHECK_THROWS_AS(count_ball(LatticeNorm::p_norm(2), 1e6, 3), InvalidInput);
  }

  TEST_CASE("annulus inclusion and packing bound") {
    // Count bounds from disjoint cells around lattice points: F(s) ≤ V(s+μ)² and
    // F(s) ≥ V(s−μ)², so the annulus count is at most 2V(a+2μ)·L·‖k‖₂ where
    // ‖k‖ ≤ a‖k‖₂ and μ bounds the covering radius in the norm.
    const double inf = std::numeric_limits<double>::infinity();
    struct Case {
      double p, area, mu, a;
    };
    const Case cases[] = {{1.0, 2.0, 1.0, std::sqrt(2.0)}, {2.0, M_PI, std::sqrt(0.5), 1.0}, {inf, 4.0, 0.5, 1.0}};
    for (const Case& c : cases) {
      const LatticeNorm norm = LatticeNorm::p_norm(c.p);
      const double C = 2.0 * c.area * (c.a + 2.0 * c.mu);
      for (int L : {8, 16}) {
        const auto full = count_ball(norm, L, 2);
        for (long long x = -L; x <= L; ++x)
          for (long long y = -L; y <= L; ++y) {
            const IntVec k{x, y, 0};
            const double nk = norm(k, 2);
            if (!(nk > 0.0 && nk < L / 2.0)) continue;
            const auto d = annulus_difference_count(norm, k, L, 2);
            CHECK(d <= full - count_ball(norm, L - nk, 2));
            CHECK(double(d) <= C * L * std::hypot(double(x), double(y)));
            CHECK(d == annulus_difference_count(norm, {-x, -y, 0}, L, 2));
          }
      }
    }
  }
}
