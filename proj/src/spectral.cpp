#include "ppw/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ppw/errors.hpp"

namespace ppw {
namespace {

// Calibrated with calibrate_hormander_constant: Sphere2 at L = 10 over 10⁴
// distances, standard 𝕋² at L = 6 over a 100×100 displacement grid.
constexpr double kHormanderSphere = 3.2325017444988835;
constexpr double kHormanderTorus = 1.1308822216148195;

double clamp_unit(double u) { return std::clamp(u, -1.0, 1.0); }

}  // namespace

double legendre_P(int l, double u) {
  require(l >= 0, "Legendre degree must be nonnegative");
  u = clamp_unit(u);
  if (l == 0) return 1.0;
  double p0 = 1.0;
  double p1 = u;
  for (int n = 2; n <= l; ++n) {
    const double p2 = ((2.0 * n - 1.0) * u * p1 - (n - 1.0) * p0) / n;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

std::vector<double> legendre_all(int lmax, double u) {
  require(lmax >= 0, "Legendre degree must be nonnegative");
  u = clamp_unit(u);
  std::vector<double> p(static_cast<std::size_t>(lmax) + 1);
  p[0] = 1.0;
  if (lmax >= 1) p[1] = u;
  for (int n = 2; n <= lmax; ++n) {
    const auto i = static_cast<std::size_t>(n);
    p[i] = ((2.0 * n - 1.0) * u * p[i - 1] - (n - 1.0) * p[i - 2]) / n;
  }
  return p;
}

double jacobi_P(int L, double a, double b, double u) {
  require(L >= 0, "Jacobi degree must be nonnegative");
  require(a > -1.0 && b > -1.0, "Jacobi parameters must exceed -1");
  u = clamp_unit(u);
  if (L == 0) return 1.0;
  double p0 = 1.0;
  double p1 = (a + 1.0) + (a + b + 2.0) * (u - 1.0) / 2.0;
  const double ab2 = a * a - b * b;
  for (int n = 2; n <= L; ++n) {
    const double s = 2.0 * n + a + b;
    const double c1 = 2.0 * n * (n + a + b) * (s - 2.0);
    const double c2 = (s - 1.0) * (s * (s - 2.0) * u + ab2);
    const double c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
    const double p2 = (c2 * p1 - c3 * p0) / c1;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

Spectrum::Spectrum(const Manifold& m, double cutoff) : m_(m), cutoff_(cutoff) {
  require(cutoff >= 0.0 && std::isfinite(cutoff), "spectral cutoff must be finite and nonnegative");
  auto shells = std::make_shared<std::vector<EigenspaceDescriptor>>();
  auto freqs = std::make_shared<std::vector<Frequency>>();
  auto offsets = std::make_shared<std::vector<std::size_t>>();
  if (m.is_sphere()) {
    const int lmax = static_cast<int>(std::floor(cutoff));
    for (int l = 0; l <= lmax; ++l) {
      shells->push_back({l, static_cast<double>(l) * (l + 1), 2LL * l + 1});
    }
  } else {
    const int d = m.dim();
    const Eigen::MatrixXd dual = m.dual_generators();
    const LatticeNorm norm = m.rectangular() && dual.isIdentity() ? LatticeNorm::p_norm(2.0)
                                                                   : LatticeNorm::dual_basis(dual);
    struct Item {
      double r2;
      Frequency f;
    };
    std::vector<Item> items;
    for (const IntVec& k : enumerate_ball(norm, cutoff, d)) {
      Frequency f;
      f.k = k;
      double r2 = 0.0;
      for (int i = 0; i < d; ++i) {
        double v = 0.0;
        for (int c = 0; c < d; ++c) v += dual(i, c) * static_cast<double>(k[static_cast<std::size_t>(c)]);
        f.j[static_cast<std::size_t>(i)] = v;
        r2 += v * v;
      }
      items.push_back({r2, f});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.r2 < b.r2; });
    double shell_r2 = -1.0;
    for (const Item& it : items) {
      const bool same = shell_r2 >= 0.0 && std::abs(it.r2 - shell_r2) <= 1e-9 * std::max(1.0, shell_r2);
      if (!same) {
        shell_r2 = it.r2;
        offsets->push_back(freqs->size());
        shells->push_back({static_cast<int>(shells->size()), 4.0 * std::numbers::pi * std::numbers::pi * it.r2, 0});
      }
      freqs->push_back(it.f);
      ++shells->back().multiplicity;
    }
    offsets->push_back(freqs->size());
  }
  shells_ = std::move(shells);
  freqs_ = std::move(freqs);
  offsets_ = std::move(offsets);
}

std::span<const Frequency> Spectrum::members(std::size_t l) const {
  if (m_.is_sphere()) return {};
  require(l < size(), "eigenspace index beyond the precomputed spectrum");
  const std::size_t lo = (*offsets_)[l];
  const std::size_t hi = (*offsets_)[l + 1];
  return std::span<const Frequency>(freqs_->data() + lo, hi - lo);
}

double eigenspace_kernel_Z(const Spectrum& spec, std::size_t l, const Point& x, const Point& y) {
  require(l < spec.size(), "eigenspace index beyond the precomputed spectrum");
  const Manifold& m = spec.manifold();
  if (m.is_sphere()) {
    const double u = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    return (2.0 * static_cast<double>(l) + 1.0) * legendre_P(static_cast<int>(l), u);
  }
  const auto sx = m.to_fractional(x);
  const auto sy = m.to_fractional(y);
  double z = 0.0;
  for (const Frequency& f : spec.members(l)) {
    double phase = 0.0;
    for (int i = 0; i < m.dim(); ++i) {
      const auto ii = static_cast<std::size_t>(i);
      phase += static_cast<double>(f.k[ii]) * (sx[ii] - sy[ii]);
    }
    z += std::cos(2.0 * std::numbers::pi * phase);
  }
  return z;
}

SzegoQuantities szego_quantities(int L, double alpha, double beta, double theta) {
  require(theta > 0.0 && theta < std::numbers::pi, "Szego quantities need 0 < theta < pi");
  const double s = std::sin(theta / 2.0);
  const double c = std::sin((std::numbers::pi - theta) / 2.0);
  SzegoQuantities q;
  q.k = std::pow(s, -alpha - 0.5) * std::pow(c, -beta - 0.5) / std::sqrt(std::numbers::pi);
  const double p = jacobi_P(L, alpha, beta, std::cos(theta));
  q.bound_quantity = L * std::pow(s, 2.0 * alpha + 1.0) * std::pow(c, 2.0 * beta + 1.0) * p * p;
  return q;
}

double hormander_constant(const Manifold& m) { return m.is_sphere() ? kHormanderSphere : kHormanderTorus; }

double hormander_envelope(double N, int d, double r, double C) {
  require(N >= 1.0 && d >= 1 && r >= 0.0, "envelope needs N >= 1, d >= 1, r >= 0");
  return C * N / (1.0 + std::pow(N, 1.0 / d) * r);
}

double calibrate_hormander_constant(const Manifold& m, double L, int grid) {
  require(grid >= 2, "calibration grid too small");
  double best = 0.0;
  if (m.is_sphere()) {
    const int deg = static_cast<int>(std::floor(L));
    const double N = (deg + 1.0) * (deg + 1.0);
    for (int i = 0; i < grid; ++i) {
      const double theta = std::numbers::pi * i / (grid - 1);
      const auto p = legendre_all(deg, std::cos(theta));
      double k = 0.0;
      for (int l = 0; l <= deg; ++l) k += (2.0 * l + 1.0) * p[static_cast<std::size_t>(l)];
      best = std::max(best, std::abs(k) * (1.0 + std::sqrt(N) * theta) / N);
    }
    return best;
  }
  const Spectrum spec(m, L);
  const double N = static_cast<double>(spec.frequencies().size());
  const int d = m.dim();
  const int per_axis = std::max(2, static_cast<int>(std::lround(std::pow(grid, 1.0 / d))));
  const Point origin = m.from_fractional({0.0, 0.0, 0.0});
  std::array<int, kMaxDim> idx{0, 0, 0};
  const int total = static_cast<int>(std::pow(per_axis, d));
  for (int t = 0; t < total; ++t) {
    int rem = t;
    std::array<double, kMaxDim> s{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) {
      idx[static_cast<std::size_t>(i)] = rem % per_axis;
      rem /= per_axis;
      s[static_cast<std::size_t>(i)] = static_cast<double>(idx[static_cast<std::size_t>(i)]) / per_axis;
    }
    double k = 0.0;
    for (const Frequency& f : spec.frequencies()) {
      double phase = 0.0;
      for (int i = 0; i < d; ++i) phase += static_cast<double>(f.k[static_cast<std::size_t>(i)]) * s[static_cast<std::size_t>(i)];
      k += std::cos(2.0 * std::numbers::pi * phase);
    }
    const double r = m.distance(m.from_fractional(s), origin);
    best = std::max(best, std::abs(k) * (1.0 + std::pow(N, 1.0 / d) * r) / N);
  }
  return best;
}

}  // namespace ppw
