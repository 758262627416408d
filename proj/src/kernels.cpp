#include "ppw/kernels.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ppw/errors.hpp"
#include "ppw/spectral.hpp"

namespace ppw {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPoleGuard = 1e-6;

bool upper_half(const IntVec& k) {
  for (long long c : k) {
    if (c != 0) return c > 0;
  }
  return false;
}

double phase(const IntVec& k, const std::array<double, kMaxDim>& s, int d) {
  double p = 0.0;
  for (int i = 0; i < d; ++i) p += static_cast<double>(k[static_cast<std::size_t>(i)]) * s[static_cast<std::size_t>(i)];
  return kTwoPi * p;
}

// cos(d/2)·e^{iψ}: the kernel ratio (1 + f(x)f̄(y)) / √((1+|f(x)|²)(1+|f(y)|²)),
// written in Cartesian coordinates of a chart whose pole avoids x and y.
Complex spherical_ratio(const Point& x, const Point& y) {
  Point a = x;
  Point b = y;
  if (1.0 - x[2] < kPoleGuard || 1.0 - y[2] < kPoleGuard) {
    // Chart from the south pole, frame (e₁, −e₂, −e₃).
    a = Point{{x[0], -x[1], -x[2]}};
    b = Point{{y[0], -y[1], -y[2]}};
  }
  const double ca = 1.0 - a[2];
  const double cb = 1.0 - b[2];
  const Complex num = Complex(ca * cb, 0.0) + Complex(a[0], a[1]) * Complex(b[0], -b[1]);
  return num / (2.0 * std::sqrt(ca * cb));
}

}  // namespace

void real_spherical_harmonics(int L, const Point& p, std::span<double> out) {
  require(L >= 0, "harmonic degree must be nonnegative");
  const auto n = static_cast<std::size_t>((L + 1) * (L + 1));
  require(out.size() >= n, "output span too small for spherical harmonics");
  const double z = std::clamp(p[2], -1.0, 1.0);
  const double rho = std::hypot(p[0], p[1]);
  const double cphi = rho > 0.0 ? p[0] / rho : 1.0;
  const double sphi = rho > 0.0 ? p[1] / rho : 0.0;
  const double s = rho;  // sin θ for a unit vector

  // Normalized associated Legendre functions P̃_ℓ^m = √((2ℓ+1)(ℓ−m)!/(ℓ+m)!) P_ℓ^m,
  // column by column in m; cos(mφ), sin(mφ) by the angle-addition recurrence.
  double pmm = 1.0;
  double cm = 1.0;
  double sm = 0.0;
  for (int m = 0; m <= L; ++m) {
    if (m > 0) {
      pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
      const double c2 = cm * cphi - sm * sphi;
      sm = sm * cphi + cm * sphi;
      cm = c2;
    }
    const double cos_part = m == 0 ? 1.0 : std::numbers::sqrt2 * cm;
    const double sin_part = std::numbers::sqrt2 * sm;
    double p_lm2 = 0.0;
    double p_lm1 = pmm;
    for (int l = m; l <= L; ++l) {
      double plm;
      if (l == m) {
        plm = pmm;
      } else if (l == m + 1) {
        plm = std::sqrt(2.0 * m + 3.0) * z * pmm;
      } else {
        const double ll = l;
        const double a = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - double(m) * m));
        const double b = std::sqrt(((ll - 1.0) * (ll - 1.0) - double(m) * m) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
        plm = a * (z * p_lm1 - b * p_lm2);
      }
      if (l > m) {
        p_lm2 = p_lm1;
        p_lm1 = plm;
      }
      const auto base = static_cast<std::size_t>(l * l + l);
      out[base + static_cast<std::size_t>(m)] = plm * cos_part;
      if (m > 0) out[base - static_cast<std::size_t>(m)] = plm * sin_part;
    }
  }
}

std::vector<double> real_spherical_harmonics(int L, const Point& x) {
  std::vector<double> out(static_cast<std::size_t>((L + 1) * (L + 1)));
  real_spherical_harmonics(L, x, out);
  return out;
}

EnsembleSpec EnsembleSpec::harmonic(const Manifold& m, double L, double p) {
  if (m.is_sphere() || (m.rectangular() && m.generators().isIdentity())) {
    return harmonic(m, L, LatticeNorm::p_norm(p));
  }
  require(p == 2.0, "general-lattice tori use the dual-basis Euclidean norm (p = 2)");
  return harmonic(m, L, LatticeNorm::dual_basis(m.dual_generators()));
}

EnsembleSpec EnsembleSpec::harmonic(const Manifold& m, double L, const LatticeNorm& norm) {
  require(L >= 0.0 && std::isfinite(L), "harmonic degree must be finite and nonnegative");
  ensemble::Harmonic h{m, L, norm, nullptr, nullptr};
  std::size_t n;
  if (m.is_sphere()) {
    const auto deg = static_cast<std::size_t>(std::floor(L));
    n = (deg + 1) * (deg + 1);
  } else {
    auto freqs = std::make_shared<std::vector<IntVec>>(enumerate_ball(norm, L, m.dim()));
    auto half = std::make_shared<std::vector<IntVec>>();
    for (const IntVec& k : *freqs) {
      if (upper_half(k)) half->push_back(k);
    }
    n = freqs->size();
    h.frequencies = std::move(freqs);
    h.half = std::move(half);
  }
  return EnsembleSpec(std::move(h), m, n);
}

EnsembleSpec EnsembleSpec::spherical(std::size_t n) {
  require(n >= 1, "ensemble size must be at least 1");
  return EnsembleSpec(ensemble::Spherical{n}, Manifold::sphere2(), n);
}

EnsembleSpec EnsembleSpec::gaf_zeros(std::size_t n, bool start_at_one) {
  require(n >= 1 && n <= 1000, "GAF degree must lie in [1, 1000]");
  return EnsembleSpec(ensemble::GafZeros{n, start_at_one}, Manifold::sphere2(), n);
}

EnsembleSpec EnsembleSpec::jittered(const Manifold& m, std::size_t n) {
  require(n >= 1, "ensemble size must be at least 1");
  auto part = std::make_shared<const Partition>(equal_area_partition(m, n));
  return EnsembleSpec(ensemble::Jittered{m, n, std::move(part)}, m, n);
}

EnsembleSpec EnsembleSpec::iid(const Manifold& m, std::size_t n) {
  require(n >= 1, "ensemble size must be at least 1");
  return EnsembleSpec(ensemble::Iid{m, n}, m, n);
}

bool EnsembleSpec::is_projection() const {
  return as<ensemble::Harmonic>() != nullptr || as<ensemble::Jittered>() != nullptr;
}

bool EnsembleSpec::has_kernel() const {
  return as<ensemble::Iid>() == nullptr && as<ensemble::GafZeros>() == nullptr;
}

std::string EnsembleSpec::label() const {
  std::ostringstream os;
  if (const auto* h = as<ensemble::Harmonic>()) {
    os << "harmonic_" << m_.label();
    if (!m_.is_sphere()) {
      if (h->norm.kind() == LatticeNorm::Kind::DualBasis) {
        os << "_dual";
      } else if (std::isinf(h->norm.p())) {
        os << "_pinf";
      } else {
        os << "_p" << h->norm.p();
      }
    }
    os << "_L" << h->L;
  } else if (as<ensemble::Spherical>()) {
    os << "spherical";
  } else if (const auto* g = as<ensemble::GafZeros>()) {
    os << (g->start_at_one ? "gaf1" : "gaf");
  } else if (as<ensemble::Jittered>()) {
    os << "jittered_" << m_.label();
  } else {
    os << "iid_" << m_.label();
  }
  return os.str();
}

std::vector<Complex> basis_eval(const EnsembleSpec& spec, const Point& x) {
  std::vector<Complex> out(spec.N());
  if (const auto* h = spec.as<ensemble::Harmonic>()) {
    if (spec.manifold().is_sphere()) {
      const auto y = real_spherical_harmonics(static_cast<int>(std::floor(h->L)), x);
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i];
    } else {
      const auto s = spec.manifold().to_fractional(x);
      const auto& f = *h->frequencies;
      for (std::size_t i = 0; i < f.size(); ++i) out[i] = std::polar(1.0, phase(f[i], s, spec.manifold().dim()));
    }
    return out;
  }
  if (const auto* j = spec.as<ensemble::Jittered>()) {
    out[j->partition->locate(x)] = std::sqrt(static_cast<double>(spec.N()));
    return out;
  }
  throw UnsupportedVariant("basis_eval needs a projection ensemble (harmonic or jittered)");
}

void real_basis_eval(const EnsembleSpec& spec, const Point& x, std::span<double> out) {
  require(out.size() >= spec.N(), "output span too small for the basis");
  if (const auto* h = spec.as<ensemble::Harmonic>()) {
    if (spec.manifold().is_sphere()) {
      real_spherical_harmonics(static_cast<int>(std::floor(h->L)), x, out);
      return;
    }
    const auto s = spec.manifold().to_fractional(x);
    const int d = spec.manifold().dim();
    out[0] = 1.0;
    std::size_t i = 1;
    for (const IntVec& k : *h->half) {
      const double ph = phase(k, s, d);
      out[i++] = std::numbers::sqrt2 * std::cos(ph);
      out[i++] = std::numbers::sqrt2 * std::sin(ph);
    }
    return;
  }
  if (const auto* j = spec.as<ensemble::Jittered>()) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(spec.N()), 0.0);
    out[j->partition->locate(x)] = std::sqrt(static_cast<double>(spec.N()));
    return;
  }
  throw UnsupportedVariant("real_basis_eval needs a projection ensemble (harmonic or jittered)");
}

Complex kernel_eval(const EnsembleSpec& spec, const Point& x, const Point& y) {
  const double N = static_cast<double>(spec.N());
  if (const auto* h = spec.as<ensemble::Harmonic>()) {
    if (spec.manifold().is_sphere()) {
      const int deg = static_cast<int>(std::floor(h->L));
      const auto p = legendre_all(deg, x[0] * y[0] + x[1] * y[1] + x[2] * y[2]);
      double k = 0.0;
      for (int l = 0; l <= deg; ++l) k += (2.0 * l + 1.0) * p[static_cast<std::size_t>(l)];
      return k;
    }
    const Manifold& m = spec.manifold();
    const auto sx = m.to_fractional(x);
    const auto sy = m.to_fractional(y);
    std::array<double, kMaxDim> ds{};
    for (int i = 0; i < m.dim(); ++i) ds[static_cast<std::size_t>(i)] = sx[static_cast<std::size_t>(i)] - sy[static_cast<std::size_t>(i)];
    double re = 0.0;
    double im = 0.0;
    for (const IntVec& k : *h->frequencies) {
      const double ph = phase(k, ds, m.dim());
      re += std::cos(ph);
      im += std::sin(ph);
    }
    return {re, im};
  }
  if (spec.as<ensemble::Spherical>()) {
    if (spec.N() == 1) return 1.0;
    return N * std::pow(spherical_ratio(x, y), static_cast<int>(spec.N() - 1));
  }
  if (const auto* j = spec.as<ensemble::Jittered>()) {
    return j->partition->locate(x) == j->partition->locate(y) ? N : 0.0;
  }
  throw UnsupportedVariant("ensemble has no determinantal kernel");
}

double kernel_abs(const EnsembleSpec& spec, const Point& x, const Point& y) {
  if (spec.as<ensemble::Spherical>()) {
    const double d = Manifold::sphere_distance(x, y);
    return static_cast<double>(spec.N()) * std::pow(std::cos(d / 2.0), static_cast<double>(spec.N()) - 1.0);
  }
  return std::abs(kernel_eval(spec, x, y));
}

double kernel_diag_check(const EnsembleSpec& spec, std::size_t samples, Rng& rng) {
  if (!spec.has_kernel()) throw UnsupportedVariant("ensemble has no determinantal kernel");
  double worst = 0.0;
  const double N = static_cast<double>(spec.N());
  for (std::size_t i = 0; i < samples; ++i) {
    const Point x = uniform_sample(spec.manifold(), rng);
    worst = std::max(worst, std::abs(kernel_eval(spec, x, x) - N));
  }
  return worst;
}

Point lift_stereographic(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return Point{{0.0, 0.0, 1.0}};
  const double r = std::abs(z);
  if (r <= 1.0) {
    const double r2 = r * r;
    const double den = r2 + 1.0;
    return Point{{2.0 * z.real() / den, 2.0 * z.imag() / den, (r2 - 1.0) / den}};
  }
  const double s = 1.0 / r;
  const double den = 1.0 + s * s;
  return Point{{2.0 * (z.real() * s) * s / den, 2.0 * (z.imag() * s) * s / den, (1.0 - s * s) / den}};
}

Complex stereographic(const Point& x) {
  const double c = 1.0 - x[2];
  if (c <= 0.0) return {std::numeric_limits<double>::infinity(), 0.0};
  return {x[0] / c, x[1] / c};
}

}  // namespace ppw
