#include "ppw/lattice.hpp"

#include <cmath>
#include <limits>

#include "ppw/errors.hpp"

namespace ppw {
namespace {

constexpr double kBoundaryTol = 1e-12;
constexpr double kEnumerationBudget = 4.0e9;

template <typename Fn>
void for_each_in_box(long long r, int dim, Fn&& fn) {
  IntVec k{0, 0, 0};
  const long long r2 = dim == 3 ? r : 0;
  for (k[0] = -r; k[0] <= r; ++k[0])
    for (k[1] = -r; k[1] <= r; ++k[1])
      for (k[2] = -r2; k[2] <= r2; ++k[2]) fn(k);
}

void check_budget(long long r, int dim) {
  const double side = 2.0 * static_cast<double>(r) + 1.0;
  if (std::pow(side, dim) > kEnumerationBudget) {
    throw InvalidInput("lattice enumeration budget exceeded");
  }
}

}  // namespace

LatticeNorm LatticeNorm::p_norm(double p) {
  require(p >= 1.0, "p-norm requires p >= 1");
  LatticeNorm n;
  n.kind_ = Kind::PNorm;
  n.p_ = p;
  return n;
}

LatticeNorm LatticeNorm::dual_basis(const Eigen::MatrixXd& basis) {
  require(basis.rows() == basis.cols() && basis.rows() >= 2 && basis.rows() <= 3,
          "dual basis must be a square 2x2 or 3x3 matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis);
  const auto& sv = svd.singularValues();
  require(sv.minCoeff() > 1e-12 * sv.maxCoeff(), "dual basis vectors must be linearly independent");
  LatticeNorm n;
  n.kind_ = Kind::DualBasis;
  n.p_ = 2.0;
  n.basis_ = basis;
  n.min_singular_ = sv.minCoeff();
  return n;
}

double LatticeNorm::operator()(const IntVec& k, int dim) const {
  if (kind_ == Kind::DualBasis) {
    require(dim == basis_.rows(), "dimension mismatch with dual basis");
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
      double v = 0.0;
      for (int j = 0; j < dim; ++j) v += basis_(i, j) * static_cast<double>(k[static_cast<std::size_t>(j)]);
      s += v * v;
    }
    return std::sqrt(s);
  }
  if (std::isinf(p_)) {
    long long m = 0;
    for (int i = 0; i < dim; ++i) m = std::max(m, std::llabs(k[static_cast<std::size_t>(i)]));
    return static_cast<double>(m);
  }
  if (p_ == 1.0) {
    long long s = 0;
    for (int i = 0; i < dim; ++i) s += std::llabs(k[static_cast<std::size_t>(i)]);
    return static_cast<double>(s);
  }
  if (p_ == 2.0) {
    long long s = 0;
    for (int i = 0; i < dim; ++i) s += k[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(i)];
    return std::sqrt(static_cast<double>(s));
  }
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += std::pow(std::abs(static_cast<double>(k[static_cast<std::size_t>(i)])), p_);
  return std::pow(s, 1.0 / p_);
}

long long LatticeNorm::box_radius(double radius, int dim) const {
  (void)dim;
  // p-norms dominate the sup-norm; ‖Bk‖₂ ≥ σ_min ‖k‖₂ ≥ σ_min ‖k‖_∞.
  const double scale = kind_ == Kind::DualBasis ? 1.0 / min_singular_ : 1.0;
  return static_cast<long long>(std::floor(radius * scale * (1.0 + kBoundaryTol)));
}

std::int64_t count_ball(const LatticeNorm& norm, double radius, int dim) {
  require(radius >= 0.0 && std::isfinite(radius), "ball radius must be finite and nonnegative");
  require(dim == 2 || dim == 3, "lattice enumeration supports dimensions 2 and 3");
  const long long r = norm.box_radius(radius, dim);
  check_budget(r, dim);
  const double limit = radius * (1.0 + kBoundaryTol);
  std::int64_t count = 0;
  for_each_in_box(r, dim, [&](const IntVec& k) {
    if (norm(k, dim) <= limit) ++count;
  });
  return count;
}

std::vector<IntVec> enumerate_ball(const LatticeNorm& norm, double radius, int dim) {
  require(radius >= 0.0 && std::isfinite(radius), "ball radius must be finite and nonnegative");
  require(dim == 2 || dim == 3, "lattice enumeration supports dimensions 2 and 3");
  const long long r = norm.box_radius(radius, dim);
  check_budget(r, dim);
  const double limit = radius * (1.0 + kBoundaryTol);
  std::vector<IntVec> out;
  for_each_in_box(r, dim, [&](const IntVec& k) {
    if (norm(k, dim) <= limit) out.push_back(k);
  });
  return out;
}

std::int64_t annulus_difference_count(const LatticeNorm& norm, const IntVec& k, double radius, int dim) {
  require(k[0] != 0 || k[1] != 0 || (dim == 3 && k[2] != 0), "shift vector must be nonzero");
  const double limit = radius * (1.0 + kBoundaryTol);
  std::int64_t count = 0;
  for (const IntVec& j : enumerate_ball(norm, radius, dim)) {
    const IntVec diff{j[0] - k[0], j[1] - k[1], dim == 3 ? j[2] - k[2] : 0};
    if (norm(diff, dim) > limit) ++count;
  }
  return count;
}

GaussCircleCheck gauss_circle_check(double r) {
  require(r >= 0.0 && std::isfinite(r), "radius must be finite and nonnegative");
  GaussCircleCheck out;
  const auto rr = static_cast<long long>(std::floor(r));
  const double r2 = r * r;
  for (long long x = -rr; x <= rr; ++x) {
    // Largest y with x² + y² ≤ r², computed in integers.
    auto y = static_cast<long long>(std::floor(std::sqrt(std::max(0.0, r2 - static_cast<double>(x * x)))));
    while (static_cast<double>(x * x + (y + 1) * (y + 1)) <= r2) ++y;
    while (y >= 0 && static_cast<double>(x * x + y * y) > r2) --y;
    out.count += 2 * y + 1;
  }
  out.error = static_cast<double>(out.count) - M_PI * r2;
  out.bound = 2.0 * std::sqrt(2.0) * M_PI * r;
  out.holds = std::abs(out.error) <= out.bound;
  return out;
}

}  // namespace ppw
