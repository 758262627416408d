#include "ppw/manifold.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "ppw/errors.hpp"

namespace ppw {
namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Lagrange–Gauss reduction of a 2D basis (columns).
Eigen::MatrixXd gauss_reduce(Eigen::MatrixXd b) {
  for (int iter = 0; iter < 1000; ++iter) {
    if (b.col(0).squaredNorm() > b.col(1).squaredNorm()) b.col(0).swap(b.col(1));
    const double mu = std::round(b.col(0).dot(b.col(1)) / b.col(0).squaredNorm());
    if (mu == 0.0) break;
    b.col(1) -= mu * b.col(0);
  }
  return b;
}

// Textbook LLL (delta = 3/4) on the columns of b.
Eigen::MatrixXd lll_reduce(Eigen::MatrixXd b) {
  const int n = static_cast<int>(b.cols());
  auto gram_schmidt = [&](Eigen::MatrixXd& bs, Eigen::MatrixXd& mu) {
    bs = b;
    mu = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < i; ++j) {
        mu(i, j) = b.col(i).dot(bs.col(j)) / bs.col(j).squaredNorm();
        bs.col(i) -= mu(i, j) * bs.col(j);
      }
    }
  };
  Eigen::MatrixXd bs, mu;
  gram_schmidt(bs, mu);
  int k = 1;
  int guard = 0;
  while (k < n && ++guard < 10000) {
    for (int j = k - 1; j >= 0; --j) {
      const double q = std::round(mu(k, j));
      if (q != 0.0) {
        b.col(k) -= q * b.col(j);
        gram_schmidt(bs, mu);
      }
    }
    if (bs.col(k).squaredNorm() >= (0.75 - mu(k, k - 1) * mu(k, k - 1)) * bs.col(k - 1).squaredNorm()) {
      ++k;
    } else {
      b.col(k).swap(b.col(k - 1));
      gram_schmidt(bs, mu);
      k = std::max(k - 1, 1);
    }
  }
  return b;
}

void sphere_angles(const Point& p, double& theta, double& phi) {
  theta = std::atan2(std::hypot(p[0], p[1]), p[2]);
  phi = std::atan2(p[1], p[0]);
  if (phi < 0.0) phi += kTwoPi;
}

// Smallest representative of `angle` that is >= `base`.
double wrap_above(double angle, double base) {
  double a = std::fmod(angle - base, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return base + a;
}

}  // namespace

Point sphere_point(double theta, double phi) {
  const double s = std::sin(theta);
  return Point{{s * std::cos(phi), s * std::sin(phi), std::cos(theta)}};
}

Manifold Manifold::sphere2() {
  Manifold m;
  m.kind_ = ManifoldKind::Sphere2;
  m.dim_ = 2;
  m.diameter_ = M_PI;
  return m;
}

Manifold Manifold::torus(int dim) {
  require(dim >= 2 && dim <= kMaxDim, "torus dimension must be 2 or 3");
  return torus(Eigen::MatrixXd::Identity(dim, dim));
}

Manifold Manifold::torus(const Eigen::MatrixXd& generators) {
  const auto d = generators.rows();
  require(d == generators.cols(), "torus generator matrix must be square");
  require(d >= 2 && d <= kMaxDim, "torus dimension must be 2 or 3");
  require(generators.allFinite(), "torus generators must be finite");
  const double det = generators.determinant();
  require(std::abs(det) > 1e-12 * std::pow(generators.norm(), static_cast<double>(d)),
          "torus generators must be linearly independent");
  Manifold m;
  m.kind_ = ManifoldKind::Torus;
  m.dim_ = static_cast<int>(d);
  m.gen_ = generators;
  m.finish_torus_setup();
  return m;
}

void Manifold::finish_torus_setup() {
  gen_inv_ = gen_.inverse();
  rectangular_ = true;
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      if (i != j && gen_(i, j) != 0.0) rectangular_ = false;
    }
  }
  if (rectangular_) {
    double sum = 0.0;
    for (int i = 0; i < dim_; ++i) {
      period_[static_cast<std::size_t>(i)] = std::abs(gen_(i, i));
      sum += gen_(i, i) * gen_(i, i);
    }
    reduced_ = gen_;
    reduced_inv_ = gen_inv_;
    shift_radius_ = 1;
    diameter_ = 0.5 * std::sqrt(sum);
    return;
  }
  if (dim_ == 2) {
    reduced_ = gauss_reduce(gen_);
    shift_radius_ = 1;
  } else {
    reduced_ = lll_reduce(gen_);
    shift_radius_ = 2;
  }
  reduced_inv_ = reduced_.inverse();
  if (dim_ == 2) {
    // Covering radius = circumradius of the acute triangle (0, v, w).
    Eigen::Vector2d v = reduced_.col(0);
    Eigen::Vector2d w = reduced_.col(1);
    if (v.dot(w) < 0.0) w = -w;
    const double a = v.norm();
    const double b = w.norm();
    const double c = (w - v).norm();
    const double area = 0.5 * std::abs(v.x() * w.y() - v.y() * w.x());
    diameter_ = a * b * c / (4.0 * area);
  } else {
    // Numerical maximization of the distance to the lattice.
    double best = 0.0;
    std::array<double, kMaxDim> arg{};
    const int grid = 24;
    Point origin;
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j)
        for (int k = 0; k < grid; ++k) {
          const std::array<double, kMaxDim> s{(i + 0.5) / grid, (j + 0.5) / grid, (k + 0.5) / grid};
          const double dd = torus_distance_sq(from_fractional(s), origin);
          if (dd > best) {
            best = dd;
            arg = s;
          }
        }
    double step = 0.5 / grid;
    while (step > 1e-10) {
      bool improved = false;
      for (int axis = 0; axis < 3; ++axis) {
        for (double sign : {-1.0, 1.0}) {
          auto s = arg;
          s[static_cast<std::size_t>(axis)] += sign * step;
          const double dd = torus_distance_sq(from_fractional(s), origin);
          if (dd > best) {
            best = dd;
            arg = s;
            improved = true;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    diameter_ = std::sqrt(best);
  }
}

Eigen::MatrixXd Manifold::dual_generators() const {
  require(!is_sphere(), "dual lattice is defined for tori only");
  return gen_inv_.transpose();
}

std::string Manifold::label() const {
  if (is_sphere()) return "S2";
  std::ostringstream os;
  os << "T" << dim_;
  if (!rectangular_ || !gen_.isIdentity()) {
    os << "[";
    for (int j = 0; j < dim_; ++j) {
      for (int i = 0; i < dim_; ++i) {
        if (i + j > 0) os << ",";
        os << gen_(i, j);
      }
    }
    os << "]";
  }
  return os.str();
}

void Manifold::validate(const Point& p) const {
  const int n = is_sphere() ? 3 : dim_;
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(p[i])) throw InvalidInput("point has non-finite coordinates");
  }
}

Point Manifold::canonical(Point p) const {
  validate(p);
  if (is_sphere()) {
    const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    require(n > 0.0, "sphere point must be nonzero");
    for (int i = 0; i < 3; ++i) p[i] /= n;
    return p;
  }
  auto s = to_fractional(p);
  for (int i = 0; i < dim_; ++i) {
    double& v = s[static_cast<std::size_t>(i)];
    v -= std::floor(v);
    if (v >= 1.0) v = 0.0;
  }
  return from_fractional(s);
}

Point Manifold::from_fractional(const std::array<double, kMaxDim>& s) const {
  Point p;
  for (int i = 0; i < dim_; ++i) {
    double v = 0.0;
    for (int j = 0; j < dim_; ++j) v += gen_(i, j) * s[static_cast<std::size_t>(j)];
    p[i] = v;
  }
  return p;
}

std::array<double, kMaxDim> Manifold::to_fractional(const Point& p) const {
  std::array<double, kMaxDim> s{};
  for (int i = 0; i < dim_; ++i) {
    double v = 0.0;
    for (int j = 0; j < dim_; ++j) v += gen_inv_(i, j) * p[j];
    s[static_cast<std::size_t>(i)] = v;
  }
  return s;
}

double Manifold::torus_distance_sq(const Point& a, const Point& b) const {
  if (rectangular_) {
    double sum = 0.0;
    for (int i = 0; i < dim_; ++i) {
      const double per = period_[static_cast<std::size_t>(i)];
      double d = std::abs(a[i] - b[i]);
      d = d <= per ? std::min(d, per - d) : std::abs(d - per * std::round(d / per));
      sum += d * d;
    }
    return sum;
  }
  std::array<double, kMaxDim> delta{};
  for (int i = 0; i < dim_; ++i) delta[static_cast<std::size_t>(i)] = a[i] - b[i];
  std::array<double, kMaxDim> s{};
  for (int i = 0; i < dim_; ++i) {
    double v = 0.0;
    for (int j = 0; j < dim_; ++j) v += reduced_inv_(i, j) * delta[static_cast<std::size_t>(j)];
    s[static_cast<std::size_t>(i)] = v - std::round(v);
  }
  const int r = shift_radius_;
  const int k2max = dim_ == 3 ? r : 0;
  double best = std::numeric_limits<double>::infinity();
  for (int k0 = -r; k0 <= r; ++k0) {
    for (int k1 = -r; k1 <= r; ++k1) {
      for (int k2 = -k2max; k2 <= k2max; ++k2) {
        const double f[3] = {s[0] + k0, s[1] + k1, s[2] + k2};
        double sum = 0.0;
        for (int i = 0; i < dim_; ++i) {
          double v = 0.0;
          for (int j = 0; j < dim_; ++j) v += reduced_(i, j) * f[j];
          sum += v * v;
        }
        best = std::min(best, sum);
      }
    }
  }
  return best;
}

double geodesic_distance(const Manifold& m, const Point& x, const Point& y) {
  m.validate(x);
  m.validate(y);
  return m.distance(x, y);
}

Point uniform_sample(const Manifold& m, Rng& rng) {
  if (m.is_sphere()) {
    for (;;) {
      Point p{{standard_normal(rng), standard_normal(rng), standard_normal(rng)}};
      const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      if (n > 1e-300) {
        for (int i = 0; i < 3; ++i) p[i] /= n;
        return p;
      }
    }
  }
  std::array<double, kMaxDim> s{};
  for (int i = 0; i < m.dim(); ++i) s[static_cast<std::size_t>(i)] = uniform01(rng);
  return m.from_fractional(s);
}

// ---------------------------------------------------------------------------
// Spherical rectangle geometry

double sphere_rect_farthest(const Point& p, double theta_lo, double theta_hi, double phi_lo,
                            double phi_hi) {
  double tp, pp;
  sphere_angles(p, tp, pp);
  double best = 0.0;
  auto candidate = [&](double theta, double phi) {
    best = std::max(best, Manifold::sphere_distance(p, sphere_point(theta, phi)));
  };
  for (double t : {theta_lo, theta_hi})
    for (double f : {phi_lo, phi_hi}) candidate(t, f);
  // Parallel edges: distance grows with the longitude gap up to π.
  const double anti = wrap_above(pp + M_PI, phi_lo);
  if (anti <= phi_hi) {
    if (M_PI - tp >= theta_lo && M_PI - tp <= theta_hi) return M_PI;
    candidate(theta_lo, anti);
    candidate(theta_hi, anti);
  }
  // Meridian edges: cos d(θ) = A cos θ + B sin θ is minimized at atan2(B, A) + π.
  for (double f : {phi_lo, phi_hi}) {
    const double a = std::cos(tp);
    const double b = std::sin(tp) * std::cos(f - pp);
    double t = std::atan2(b, a) + M_PI;
    t = std::fmod(t, kTwoPi);
    if (t >= theta_lo && t <= theta_hi) candidate(t, f);
  }
  return best;
}

double sphere_rect_diameter(double theta_lo, double theta_hi, double phi_lo, double phi_hi) {
  const double gap = std::min(phi_hi - phi_lo, M_PI);
  if (gap == M_PI && theta_lo <= M_PI / 2 && theta_hi >= M_PI / 2) return M_PI;
  double best = theta_hi - theta_lo;
  for (double dphi : {0.0, gap}) {
    const double c = std::cos(dphi);
    auto dist = [&](double ta, double tb) {
      return Manifold::sphere_distance(sphere_point(ta, 0.0), sphere_point(tb, dphi));
    };
    for (double ta : {theta_lo, theta_hi})
      for (double tb : {theta_lo, theta_hi}) best = std::max(best, dist(ta, tb));
    for (double tb : {theta_lo, theta_hi}) {
      double t = std::atan2(std::sin(tb) * c, std::cos(tb)) + M_PI;
      t = std::fmod(t, kTwoPi);
      if (t >= theta_lo && t <= theta_hi) best = std::max(best, dist(t, tb));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Partitions

Partition equal_area_partition(const Manifold& m, std::size_t n) {
  require(n >= 1, "partition size must be at least 1");
  Partition part(m);
  if (m.is_sphere()) {
    part.build_sphere(n);
  } else {
    part.build_torus(n);
  }
  return part;
}

void Partition::build_sphere(std::size_t n) {
  std::vector<std::size_t> counts;
  if (n == 1) {
    counts = {1};
  } else if (n == 2) {
    counts = {1, 1};
  } else {
    // Recursive zonal equal-area construction: polar caps of one cell each and
    // collars whose sector counts follow the ideal collar areas with carried
    // rounding discrepancy.
    const double nd = static_cast<double>(n);
    const double cap = 2.0 * std::asin(1.0 / std::sqrt(nd));
    const double ideal_angle = std::sqrt(4.0 * M_PI / nd);
    const auto collars =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround((M_PI - 2.0 * cap) / ideal_angle)));
    const double fit_angle = (M_PI - 2.0 * cap) / static_cast<double>(collars);
    auto cap_cells = [&](double theta) { return nd * (1.0 - std::cos(theta)) / 2.0; };
    counts.push_back(1);
    double carry = 0.0;
    for (std::size_t i = 0; i < collars; ++i) {
      const double top = cap + static_cast<double>(i) * fit_angle;
      const double ideal = cap_cells(top + fit_angle) - cap_cells(top);
      const auto rounded = static_cast<long long>(std::llround(ideal + carry));
      carry += ideal - static_cast<double>(rounded);
      if (rounded > 0) counts.push_back(static_cast<std::size_t>(rounded));
    }
    counts.push_back(1);
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (total != n) {
      // Carry rounding always closes the count; guard against float drift.
      auto& mid = counts[counts.size() / 2];
      mid = static_cast<std::size_t>(static_cast<long long>(mid) + static_cast<long long>(n) -
                                     static_cast<long long>(total));
    }
  }

  const double nd = static_cast<double>(n);
  std::size_t cum = 0;
  for (std::size_t zi = 0; zi < counts.size(); ++zi) {
    Zone z;
    z.first = cum;
    z.count = counts[zi];
    z.z_hi = 1.0 - 2.0 * static_cast<double>(cum) / nd;
    cum += counts[zi];
    z.z_lo = zi + 1 == counts.size() ? -1.0 : 1.0 - 2.0 * static_cast<double>(cum) / nd;
    zones_.push_back(z);
  }

  cells_.reserve(n);
  boxes_.reserve(n);
  for (const Zone& z : zones_) {
    const double theta_lo = std::acos(std::clamp(z.z_hi, -1.0, 1.0));
    const double theta_hi = std::acos(std::clamp(z.z_lo, -1.0, 1.0));
    const double width = kTwoPi / static_cast<double>(z.count);
    // Cells within a collar are congruent; compute the geometry once.
    const double diameter = sphere_rect_diameter(theta_lo, theta_hi, 0.0, width);
    Point center;
    if (z.count == 1 && z.z_hi == 1.0) {
      center = Point{{0.0, 0.0, 1.0}};
    } else if (z.count == 1 && z.z_lo == -1.0) {
      center = Point{{0.0, 0.0, -1.0}};
    } else {
      center = sphere_point(std::acos(0.5 * (z.z_hi + z.z_lo)), 0.5 * width);
    }
    const double radius = sphere_rect_farthest(center, theta_lo, theta_hi, 0.0, width);
    double center_theta, center_phi;
    sphere_angles(center, center_theta, center_phi);
    if (z.count == 1) center_phi = 0.0;
    for (std::size_t s = 0; s < z.count; ++s) {
      const double phi0 = static_cast<double>(s) * width;
      Cell cell;
      cell.center = sphere_point(center_theta, center_phi + phi0);
      if (z.count == 1) cell.center = center;
      cell.volume = 0.5 * (z.z_hi - z.z_lo) / static_cast<double>(z.count);
      cell.diameter = diameter;
      cell.radius = radius;
      cells_.push_back(cell);
      Box box;
      box.lo = {z.z_lo, phi0, 0.0};
      box.hi = {z.z_hi, phi0 + width, 0.0};
      boxes_.push_back(box);
    }
  }
}

void Partition::build_torus(std::size_t n) {
  const int d = manifold_.dim();
  std::array<double, kMaxDim> lo{0.0, 0.0, 0.0};
  std::array<double, kMaxDim> hi{1.0, 1.0, 1.0};
  root_.axis = d - 1;
  cells_.reserve(n);
  boxes_.reserve(n);
  build_slab(root_, lo, hi, 0, n);
}

void Partition::build_slab(Slab& slab, std::array<double, kMaxDim> lo, std::array<double, kMaxDim> hi,
                           std::size_t first, std::size_t count) {
  const auto axis = static_cast<std::size_t>(slab.axis);
  slab.lo = lo[axis];
  slab.hi = hi[axis];
  slab.first = first;
  slab.count = count;
  if (slab.axis == 0) {
    const Manifold& m = manifold_;
    const int d = m.dim();
    for (std::size_t i = 0; i < count; ++i) {
      Box box{lo, hi};
      box.lo[0] = lo[0] + (hi[0] - lo[0]) * static_cast<double>(i) / static_cast<double>(count);
      box.hi[0] = lo[0] + (hi[0] - lo[0]) * static_cast<double>(i + 1) / static_cast<double>(count);
      std::array<double, kMaxDim> mid{};
      std::array<double, kMaxDim> half{};
      double volume = 1.0;
      for (int k = 0; k < d; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        mid[kk] = 0.5 * (box.lo[kk] + box.hi[kk]);
        half[kk] = 0.5 * (box.hi[kk] - box.lo[kk]);
        volume *= box.hi[kk] - box.lo[kk];
      }
      Cell cell;
      cell.center = m.from_fractional(mid);
      cell.volume = volume;
      if (m.rectangular()) {
        double r2 = 0.0;
        double d2 = 0.0;
        for (int k = 0; k < d; ++k) {
          const auto kk = static_cast<std::size_t>(k);
          const double per = std::abs(m.generators()(k, k));
          r2 += std::pow(per * half[kk], 2);
          d2 += std::pow(per * std::min(2.0 * half[kk], 0.5), 2);
        }
        cell.radius = std::sqrt(r2);
        cell.diameter = std::sqrt(d2);
      } else {
        // Euclidean corner bounds, capped by the torus diameter.
        double r = 0.0;
        for (int mask = 0; mask < (1 << d); ++mask) {
          std::array<double, kMaxDim> corner{};
          for (int k = 0; k < d; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            corner[kk] = ((mask >> k) & 1) ? half[kk] : -half[kk];
          }
          const Point c = m.from_fractional(corner);
          double n2 = 0.0;
          for (int k = 0; k < d; ++k) n2 += c[k] * c[k];
          r = std::max(r, std::sqrt(n2));
        }
        cell.radius = std::min(r, m.diameter());
        cell.diameter = std::min(2.0 * r, m.diameter());
      }
      cells_.push_back(cell);
      boxes_.push_back(box);
    }
    return;
  }
  const double root = std::pow(static_cast<double>(count), 1.0 / static_cast<double>(slab.axis + 1));
  const std::size_t slabs = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(root)), 1, count);
  const std::size_t base = count / slabs;
  const std::size_t extra = count % slabs;
  std::size_t cum = 0;
  slab.children.resize(slabs);
  for (std::size_t i = 0; i < slabs; ++i) {
    const std::size_t cnt = base + (i >= slabs - extra ? 1 : 0);
    auto clo = lo;
    auto chi = hi;
    clo[axis] = lo[axis] + (hi[axis] - lo[axis]) * static_cast<double>(cum) / static_cast<double>(count);
    chi[axis] = i + 1 == slabs ? hi[axis]
                               : lo[axis] + (hi[axis] - lo[axis]) * static_cast<double>(cum + cnt) /
                                                static_cast<double>(count);
    slab.cuts.push_back(chi[axis]);
    slab.children[i].axis = slab.axis - 1;
    build_slab(slab.children[i], clo, chi, first + cum, cnt);
    cum += cnt;
  }
}

std::size_t Partition::locate_slab(const Slab& slab, const std::array<double, kMaxDim>& s) const {
  if (slab.axis == 0) {
    const double t = (s[0] - slab.lo) / (slab.hi - slab.lo);
    const auto idx = static_cast<long long>(std::floor(t * static_cast<double>(slab.count)));
    return slab.first + static_cast<std::size_t>(std::clamp<long long>(idx, 0, static_cast<long long>(slab.count) - 1));
  }
  const double v = s[static_cast<std::size_t>(slab.axis)];
  auto it = std::upper_bound(slab.cuts.begin(), slab.cuts.end(), v);
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - slab.cuts.begin()), slab.children.size() - 1);
  return locate_slab(slab.children[idx], s);
}

std::size_t Partition::locate(const Point& p) const {
  if (manifold_.is_sphere()) {
    const double z = p[2];
    auto it = std::find_if(zones_.begin(), zones_.end(), [&](const Zone& zone) { return z >= zone.z_lo; });
    if (it == zones_.end()) --it;
    double phi = std::atan2(p[1], p[0]);
    if (phi < 0.0) phi += kTwoPi;
    auto sector = static_cast<std::size_t>(phi / kTwoPi * static_cast<double>(it->count));
    sector = std::min(sector, it->count - 1);
    return it->first + sector;
  }
  const Point c = manifold_.canonical(p);
  auto s = manifold_.to_fractional(c);
  for (int i = 0; i < manifold_.dim(); ++i) {
    double& v = s[static_cast<std::size_t>(i)];
    v = std::clamp(v - std::floor(v), 0.0, std::nextafter(1.0, 0.0));
  }
  return locate_slab(root_, s);
}

Point Partition::sample_in_cell(std::size_t index, Rng& rng) const {
  require(index < cells_.size(), "cell index out of range");
  const Box& box = boxes_[index];
  if (manifold_.is_sphere()) {
    const double z = box.lo[0] + (box.hi[0] - box.lo[0]) * uniform01(rng);
    const double phi = box.lo[1] + (box.hi[1] - box.lo[1]) * uniform01(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Point{{r * std::cos(phi), r * std::sin(phi), z}};
  }
  std::array<double, kMaxDim> s{};
  for (int i = 0; i < manifold_.dim(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    s[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * uniform01(rng);
  }
  return manifold_.from_fractional(s);
}

double Partition::max_diameter() const {
  double r = 0.0;
  for (const Cell& c : cells_) r = std::max(r, c.diameter);
  return r;
}

double Partition::max_radius() const {
  double r = 0.0;
  for (const Cell& c : cells_) r = std::max(r, c.radius);
  return r;
}

double Partition::diameter_constant() const {
  return max_diameter() * std::pow(static_cast<double>(cells_.size()), 1.0 / manifold_.dim());
}

QuadratureTarget quadrature_target(const Manifold& m, std::size_t count) {
  const Partition part = equal_area_partition(m, count);
  QuadratureTarget target;
  target.nodes.reserve(count);
  for (const Cell& c : part.cells()) target.nodes.push_back(c.center);
  target.weights.assign(count, 1.0 / static_cast<double>(count));
  target.q = part.max_radius();
  return target;
}

}  // namespace ppw
