#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppw/rng.hpp"

namespace ppw {

inline constexpr int kMaxDim = 3;

/// A point of a supported manifold. Sphere points are unit 3-vectors; torus
/// points are Cartesian coordinates inside the fundamental domain G·[0,1)^d,
/// unused trailing coordinates are zero.
struct Point {
  std::array<double, kMaxDim> x{};

  double operator[](int i) const { return x[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return x[static_cast<std::size_t>(i)]; }
  bool operator==(const Point&) const = default;
};

enum class ManifoldKind { Sphere2, Torus };

/// The unit 2-sphere or a flat torus R^d / Γ, d ∈ {2, 3}, where Γ is spanned by
/// the columns of a generator matrix G. Volume is normalized to one.
class Manifold {
 public:
  static Manifold sphere2();
  static Manifold torus(int dim);
  static Manifold torus(const Eigen::MatrixXd& generators);

  ManifoldKind kind() const { return kind_; }
  bool is_sphere() const { return kind_ == ManifoldKind::Sphere2; }
  int dim() const { return dim_; }
  /// Generators of Γ as matrix columns (identity for the standard torus).
  const Eigen::MatrixXd& generators() const { return gen_; }
  /// Generators of the dual lattice Γ* = G^{-T} Z^d.
  Eigen::MatrixXd dual_generators() const;
  /// True if G is diagonal, i.e. the torus is a product of circles.
  bool rectangular() const { return rectangular_; }
  /// Maximal geodesic distance between two points.
  double diameter() const { return diameter_; }
  std::string label() const;

  /// Throws InvalidInput for non-finite coordinates.
  void validate(const Point& p) const;
  /// Canonical representative: renormalized sphere vector or wrapped torus point.
  Point canonical(Point p) const;

  Point from_fractional(const std::array<double, kMaxDim>& s) const;
  std::array<double, kMaxDim> to_fractional(const Point& p) const;

  /// Geodesic distance without input validation (hot path).
  double distance(const Point& a, const Point& b) const {
    return is_sphere() ? sphere_distance(a, b) : std::sqrt(torus_distance_sq(a, b));
  }
  double distance_sq(const Point& a, const Point& b) const {
    if (is_sphere()) {
      const double d = sphere_distance(a, b);
      return d * d;
    }
    return torus_distance_sq(a, b);
  }

  static double sphere_distance(const Point& a, const Point& b) {
    const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    const double cx = a[1] * b[2] - a[2] * b[1];
    const double cy = a[2] * b[0] - a[0] * b[2];
    const double cz = a[0] * b[1] - a[1] * b[0];
    return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
  }

 private:
  Manifold() = default;
  double torus_distance_sq(const Point& a, const Point& b) const;
  void finish_torus_setup();

  ManifoldKind kind_ = ManifoldKind::Sphere2;
  int dim_ = 2;
  bool rectangular_ = true;
  double diameter_ = M_PI;
  Eigen::MatrixXd gen_;
  Eigen::MatrixXd gen_inv_;
  // Reduced basis of Γ used for minimum-image searches, and its inverse.
  Eigen::MatrixXd reduced_;
  Eigen::MatrixXd reduced_inv_;
  std::array<double, kMaxDim> period_{1.0, 1.0, 1.0};
  int shift_radius_ = 1;
};

/// Geodesic distance with input validation.
double geodesic_distance(const Manifold& m, const Point& x, const Point& y);

/// One point distributed according to the normalized volume.
Point uniform_sample(const Manifold& m, Rng& rng);

struct Cell {
  Point center;
  double volume = 0.0;
  /// Geodesic diameter of the cell.
  double diameter = 0.0;
  /// Maximal distance from `center` to a point of the cell.
  double radius = 0.0;
};

/// Equal-volume partition. Sphere cells are zonal latitude–longitude
/// rectangles (z-range × φ-range); torus cells are boxes in fractional
/// coordinates.
class Partition {
 public:
  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  const Manifold& manifold() const { return manifold_; }

  /// Index of the cell containing `p`.
  std::size_t locate(const Point& p) const;
  /// Uniform point inside cell `index`.
  Point sample_in_cell(std::size_t index, Rng& rng) const;

  double max_diameter() const;
  double max_radius() const;
  /// Diameter constant C of the construction: max_diameter · N^{1/d}.
  double diameter_constant() const;

 private:
  friend Partition equal_area_partition(const Manifold& m, std::size_t n);

  struct Box {
    std::array<double, kMaxDim> lo{};
    std::array<double, kMaxDim> hi{};
  };
  // Sphere: one zone per collar (z decreasing), each split into equal sectors.
  struct Zone {
    double z_hi = 1.0;
    double z_lo = -1.0;
    std::size_t first = 0;
    std::size_t count = 1;
  };
  // Torus: slabs along the last axis, recursively.
  struct Slab {
    int axis = 0;
    double lo = 0.0;
    double hi = 1.0;
    std::size_t first = 0;
    std::size_t count = 1;
    // Upper boundaries of the children along `axis`.
    std::vector<double> cuts;
    std::vector<Slab> children;
  };

  explicit Partition(Manifold m) : manifold_(std::move(m)) {}
  void build_sphere(std::size_t n);
  void build_torus(std::size_t n);
  void build_slab(Slab& slab, std::array<double, kMaxDim> lo, std::array<double, kMaxDim> hi,
                  std::size_t first, std::size_t count);
  std::size_t locate_slab(const Slab& slab, const std::array<double, kMaxDim>& s) const;

  Manifold manifold_;
  std::vector<Cell> cells_;
  std::vector<Zone> zones_;
  std::vector<Box> boxes_;
  Slab root_;
};

/// Partition of `m` into `n` cells of volume 1/n each.
Partition equal_area_partition(const Manifold& m, std::size_t n);

/// Quantized stand-in for the volume form: `nodes` are cell centers of an
/// equal-area partition with weight 1/M each; `q` bounds W₂(Vol, target).
struct QuadratureTarget {
  std::vector<Point> nodes;
  std::vector<double> weights;
  double q = 0.0;
};

QuadratureTarget quadrature_target(const Manifold& m, std::size_t count);

/// Maximal geodesic distance from `p` to a latitude–longitude rectangle
/// θ ∈ [theta_lo, theta_hi], φ ∈ [phi_lo, phi_hi] (polar angle θ from the north pole).
double sphere_rect_farthest(const Point& p, double theta_lo, double theta_hi, double phi_lo,
                            double phi_hi);
/// Geodesic diameter of the same rectangle.
double sphere_rect_diameter(double theta_lo, double theta_hi, double phi_lo, double phi_hi);

Point sphere_point(double theta, double phi);

}  // namespace ppw
