#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace ppw {

using IntVec = std::array<long long, 3>;

/// A norm on integer vectors: either a p-norm, p ∈ [1, ∞], or the pull-back
/// ‖k‖ = ‖B k‖₂ of the Euclidean norm through a basis B (columns v, w, …) of
/// a dual lattice.
class LatticeNorm {
 public:
  enum class Kind { PNorm, DualBasis };

  static LatticeNorm p_norm(double p);
  static LatticeNorm dual_basis(const Eigen::MatrixXd& basis);

  Kind kind() const { return kind_; }
  double p() const { return p_; }
  const Eigen::MatrixXd& basis() const { return basis_; }

  double operator()(const IntVec& k, int dim) const;
  /// Largest sup-norm of an integer vector with norm ≤ radius (box half-width).
  long long box_radius(double radius, int dim) const;

 private:
  Kind kind_ = Kind::PNorm;
  double p_ = 2.0;
  Eigen::MatrixXd basis_;
  double min_singular_ = 1.0;
};

/// Number of integer vectors j ∈ Z^dim with ‖j‖ ≤ radius.
std::int64_t count_ball(const LatticeNorm& norm, double radius, int dim);

/// Integer vectors with ‖j‖ ≤ radius, ordered lexicographically.
std::vector<IntVec> enumerate_ball(const LatticeNorm& norm, double radius, int dim);

/// #{ j : ‖j‖ ≤ L and ‖j − k‖ > L }, the lattice points of B̄(0,L) \ B̄(k,L).
std::int64_t annulus_difference_count(const LatticeNorm& norm, const IntVec& k, double radius, int dim);

struct GaussCircleCheck {
  std::int64_t count = 0;  // F(r)
  double error = 0.0;      // F(r) − πr²
  double bound = 0.0;      // 2√2·π·r
  bool holds = false;      // |E(r)| ≤ bound
};

GaussCircleCheck gauss_circle_check(double r);

}  // namespace ppw
