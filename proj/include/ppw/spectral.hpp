#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ppw/lattice.hpp"
#include "ppw/manifold.hpp"

namespace ppw {

/// Legendre polynomial P_ℓ(u); u is clamped to [−1, 1].
double legendre_P(int l, double u);
/// P_0(u), …, P_lmax(u) in one recurrence pass.
std::vector<double> legendre_all(int lmax, double u);
/// Jacobi polynomial P_L^{(α,β)}(u), α, β > −1.
double jacobi_P(int L, double alpha, double beta, double u);

struct EigenspaceDescriptor {
  int index = 0;
  double eigenvalue = 0.0;
  long long multiplicity = 1;
};

/// A dual-lattice frequency: integer coefficients k and Cartesian j = G^{-T}k.
struct Frequency {
  IntVec k{};
  std::array<double, kMaxDim> j{};
};

/// Laplacian eigenspaces of a manifold below a cutoff. On the sphere the
/// eigenspaces are indexed by degree; on a torus eigenspace ℓ is the ℓ-th
/// shell of equal |j| among dual-lattice vectors. Immutable and cheap to copy.
class Spectrum {
 public:
  /// Sphere: degrees 0..cutoff. Torus: every shell with |j|₂ ≤ cutoff.
  Spectrum(const Manifold& m, double cutoff);

  const Manifold& manifold() const { return m_; }
  std::size_t size() const { return shells_->size(); }
  const EigenspaceDescriptor& operator[](std::size_t l) const { return (*shells_)[l]; }
  const std::vector<EigenspaceDescriptor>& shells() const { return *shells_; }
  /// Members of torus shell ℓ (empty span on the sphere).
  std::span<const Frequency> members(std::size_t l) const;
  /// Every frequency up to the cutoff, grouped shell by shell (torus only).
  const std::vector<Frequency>& frequencies() const { return *freqs_; }
  double cutoff() const { return cutoff_; }

 private:
  Manifold m_;
  double cutoff_ = 0.0;
  std::shared_ptr<const std::vector<EigenspaceDescriptor>> shells_;
  std::shared_ptr<const std::vector<Frequency>> freqs_;
  std::shared_ptr<const std::vector<std::size_t>> offsets_;
};

/// Reproducing kernel of eigenspace ℓ under the normalized volume.
double eigenspace_kernel_Z(const Spectrum& spec, std::size_t l, const Point& x, const Point& y);

struct SzegoQuantities {
  double k = 0.0;
  double bound_quantity = 0.0;
};

/// k(θ) = π^{−1/2}(sin θ/2)^{−α−1/2}(cos θ/2)^{−β−1/2} and
/// L·(sin θ/2)^{2α+1}(cos θ/2)^{2β+1}·P_L^{(α,β)}(cos θ)², for 0 < θ < π.
SzegoQuantities szego_quantities(int L, double alpha, double beta, double theta);

/// Default envelope constant for the manifold (calibrated, see below).
double hormander_constant(const Manifold& m);
/// C·N/(1 + N^{1/d} r).
double hormander_envelope(double N, int d, double r, double C);

/// max over a grid of |K_L(x,y)|·(1 + N^{1/d} d(x,y))/N for the harmonic
/// kernel of degree L (Euclidean frequency ball on a torus). On the sphere
/// the grid holds `grid` geodesic distances; on a torus a grid^(1/d)-per-axis
/// lattice of displacement vectors.
double calibrate_hormander_constant(const Manifold& m, double L, int grid);

}  // namespace ppw
