#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ppw/lattice.hpp"
#include "ppw/manifold.hpp"
#include "ppw/rng.hpp"

namespace ppw {

using Complex = std::complex<double>;

/// Real spherical harmonics of degree ≤ L at a unit vector, orthonormal for
/// the normalized surface measure. Entry ℓ² + ℓ + m holds Y_ℓ^m, m ∈ [−ℓ, ℓ];
/// m > 0 carries cos(mφ), m < 0 carries sin(|m|φ).
void real_spherical_harmonics(int L, const Point& x, std::span<double> out);
std::vector<double> real_spherical_harmonics(int L, const Point& x);

namespace ensemble {

struct Harmonic {
  Manifold manifold;
  double L = 0.0;
  LatticeNorm norm;
  // Torus frequencies with ‖k‖ ≤ L; for the real basis, `half` lists one of
  // each ±k pair (k ≠ 0).
  std::shared_ptr<const std::vector<IntVec>> frequencies;
  std::shared_ptr<const std::vector<IntVec>> half;
};
struct Spherical {
  std::size_t n = 1;
};
struct GafZeros {
  std::size_t n = 1;
  // Coefficients indexed 1..N instead of 0..N.
  bool start_at_one = false;
};
struct Jittered {
  Manifold manifold;
  std::size_t n = 1;
  std::shared_ptr<const Partition> partition;
};
struct Iid {
  Manifold manifold;
  std::size_t n = 1;
};

}  // namespace ensemble

/// A point-process definition. Immutable; derived tables are shared.
class EnsembleSpec {
 public:
  using Variant = std::variant<ensemble::Harmonic, ensemble::Spherical, ensemble::GafZeros,
                               ensemble::Jittered, ensemble::Iid>;

  /// Sphere: degree floor(L). Torus: ‖k‖_p ≤ L on the standard torus, the
  /// dual-basis norm ‖G^{-T}k‖₂ on a general lattice (p must then be 2).
  static EnsembleSpec harmonic(const Manifold& m, double L, double p = 2.0);
  static EnsembleSpec harmonic(const Manifold& m, double L, const LatticeNorm& norm);
  static EnsembleSpec spherical(std::size_t n);
  static EnsembleSpec gaf_zeros(std::size_t n, bool start_at_one = false);
  static EnsembleSpec jittered(const Manifold& m, std::size_t n);
  static EnsembleSpec iid(const Manifold& m, std::size_t n);

  const Variant& variant() const { return v_; }
  template <typename T>
  const T* as() const {
    return std::get_if<T>(&v_);
  }

  std::size_t N() const { return n_; }
  const Manifold& manifold() const { return m_; }
  bool is_projection() const;
  bool has_kernel() const;
  /// Short identifier, e.g. "harmonic_S2_L3" or "spherical".
  std::string label() const;

 private:
  EnsembleSpec(Variant v, Manifold m, std::size_t n) : v_(std::move(v)), m_(std::move(m)), n_(n) {}
  Variant v_;
  Manifold m_;
  std::size_t n_;
};

/// Orthonormal basis {f_m(x)} of the projection space (Harmonic, Jittered).
/// Torus harmonics are the exponentials e^{2πi⟨j,x⟩} in frequency order.
std::vector<Complex> basis_eval(const EnsembleSpec& spec, const Point& x);

/// A real orthonormal basis of the same space, used by the sampler.
/// Torus: 1, √2 cos(2π⟨j,x⟩), √2 sin(2π⟨j,x⟩) over one of each ±j pair.
void real_basis_eval(const EnsembleSpec& spec, const Point& x, std::span<double> out);

Complex kernel_eval(const EnsembleSpec& spec, const Point& x, const Point& y);

/// |K(x,y)| without phase; for the spherical ensemble N·cos(d/2)^{N−1}.
double kernel_abs(const EnsembleSpec& spec, const Point& x, const Point& y);

/// max over uniform samples x of |K(x,x) − N|.
double kernel_diag_check(const EnsembleSpec& spec, std::size_t samples, Rng& rng);

/// Inverse stereographic projection z → (2u, 2v, |z|²−1)/(|z|²+1).
Point lift_stereographic(Complex z);
/// Stereographic chart from the north pole: f(x) = (x₀ + i x₁)/(1 − x₂).
Complex stereographic(const Point& x);

}  // namespace ppw
