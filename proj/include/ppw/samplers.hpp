#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "ppw/kernels.hpp"
#include "ppw/pointset.hpp"
#include "ppw/rng.hpp"

namespace ppw {

struct HkpvOptions {
  /// Envelope grid size; the grid holds max(grid_min, grid_per_point·N) nodes.
  std::size_t grid_min = 10000;
  std::size_t grid_per_point = 10;
  double safety = 1.2;
  /// Re-draws with safety ×1.5 after an envelope violation, at most this often.
  int max_recalibrations = 3;
};

/// Sequential (HKPV) sampler for projection DPPs. The envelope grid and the
/// basis values on it are computed once and shared by every draw.
class ProjectionSampler {
 public:
  explicit ProjectionSampler(const EnsembleSpec& spec, HkpvOptions opts = {});

  const EnsembleSpec& spec() const { return spec_; }
  PointSet draw(Rng& rng, std::uint64_t seed = 0) const;

 private:
  // One attempt; returns false on an envelope violation.
  bool attempt(Rng& rng, double safety, std::vector<Point>& out, std::uint64_t& proposals) const;

  EnsembleSpec spec_;
  HkpvOptions opts_;
  std::shared_ptr<const Eigen::MatrixXd> grid_basis_;  // G × N
};

PointSet sample_projection_dpp(const EnsembleSpec& spec, Rng& rng, std::uint64_t seed = 0);
PointSet sample_spherical_ensemble(std::size_t N, Rng& rng, std::uint64_t seed = 0);
PointSet sample_gaf_zeros(std::size_t N, Rng& rng, std::uint64_t seed = 0, bool start_at_one = false);
PointSet sample_iid(const Manifold& m, std::size_t N, Rng& rng, std::uint64_t seed = 0);

enum class RootMethod { Auto, Companion, Aberth };

struct RootResult {
  std::vector<std::complex<double>> roots;
  /// max over roots of |f(z)|/‖f‖ (reversed polynomial for |z| > 1).
  double max_residual = 0.0;
};

/// All roots of Σ c_n z^n, c_N ≠ 0, followed by Newton polishing. Auto uses
/// the balanced companion matrix for degree ≤ 256 and Aberth iteration above.
RootResult polynomial_roots(const std::vector<std::complex<double>>& coeffs, RootMethod method = RootMethod::Auto);

/// Draws any ensemble; `seed` seeds the stream and is recorded.
PointSet sample(const EnsembleSpec& spec, std::uint64_t seed);

/// Sampler bound to a spec; reuses precomputed tables across draws.
class Sampler {
 public:
  explicit Sampler(const EnsembleSpec& spec);
  const EnsembleSpec& spec() const { return spec_; }
  PointSet draw(std::uint64_t seed) const;

 private:
  EnsembleSpec spec_;
  std::shared_ptr<const ProjectionSampler> hkpv_;
};

}  // namespace ppw
