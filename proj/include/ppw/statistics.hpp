#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppw/kernels.hpp"
#include "ppw/pointset.hpp"
#include "ppw/spectral.hpp"

namespace ppw {

/// S_ℓ = Σ_{n,n'} Z_ℓ(x_n, x_n') = Σ_{φ∈E_ℓ} |Σ_n φ(x_n)|².
double eigenspace_statistic(const Spectrum& spec, std::span<const Point> points, std::size_t l);
double eigenspace_statistic(const PointSet& ps, std::size_t l);

/// S_ℓ for every eigenspace of `spec`, index-aligned with the spectrum.
/// Sphere values come from Legendre pair sums, torus values from character
/// sums |Σ_n e^{2πi⟨j,x_n⟩}|².
std::vector<double> eigenspace_profile(const Spectrum& spec, std::span<const Point> points);

enum class TailMode { WeylBound };

struct SmoothingBoundConfig {
  double K_M = 0.0;
  double t = 0.0;
  /// Truncation index; unset picks the smallest ℓ with λ̃_ℓ·t ≥ 40, capped so
  /// that about 64N eigenfunctions enter the head sum.
  std::optional<std::size_t> l_max;
  TailMode tail_mode = TailMode::WeylBound;
};

struct SmoothingBound {
  double value = 0.0;
  double t = 0.0;
  std::size_t l_max = 0;
  /// √(d·t + K_M·t^{3/2})
  double smoothing_term = 0.0;
  /// Σ_{1≤ℓ≤ℓmax} e^{−λ̃t}/λ̃·S_ℓ and the over-bound of the rest, both before the 1/N² factor.
  double head = 0.0;
  double tail = 0.0;
};

/// Evaluates the smoothing inequality for one configuration, caching S_ℓ
/// across smoothing times.
class SmoothingEvaluator {
 public:
  SmoothingEvaluator(const Manifold& m, std::vector<Point> points);

  SmoothingBound bound(const SmoothingBoundConfig& cfg);
  /// Truncation index used when cfg.l_max is unset.
  std::size_t default_l_max(double t);
  std::size_t size() const { return points_.size(); }

 private:
  void ensure_shells(std::size_t count);
  void ensure_radius(double radius);
  double tail_bound(std::size_t l_max, double t) const;

  Manifold m_;
  std::vector<Point> points_;
  std::optional<Spectrum> spec_;
  std::vector<double> S_;
  double cap_ = 0.0;  // degree (sphere) or |j| radius (torus)
  double mu_ = 0.0;   // covering radius bound of the dual lattice
};

SmoothingBound smoothing_bound(const PointSet& ps, const SmoothingBoundConfig& cfg);

/// Minimizes the bound over log t ∈ [log N^{−2}, 0]: a 20-point log grid
/// followed by golden-section search around the best grid point. cfg.t is ignored.
SmoothingBound optimize_smoothing_time(SmoothingEvaluator& ev, const SmoothingBoundConfig& cfg = {});
SmoothingBound optimize_smoothing_time(const PointSet& ps, const SmoothingBoundConfig& cfg = {});

using TestFunction = std::function<double(const Point&)>;

struct ExactVariance {
  double value = 0.0;
  /// |value − value on a grid with a quarter of the nodes|
  double refinement_delta = 0.0;
  std::size_t M = 0;
};

/// ½∬|f(x) − f(y)|²|K(x,y)|² by product quadrature over an equal-area grid of
/// M ≤ 4000 nodes.
ExactVariance variance_exact(const EnsembleSpec& spec, const TestFunction& f, std::size_t M = 4000);

struct VarianceEstimate {
  double mean = 0.0;
  double mean_stderr = 0.0;
  double variance = 0.0;
  /// Jackknife standard error of `variance`.
  double variance_stderr = 0.0;
  std::size_t replicas = 0;
};

/// Mean and variance of Σ_n f(x_n) over independent replicas with seeds
/// derive_seed(seed, r).
VarianceEstimate variance_mc(const EnsembleSpec& spec, const TestFunction& f, std::size_t replicas,
                             std::uint64_t seed);
/// Σ_k Var(Σ_n f_k(x_n)); `mean` is Σ_k of the means.
VarianceEstimate summed_variance_mc(const EnsembleSpec& spec, const std::vector<TestFunction>& fs,
                                    std::size_t replicas, std::uint64_t seed);
/// Same estimate from replica values values[r][k].
VarianceEstimate summed_variance(const std::vector<std::vector<double>>& values);

/// (2ℓ+1)·(ℓ(ℓ+1))²·π²/(6N)
double gaf_variance_bound(int l, std::size_t N);

enum class RateModel { PurePower, PowerWithSqrtLog };
std::string to_string(RateModel m);
RateModel rate_model_from_string(const std::string& s);

struct RatePoint {
  double N = 0.0;
  double w2 = 0.0;
};

struct RateFit {
  RateModel model = RateModel::PurePower;
  double slope = 0.0;
  double intercept = 0.0;
  double residual_sse = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  std::vector<double> residuals;
};

/// Least squares on log W = γ log N + c, or log(W/√log N) = γ log N + c.
RateFit fit_rate(std::span<const RatePoint> records, RateModel model);

}  // namespace ppw
