#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ppw/manifold.hpp"
#include "ppw/pointset.hpp"

namespace ppw {

enum class Solver { Exact, Entropic };

std::string to_string(Solver s);
Solver solver_from_string(const std::string& s);

struct PlanEntry {
  int source = 0;
  int sink = 0;
  double mass = 0.0;
};

struct OTResult {
  /// Optimal (exact) or rounded-primal (entropic) cost, in squared-distance units.
  double value = 0.0;
  Solver solver = Solver::Exact;
  /// Entropic: primal − dual (c-transform) ≥ 0. Exact: 0.
  double duality_gap = 0.0;
  /// Lower bound certified by a feasible dual (equals value for exact).
  double dual_value = 0.0;
  /// min reduced cost over all arcs under the final potentials (exact).
  double min_reduced_cost = 0.0;
  /// max |plan marginal − weight|.
  double marginal_error = 0.0;
  std::uint64_t iterations = 0;
  bool fell_back = false;
  std::vector<PlanEntry> plan;
};

struct OTOptions {
  Solver solver = Solver::Exact;
  /// Largest N·M for the dense exact solver before falling back to entropic.
  std::size_t exact_limit = std::size_t{1} << 24;
  /// Final entropic regularization relative to the largest cost.
  double epsilon = 1e-3;
  /// Stop each ε stage once the L1 marginal error drops below this.
  double tolerance = 1e-7;
  int max_iterations = 20000;
};

/// Discrete OT between weights a (rows) and b (columns) of a cost matrix.
OTResult solve_discrete_ot(const Eigen::MatrixXd& cost, const std::vector<double>& a,
                           const std::vector<double>& b, const OTOptions& opts = {});

/// Log-domain ε-scaling Sinkhorn on a dense cost matrix.
OTResult sinkhorn(const Eigen::MatrixXd& cost, const std::vector<double>& a, const std::vector<double>& b,
                  const OTOptions& opts = {});

struct W2Estimate {
  /// √(OT cost to the quantized target).
  double value = 0.0;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  std::size_t M = 0;
  Solver solver = Solver::Exact;
  double duality_gap = 0.0;
  double q = 0.0;
  double min_reduced_cost = 0.0;
  std::uint64_t pivots = 0;
  std::size_t columns = 0;
  int rounds = 0;
  bool fell_back = false;
  /// Set when M < N.
  bool undersampled_target = false;
};

struct W2Options {
  Solver solver = Solver::Exact;
  /// Largest N·M solved exactly by column generation.
  std::size_t exact_limit = std::size_t{1} << 27;
  OTOptions entropic;
};

/// W₂ between the empirical measure of `points` and the volume form via an
/// M-node quantized target.
W2Estimate w2_to_volume(const Manifold& m, std::span<const Point> points, const QuadratureTarget& target,
                        const W2Options& opts = {});
W2Estimate w2_to_volume(const Manifold& m, std::span<const Point> points, std::size_t M,
                        const W2Options& opts = {});
W2Estimate w2_to_volume(const PointSet& ps, std::size_t M, const W2Options& opts = {});

/// Ball-volume constant c with Vol B(x,δ) ≤ c·δ^d.
double ball_volume_constant(const Manifold& m);
/// max over δ ∈ (0, diam/2] of δ(1 − N c δ^d); lower bound for W₁ ≤ W₂.
double w1_packing_lower_bound(std::size_t N, const Manifold& m);

}  // namespace ppw
