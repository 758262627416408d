#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ppw/kernels.hpp"
#include "ppw/manifold.hpp"

namespace ppw {

/// A sampled configuration with the spec and seed that produced it.
struct PointSet {
  std::vector<Point> points;
  EnsembleSpec spec;
  std::uint64_t seed = 0;
  /// Sampler diagnostics: rejection counts, retries, warnings.
  std::map<std::string, std::string> metadata;

  const Manifold& manifold() const { return spec.manifold(); }
  std::size_t size() const { return points.size(); }
};

}  // namespace ppw
