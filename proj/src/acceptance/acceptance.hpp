#pragma once
// Acceptance harness: every criterion prints one PASS or FAIL line.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ppw::acceptance {

struct Options {
  std::uint64_t seed = 20240601;
  std::size_t threads = 1;
  /// Replaces every sweep's replica count when set.
  std::optional<std::size_t> replicas;
  /// Replaces the 2000 Monte Carlo replicas of the variance and lattice checks.
  std::optional<std::size_t> mc_replicas;
  /// Criteria to run; empty runs all 13. Sweeps other criteria depend on run anyway.
  std::set<int> only;
  /// Sweep output root (one directory per sweep); empty keeps results in memory.
  std::string out_dir;
};

/// Applies PPW_SEED, PPW_ACCEPT_REPLICAS, PPW_ACCEPT_MC_REPLICAS,
/// PPW_ACCEPT_ONLY (comma list), PPW_ACCEPT_THREADS and PPW_ACCEPT_OUT.
Options options_from_env(Options base = {});

struct Verdict {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
};

/// One line: "PASS  7  title: detail".
std::string format_verdict(const Verdict& v);

/// Runs the selected criteria in order, writing progress to `log`.
std::vector<Verdict> run_acceptance(const Options& opts, std::ostream& log);

}  // namespace ppw::acceptance
