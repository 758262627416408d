// Runs the acceptance criteria and prints one PASS or FAIL line per criterion.
// Environment overrides: PPW_SEED, PPW_ACCEPT_REPLICAS, PPW_ACCEPT_MC_REPLICAS,
// PPW_ACCEPT_ONLY, PPW_ACCEPT_THREADS, PPW_ACCEPT_OUT.

#include <iostream>

#include "acceptance.hpp"

int main(int argc, char** argv) {
  ppw::acceptance::Options base;
  if (argc > 1) base.out_dir = argv[1];
  std::vector<ppw::acceptance::Verdict> verdicts;
  try {
    verdicts = ppw::acceptance::run_acceptance(ppw::acceptance::options_from_env(base), std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << "\n";
    return 2;
  }
  int failed = 0;
  for (const auto& v : verdicts) {
    std::cout << ppw::acceptance::format_verdict(v) << "\n";
    failed += v.pass ? 0 : 1;
  }
  std::cout << (verdicts.size() - failed) << " of " << verdicts.size() << " criteria passed\n";
  return failed ? 1 : 0;
}
