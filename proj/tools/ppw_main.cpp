// ppw: sampling, transport, bounds and sweeps from the command line.
//
// Exit codes: 0 success, 1 runtime or write failure, 2 invalid arguments,
// 3 no data to report, 4 malformed config or CSV, 5 acceptance criteria failed.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "acceptance.hpp"
#include "ppw/experiment.hpp"
#include "ppw/lattice.hpp"
#include "ppw/spectral.hpp"

namespace {

using namespace ppw;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 4;
constexpr int kExitAcceptance = 5;

struct EnsembleArgs {
  std::string manifold = "S2";
  std::string kind = "harmonic";
  double param = 3.0;
  std::string norm = "2";
  bool start_at_one = false;

  void add(CLI::App* app) {
    app->add_option("--manifold", manifold, "S2, T2, T3, T2-hex or Td[...]")->capture_default_str();
    app->add_option("--ensemble", kind, "harmonic, spherical, gaf, jittered or iid")->capture_default_str();
    app->add_option("--param", param, "degree L (harmonic) or point count N")->capture_default_str();
    app->add_option("--norm", norm, "torus harmonic norm: 1, 2 or inf")->capture_default_str();
    app->add_flag("--start-at-one", start_at_one, "GAF sum from n = 1");
  }

  EnsembleSpec make() const {
    EnsembleEntry e;
    e.kind = kind;
    e.norm = norm;
    e.start_at_one = start_at_one;
    return e.make(parse_manifold(manifold), param);
  }
};

// --seed beats PPW_SEED, which beats the fallback.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* v = std::getenv("PPW_SEED"); v && *v) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v, &end, 10);
    if (*end != '\0') throw InvalidInput("PPW_SEED must be a nonnegative integer");
    return x;
  }
  return fallback;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  return file;
}

void finish(std::ofstream& file, const std::string& path) {
  if (!file.is_open()) {
    std::cout.flush();
    if (!std::cout) throw std::runtime_error("failed to write standard output");
    return;
  }
  file.flush();
  if (!file) throw std::runtime_error("failed to write " + path);
}

void print_warnings(const PointSet& ps) {
  for (const auto& [k, v] : ps.metadata) {
    if (k.find("warning") != std::string::npos) std::cerr << "warning: " << k << ": " << v << "\n";
  }
}

int cmd_sample(const EnsembleArgs& ea, std::optional<std::uint64_t> seed, const std::string& out) {
  const EnsembleSpec spec = ea.make();
  const PointSet ps = Sampler(spec).draw(resolve_seed(seed, 1));
  print_warnings(ps);
  std::ofstream file;
  std::ostream& os = open_out(out, file);
  const int dim = spec.manifold().is_sphere() ? 3 : spec.manifold().dim();
  os << (dim == 2 ? "x,y" : "x,y,z") << "\n";
  for (const Point& p : ps.points) {
    for (int i = 0; i < dim; ++i) os << (i ? "," : "") << fmt17(p[i]);
    os << "\n";
  }
  finish(file, out);
  return 0;
}

int cmd_w2(const EnsembleArgs& ea, std::optional<std::uint64_t> seed, double m_mult, const std::string& solver) {
  const EnsembleSpec spec = ea.make();
  const PointSet ps = Sampler(spec).draw(resolve_seed(seed, 1));
  print_warnings(ps);
  W2Options opts;
  opts.solver = solver_from_string(solver);
  const auto M = static_cast<std::size_t>(std::ceil(m_mult * double(ps.size())));
  const W2Estimate w = w2_to_volume(ps, M, opts);
  std::cout << "ensemble " << spec.label() << "\nN " << ps.size() << "\nM " << w.M << "\nw2 " << fmt17(w.value)
            << "\nbracket_low " << fmt17(w.bracket_low) << "\nbracket_high " << fmt17(w.bracket_high) << "\nsolver "
            << to_string(w.solver) << (w.fell_back ? " (fallback)" : "") << "\npacking_lower_bound "
            << fmt17(w1_packing_lower_bound(ps.size(), spec.manifold())) << "\n";
  return 0;
}

int cmd_bound(const EnsembleArgs& ea, std::optional<std::uint64_t> seed, double K_M, std::optional<double> t) {
  const EnsembleSpec spec = ea.make();
  const PointSet ps = Sampler(spec).draw(resolve_seed(seed, 1));
  print_warnings(ps);
  SmoothingBoundConfig cfg;
  cfg.K_M = K_M;
  SmoothingBound b;
  if (t) {
    cfg.t = *t;
    b = smoothing_bound(ps, cfg);
  } else {
    b = optimize_smoothing_time(ps, cfg);
  }
  std::cout << "ensemble " << spec.label() << "\nN " << ps.size() << "\nbound " << fmt17(b.value) << "\nt " << fmt17(b.t)
            << "\nl_max " << b.l_max << "\nsmoothing_term " << fmt17(b.smoothing_term) << "\nhead " << fmt17(b.head)
            << "\ntail " << fmt17(b.tail) << "\n";
  return 0;
}

int cmd_variance(const EnsembleArgs& ea, std::optional<std::uint64_t> seed, int ell, const std::string& freq,
                 std::size_t replicas) {
  const EnsembleSpec spec = ea.make();
  const Manifold& m = spec.manifold();
  TestFunction f;
  std::string name;
  if (m.is_sphere()) {
    if (ell < 0) throw InvalidInput("--ell must be nonnegative");
    f = [ell](const Point& p) { return std::sqrt(2.0 * ell + 1.0) * legendre_P(ell, p[2]); };
    name = "sqrt(2l+1) P_l(z), l=" + std::to_string(ell);
  } else {
    std::vector<double> k;
    std::stringstream ss(freq);
    for (std::string item; std::getline(ss, item, ',');) k.push_back(std::stod(item));
    if (k.size() != static_cast<std::size_t>(m.dim())) throw InvalidInput("--freq needs one integer per torus axis");
    f = [k, m](const Point& p) {
      const auto s = m.to_fractional(p);
      double ph = 0.0;
      for (std::size_t i = 0; i < k.size(); ++i) ph += k[i] * s[i];
      return std::sqrt(2.0) * std::cos(2.0 * std::numbers::pi * ph);
    };
    name = "sqrt(2) cos(2 pi <k,x>), k=" + freq;
  }
  std::cout << "ensemble " << spec.label() << "\nfunction " << name << "\n";
  try {
    const ExactVariance ex = variance_exact(spec, f);
    std::cout << "exact " << fmt17(ex.value) << "\nrefinement_delta " << fmt17(ex.refinement_delta) << "\n";
  } catch (const UnsupportedVariant&) {
    std::cout << "exact unsupported\n";
  }
  if (replicas > 0) {
    const VarianceEstimate mc = variance_mc(spec, f, replicas, resolve_seed(seed, 1));
    std::cout << "mc_variance " << fmt17(mc.variance) << "\nmc_variance_stderr " << fmt17(mc.variance_stderr)
              << "\nmc_mean " << fmt17(mc.mean) << "\nmc_mean_stderr " << fmt17(mc.mean_stderr) << "\nreplicas "
              << mc.replicas << "\n";
  }
  return 0;
}

int cmd_lattice(const std::string& norm_name, const std::string& manifold, double radius, int dim,
                const std::string& k_text, bool gauss) {
  LatticeNorm norm = LatticeNorm::p_norm(2);
  if (!manifold.empty()) {
    const Manifold m = parse_manifold(manifold);
    if (m.is_sphere()) throw InvalidInput("lattice norms live on tori");
    norm = LatticeNorm::dual_basis(m.dual_generators());
    dim = m.dim();
  } else {
    norm = LatticeNorm::p_norm(norm_name == "inf" ? std::numeric_limits<double>::infinity() : std::stod(norm_name));
  }
  std::cout << "count " << count_ball(norm, radius, dim) << "\n";
  if (!k_text.empty()) {
    IntVec k{0, 0, 0};
    std::stringstream ss(k_text);
    int i = 0;
    for (std::string item; std::getline(ss, item, ',');) {
      if (i >= dim) throw InvalidInput("--k has more entries than the dimension");
      k[static_cast<std::size_t>(i++)] = std::stoll(item);
    }
    if (i != dim) throw InvalidInput("--k needs one entry per dimension");
    std::cout << "annulus_difference " << annulus_difference_count(norm, k, radius, dim) << "\n";
  }
  if (gauss) {
    const GaussCircleCheck g = gauss_circle_check(radius);
    std::cout << "gauss_count " << g.count << "\ngauss_error " << fmt17(g.error) << "\ngauss_bound " << fmt17(g.bound)
              << "\ngauss_holds " << (g.holds ? "true" : "false") << "\n";
  }
  return 0;
}

int cmd_fit(const std::string& data) {
  std::ifstream in(data, std::ios::binary);
  if (!in) throw ParseError("cannot open " + data);
  const std::vector<SummaryRow> summary = summarize(read_sweep_csv(in, data));
  if (summary.empty()) {
    std::cout << "no data\n";
    return 3;
  }
  std::cout << summary_header() << "\n";
  for (const SummaryRow& r : summary) std::cout << to_csv_row(r) << "\n";
  return 0;
}

int cmd_plot(const std::string& dir) {
  const ReportOutcome out = emit_outputs(dir);
  std::cout << out.text;
  return out.exit_code;
}

int cmd_sweep(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out,
              std::optional<std::size_t> threads, const std::string& solver, std::optional<double> m_mult) {
  ExperimentConfig cfg = load_experiment(config);
  cfg.master_seed = resolve_seed(seed, cfg.master_seed);
  if (!out.empty()) cfg.out = out;
  if (threads) cfg.threads = std::max<std::size_t>(1, *threads);
  if (!solver.empty()) cfg.solver = solver_from_string(solver);
  if (m_mult) {
    if (!(*m_mult >= 1.0)) throw InvalidInput("--m-mult must be at least 1");
    cfg.m_mult = *m_mult;
  }
  std::size_t n = 0;
  run_sweep(cfg, cfg.out, [&](const SweepRecord& r) {
    ++n;
    std::cerr << "[" << n << "] " << r.ensemble << " N=" << r.N << " replica " << r.replica << " "
              << (r.ok() ? "w2=" + fmt17(r.w2) : r.status) << "\n";
  });
  const ReportOutcome rep = emit_outputs(cfg.out);
  std::cout << rep.text;
  return rep.exit_code;
}

int cmd_accept(std::optional<std::uint64_t> seed, std::optional<std::size_t> threads, const std::string& out,
               const std::string& only) {
  acceptance::Options opts = acceptance::options_from_env();
  if (seed) opts.seed = *seed;
  if (threads) opts.threads = std::max<std::size_t>(1, *threads);
  if (!out.empty()) opts.out_dir = out;
  if (!only.empty()) {
    opts.only.clear();
    std::stringstream ss(only);
    for (std::string item; std::getline(ss, item, ',');) {
      const int id = std::stoi(item);
      if (id < 1 || id > 13) throw InvalidInput("--only entries must lie in 1..13");
      opts.only.insert(id);
    }
  }
  const auto verdicts = acceptance::run_acceptance(opts, std::cerr);
  bool all = true;
  for (const auto& v : verdicts) {
    std::cout << acceptance::format_verdict(v) << "\n";
    all &= v.pass;
  }
  return all ? 0 : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point processes on the sphere and flat tori: sampling, W2 to the volume form, bounds and sweeps"};
  app.set_version_flag("--version", std::string("ppw ") + ppw::kVersion);
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<double> m_mult_opt;
  std::string out, config, solver, dir, data, only;
  double m_mult = 64.0, K_M = 0.0, radius = 3.0;
  std::optional<double> t;
  int ell = 1, dim = 2;
  std::string freq = "1,0", norm_name = "2", lattice_manifold, k_text;
  std::size_t replicas = 2000;
  bool gauss = false;

  EnsembleArgs sample_args, w2_args, bound_args, var_args;

  auto* sample = app.add_subcommand("sample", "Draw one configuration and print its coordinates as CSV");
  sample_args.add(sample);
  sample->add_option("--seed", seed, "seed (overrides PPW_SEED)");
  sample->add_option("--out", out, "output file (default stdout)");

  auto* w2 = app.add_subcommand("w2", "W2 between one sample and the volume form");
  w2_args.add(w2);
  w2->add_option("--seed", seed, "seed (overrides PPW_SEED)");
  w2->add_option("--m-mult", m_mult, "target nodes per point")->capture_default_str();
  w2->add_option("--solver", solver, "exact or entropic")->default_val("exact");

  auto* bound = app.add_subcommand("bound", "Smoothing upper bound for one sample, optimized over t");
  bound_args.add(bound);
  bound->add_option("--seed", seed, "seed (overrides PPW_SEED)");
  bound->add_option("--K-M", K_M, "curvature constant")->capture_default_str();
  bound->add_option("--t", t, "fixed smoothing time instead of the optimum");

  auto* variance = app.add_subcommand("variance", "Variance of a linear statistic, exact and Monte Carlo");
  var_args.add(variance);
  variance->add_option("--seed", seed, "seed (overrides PPW_SEED)");
  variance->add_option("--ell", ell, "degree of the zonal test function on S2")->capture_default_str();
  variance->add_option("--freq", freq, "integer frequency of the cosine test function on tori")->capture_default_str();
  variance->add_option("--replicas", replicas, "Monte Carlo replicas (0 for exact only)")->capture_default_str();

  auto* lattice = app.add_subcommand("lattice", "Lattice point counts in norm balls");
  lattice->add_option("--p", norm_name, "p-norm exponent or inf")->capture_default_str();
  lattice->add_option("--manifold", lattice_manifold, "use the dual-basis norm of this torus instead");
  lattice->add_option("--radius", radius, "ball radius")->capture_default_str();
  lattice->add_option("--dim", dim, "dimension (2 or 3)")->capture_default_str();
  lattice->add_option("--k", k_text, "shift vector for the annulus difference count, e.g. 1,0");
  lattice->add_flag("--gauss", gauss, "Gauss circle error check at the radius");

  auto* sweep = app.add_subcommand("sweep", "Run a configured sweep and write CSV, SVG and report outputs");
  sweep->add_option("--config", config, "config file")->required();
  sweep->add_option("--seed", seed, "master seed (overrides PPW_SEED and the config)");
  sweep->add_option("--out", out, "output directory (overrides the config)");
  sweep->add_option("--threads", threads, "worker threads");
  sweep->add_option("--solver", solver, "exact or entropic");
  sweep->add_option("--m-mult", m_mult_opt, "target nodes per point");

  auto* fit = app.add_subcommand("fit", "Summarize a data CSV and fit both rate models");
  fit->add_option("--data", data, "data.csv from a sweep")->required();

  auto* plot = app.add_subcommand("plot", "Write report.txt and SVG plots from summary.csv");
  plot->add_option("--dir", dir, "sweep output directory")->required();

  auto* accept = app.add_subcommand("accept", "Run the acceptance suite");
  accept->add_option("--seed", seed, "master seed (overrides PPW_SEED)");
  accept->add_option("--threads", threads, "worker threads");
  accept->add_option("--out", out, "directory for sweep outputs");
  accept->add_option("--only", only, "comma list of criteria to run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sample) return cmd_sample(sample_args, seed, out);
    if (*w2) return cmd_w2(w2_args, seed, m_mult, solver);
    if (*bound) return cmd_bound(bound_args, seed, K_M, t);
    if (*variance) return cmd_variance(var_args, seed, ell, freq, replicas);
    if (*lattice) return cmd_lattice(norm_name, lattice_manifold, radius, dim, k_text, gauss);
    if (*sweep) return cmd_sweep(config, seed, out, threads, solver, m_mult_opt);
    if (*fit) return cmd_fit(data);
    if (*plot) return cmd_plot(dir);
    if (*accept) return cmd_accept(seed, threads, out, only);
  } catch (const ppw::ParseError& e) {
    std::cerr << "ppw: " << e.what() << "\n";
    return kExitParse;
  } catch (const ppw::InvalidInput& e) {
    std::cerr << "ppw: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ppw: invalid number: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "ppw: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
