#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppw/errors.hpp"
#include "ppw/kernels.hpp"
#include "ppw/manifold.hpp"
#include "ppw/samplers.hpp"
#include "ppw/statistics.hpp"
#include "ppw/transport.hpp"

namespace ppw {

inline constexpr const char* kVersion = PPW_VERSION;
inline constexpr int kCsvSchemaVersion = 1;

/// Thrown for malformed config or CSV input; the message names the file and line.
class ParseError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// One `[name arg]` block of a key=value file. Keys keep file order.
struct ConfigSection {
  std::string name;
  std::string arg;
  int line = 0;
  std::vector<std::pair<std::string, std::string>> entries;
  std::vector<int> entry_lines;
};

/// Flat key=value text with `[section]` or `[section arg]` headers and `#`
/// comments. Entries before the first header land in an unnamed section.
std::vector<ConfigSection> parse_key_value(std::istream& in, const std::string& source);

/// S2, T2, T3, T2-hex (hexagonal lattice), or Td[g11,g21,...] with the
/// generator matrix listed column by column.
Manifold parse_manifold(const std::string& s);

/// An ensemble family with the parameter values to sweep: degrees L for
/// harmonic ensembles, point counts N otherwise.
struct EnsembleEntry {
  std::string kind;  // harmonic | spherical | gaf | jittered | iid
  std::vector<double> schedule;
  std::string norm = "2";  // harmonic on tori: 1 | 2 | inf; general lattices use the dual norm
  bool start_at_one = false;

  EnsembleSpec make(const Manifold& m, double value) const;
};

struct ExperimentConfig {
  std::string manifold_name = "S2";
  Manifold manifold = Manifold::sphere2();
  std::vector<EnsembleEntry> ensembles;
  std::size_t replicas = 20;
  std::uint64_t master_seed = 1;
  double m_mult = 64.0;
  Solver solver = Solver::Exact;
  bool entropic_fallback = true;
  std::size_t threads = 1;
  std::string out = "ppw_out";
  bool bound = false;
  double K_M = 0.0;
  /// Share of replicas re-solved at 4M, limited to instances with N·4M ≤ bias_limit.
  double bias_fraction = 0.1;
  std::size_t bias_limit = std::size_t{1} << 24;

  /// Canonical key=value text; parsing it back yields the same config.
  std::string echo() const;
};

ExperimentConfig parse_experiment(std::istream& in, const std::string& source);
ExperimentConfig load_experiment(const std::string& path);

struct SweepRecord {
  std::string ensemble;
  std::string manifold;
  std::size_t N = 0;
  std::size_t replica = 0;
  std::uint64_t seed = 0;
  double w2 = 0.0;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  std::size_t M = 0;
  double runtime_ms = 0.0;
  std::string solver;
  std::optional<double> bound;
  std::optional<double> t_star;
  std::optional<double> w2_4m;
  /// "ok" or the error that aborted the row.
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

std::string csv_header();
std::string to_csv_row(const SweepRecord& r);
std::vector<SweepRecord> read_sweep_csv(std::istream& in, const std::string& source);

/// Ensemble label without the harmonic degree, so one family spans all N.
std::string family_label(const EnsembleSpec& spec);

/// Seed of replica `r` of the (ensemble label, N) cell.
std::uint64_t replica_seed(std::uint64_t master, const std::string& label, std::size_t r);

/// Samples, measures and optionally bounds one replica; errors become the status.
SweepRecord run_replica(const ExperimentConfig& cfg, const EnsembleSpec& spec, std::size_t replica,
                        const Sampler& sampler);

struct SummaryRow {
  std::string ensemble;
  std::string manifold;
  std::size_t N = 0;
  std::size_t replicas = 0;
  std::size_t failed = 0;
  double mean_w2 = 0.0;
  double stderr_w2 = 0.0;
  double mean_bracket_low = 0.0;
  double mean_bracket_high = 0.0;
  std::optional<double> mean_bound;
  std::optional<double> median_t_star;
  /// Mean of w2_4m/w2 − 1 over re-solved replicas.
  std::optional<double> bias_4m;
  std::optional<double> slope_pure;
  std::optional<double> sse_pure;
  std::optional<double> slope_log;
  std::optional<double> sse_log;
};

/// Per (ensemble, N) means in first-appearance order, with both rate fits
/// per ensemble when at least 4 distinct N values exist.
std::vector<SummaryRow> summarize(const std::vector<SweepRecord>& records);
std::string summary_header();
std::string to_csv_row(const SummaryRow& r);
std::vector<SummaryRow> read_summary_csv(std::istream& in, const std::string& source);

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<SummaryRow> summary;
};

using ProgressFn = std::function<void(const SweepRecord&)>;

/// Runs every (ensemble, value, replica) cell with cfg.threads workers.
/// Writes config.txt, version.txt, data.csv and summary.csv into `out_dir`
/// unless it is empty; throws std::runtime_error on write failure.
SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& out_dir, const ProgressFn& progress = {});

/// Slope window for an ensemble label, if the acceptance criteria fix one.
std::optional<std::pair<double, double>> slope_window(const std::string& ensemble);

struct ReportOutcome {
  std::string text;
  /// 0 report written, 3 no data.
  int exit_code = 0;
};

/// Plain-text report of fitted slopes and window verdicts.
ReportOutcome render_report(const std::vector<SummaryRow>& summary);
/// Log-log scatter of mean W₂ against N with the pure-power fit line.
std::string render_svg(const std::vector<SummaryRow>& summary, const std::string& title);

/// Reads summary.csv in `dir`, writes report.txt and one SVG per ensemble plus
/// all.svg.
ReportOutcome emit_outputs(const std::string& dir);

/// "%.17g"; empty for unset values.
std::string fmt17(double v);
std::string fmt17(const std::optional<double>& v);

}  // namespace ppw
