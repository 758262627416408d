#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ppw/experiment.hpp"

using namespace ppw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ppw_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

// Data rows with the runtime column (10th field) blanked.
std::vector<std::string> without_runtime(const std::string& csv) {
  std::vector<std::string> out;
  for (const std::string& l : lines(csv)) {
    std::vector<std::string> f;
    std::string cur;
    bool q = false;
    for (char c : l) {
      if (c == '"') q = !q;
      if (c == ',' && !q) {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(cur);
    if (f.size() > 9) f[9].clear();
    std::string joined;
    for (const auto& s : f) joined += s + "|";
    out.push_back(joined);
  }
  return out;
}

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment(in, "test.conf");
}

std::string parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

const char* kSmall = R"(
# comment line
[run]
manifold = S2
seed = 42
replicas = 2
m_mult = 8
bound = true   # trailing comment

[ensemble harmonic]
L = 1, 2

[ensemble gaf]
N = 4
start_at_one = true
)";

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("config parses, echoes and re-parses to the same text") {
    const ExperimentConfig cfg = parse(kSmall);
    CHECK(cfg.master_seed == 42);
    CHECK(cfg.replicas == 2);
    CHECK(cfg.m_mult == 8.0);
    CHECK(cfg.bound);
    REQUIRE(cfg.ensembles.size() == 2);
    CHECK(cfg.ensembles[0].schedule == std::vector<double>{1.0, 2.0});
    CHECK(cfg.ensembles[1].start_at_one);
    const std::string echo = cfg.echo();
    const ExperimentConfig again = parse(echo);
    CHECK(again.echo() == echo);
    CHECK(again.ensembles[1].kind == "gaf");
  }

  TEST_CASE("config errors name file and line") {
    CHECK(parse_error("[run]\nmanifold = S2\nbogus = 1\n[ensemble iid]\nN = 4\n").find("test.conf:3:") != std::string::npos);
    CHECK(parse_error("[run]\n[weird]\n").find("test.conf:2:") != std::string::npos);
    CHECK(parse_error("[ensemble nope]\nN = 3\n").find("unknown ensemble") != std::string::npos);
    CHECK(parse_error("[ensemble iid]\nN = 3\nN = 4\n").find("duplicate") != std::string::npos);
    CHECK(parse_error("[ensemble iid]\n").find("needs a nonempty N") != std::string::npos);
    CHECK(parse_error("[run]\nreplicas = -1\n[ensemble iid]\nN = 3\n").find("test.conf:2:") != std::string::npos);
    CHECK(parse_error("[run]\nmanifold = T2\n[ensemble gaf]\nN = 3\n").find("S2") != std::string::npos);
    CHECK(parse_error("[run]\nmanifold = T2-hex\n[ensemble harmonic]\nL = 3\nnorm = inf\n").find("dual") !=
          std::string::npos);
    CHECK(parse_error("[run]\nmanifold = S2\n").find("no [ensemble") != std::string::npos);
  }

  TEST_CASE("manifold names") {
    CHECK(parse_manifold("S2").is_sphere());
    CHECK(parse_manifold("T3").dim() == 3);
    CHECK(std::abs(parse_manifold("T2-hex").generators().determinant()) == doctest::Approx(std::sqrt(3.0) / 2.0));
    const Manifold g = parse_manifold("T2[2, 0, 1, 1]");
    CHECK(g.generators()(0, 0) == 2.0);
    CHECK(g.generators()(0, 1) == 1.0);
    CHECK(g.generators()(1, 0) == 0.0);
    CHECK_THROWS_AS(parse_manifold("T2[1,0,0]"), ParseError);
    CHECK_THROWS_AS(parse_manifold("K3"), ParseError);
  }

  TEST_CASE("sweep CSV round trip keeps every field bit for bit") {
    SweepRecord a;
    a.ensemble = "harmonic_T2[1,0,0.5,0.8660254037844386]_dual";
    a.manifold = "T2-hex";
    a.N = 13;
    a.replica = 4;
    a.seed = 18446744073709551557ULL;
    a.w2 = 0.1 + 0.2;
    a.bracket_low = 1.0 / 3.0;
    a.bracket_high = 2.0 / 3.0;
    a.M = 832;
    a.runtime_ms = 12.5;
    a.solver = "exact";
    a.bound = std::nextafter(0.5, 1.0);
    a.t_star = 1e-300;
    SweepRecord b = a;
    b.replica = 5;
    b.status = "error: bad \"thing\", with comma";
    b.solver.clear();
    b.bound.reset();
    b.t_star.reset();
    std::stringstream ss;
    ss << csv_header() << "\n" << to_csv_row(a) << "\n" << to_csv_row(b) << "\n";
    const auto back = read_sweep_csv(ss, "mem.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].ensemble == a.ensemble);
    CHECK(back[0].seed == a.seed);
    CHECK(back[0].w2 == a.w2);
    CHECK(back[0].bracket_low == a.bracket_low);
    CHECK(back[0].bound == a.bound);
    CHECK(back[0].t_star == a.t_star);
    CHECK(!back[0].w2_4m);
    CHECK(back[0].ok());
    CHECK(back[1].status == b.status);
    CHECK(!back[1].ok());
    CHECK(!back[1].bound);
    CHECK(to_csv_row(back[0]) == to_csv_row(a));
    CHECK(to_csv_row(back[1]) == to_csv_row(b));
  }

  TEST_CASE("malformed CSV names the row") {
    std::stringstream short_row;
    short_row << csv_header() << "\n" << "iid_S2,S2,4,0,1,0.5,0.4,0.6,32,1,exact,,,,ok\n" << "iid_S2,S2,4\n";
    try {
      read_sweep_csv(short_row, "data.csv");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("data.csv: row 3") != std::string::npos);
    }
    std::stringstream bad_num;
    bad_num << summary_header() << "\n" << "gaf,S2,4,2,0,abc,0,0,0,,,,,,,\n";
    try {
      read_summary_csv(bad_num, "summary.csv");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
      CHECK(std::string(e.what()).find("abc") != std::string::npos);
    }
    std::stringstream bad_header("ensemble,N\n");
    CHECK_THROWS_AS(read_sweep_csv(bad_header, "x.csv"), ParseError);
  }

  TEST_CASE("replica seeds are deterministic and distinct") {
    std::set<std::uint64_t> seen;
    for (const char* label : {"gaf", "spherical", "harmonic_S2_L3"})
      for (std::size_t r = 0; r < 50; ++r) seen.insert(replica_seed(7, label, r));
    CHECK(seen.size() == 150);
    CHECK(replica_seed(7, "gaf", 3) == replica_seed(7, "gaf", 3));
    CHECK(replica_seed(7, "gaf", 3) != replica_seed(8, "gaf", 3));
  }

  TEST_CASE("one replica of one size gives exactly one data row") {
    ExperimentConfig cfg = parse("[run]\nreplicas = 1\nm_mult = 8\n[ensemble harmonic]\nL = 2\n");
    const fs::path dir = scratch("one_row");
    const SweepResult res = run_sweep(cfg, dir.string());
    REQUIRE(res.records.size() == 1);
    CHECK(res.records[0].ok());
    CHECK(res.records[0].N == 9);
    CHECK(res.records[0].M == 72);
    const auto rows = lines(slurp(dir / "data.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == csv_header());
    CHECK(parse(slurp(dir / "config.txt")).echo() == cfg.echo());
    CHECK(slurp(dir / "version.txt").find(kVersion) != std::string::npos);
    CHECK(fs::exists(dir / "summary.csv"));
    fs::remove_all(dir);
  }

  TEST_CASE("same config and seed give identical data columns, with any thread count") {
    ExperimentConfig cfg = parse(kSmall);
    cfg.replicas = 3;
    const fs::path d1 = scratch("det1"), d2 = scratch("det2"), d3 = scratch("det3");
    run_sweep(cfg, d1.string());
    run_sweep(cfg, d2.string());
    cfg.threads = 3;
    run_sweep(cfg, d3.string());
    const auto a = without_runtime(slurp(d1 / "data.csv"));
    CHECK(a.size() == 1 + 3 * 3);
    CHECK(a == without_runtime(slurp(d2 / "data.csv")));
    CHECK(a == without_runtime(slurp(d3 / "data.csv")));
    CHECK(slurp(d1 / "summary.csv").size() > 0);
    cfg.master_seed = 43;
    cfg.threads = 1;
    const fs::path d4 = scratch("det4");
    run_sweep(cfg, d4.string());
    CHECK(a != without_runtime(slurp(d4 / "data.csv")));
    for (const auto& d : {d1, d2, d3, d4}) fs::remove_all(d);
  }

  TEST_CASE("row errors are recorded without aborting the sweep") {
    // 2048 points against 64·2048 nodes exceed the exact limit; no fallback allowed.
    ExperimentConfig cfg =
        parse("[run]\nreplicas = 2\nentropic_fallback = false\n[ensemble iid]\nN = 2048\n[ensemble harmonic]\nL = 1\n");
    cfg.m_mult = 64;
    const SweepResult res = run_sweep(cfg, "");
    REQUIRE(res.records.size() == 4);
    CHECK(!res.records[0].ok());
    CHECK(res.records[0].status.find("exact solver limit") != std::string::npos);
    CHECK(res.records[2].ok());
    REQUIRE(res.summary.size() == 2);
    CHECK(res.summary[0].failed == 2);
    CHECK(res.summary[0].replicas == 0);
    CHECK(res.summary[1].replicas == 2);
    std::stringstream ss;
    ss << csv_header() << "\n";
    for (const auto& r : res.records) ss << to_csv_row(r) << "\n";
    CHECK(read_sweep_csv(ss, "mem").size() == 4);
  }

  TEST_CASE("write failure raises") {
    ExperimentConfig cfg = parse("[run]\nreplicas = 1\n[ensemble iid]\nN = 4\n");
    const fs::path file = scratch("not_a_dir");
    { std::ofstream(file) << "x"; }
    CHECK_THROWS_AS(run_sweep(cfg, (file / "sub").string()), std::runtime_error);
    fs::remove_all(file);
  }

  TEST_CASE("summary means, standard errors and fits") {
    std::vector<SweepRecord> recs;
    for (std::size_t n : {4, 16, 64, 256}) {
      for (std::size_t r = 0; r < 2; ++r) {
        SweepRecord s;
        s.ensemble = "spherical";
        s.manifold = "S2";
        s.N = n;
        s.replica = r;
        s.w2 = (r ? 1.1 : 0.9) / std::sqrt(double(n));
        s.bracket_low = s.w2 / 2;
        s.bracket_high = s.w2 * 2;
        recs.push_back(s);
      }
    }
    const auto sum = summarize(recs);
    REQUIRE(sum.size() == 4);
    CHECK(sum[0].mean_w2 == doctest::Approx(0.5));
    CHECK(sum[0].stderr_w2 == doctest::Approx(0.05));
    REQUIRE(sum[0].slope_pure);
    CHECK(*sum[0].slope_pure == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(*sum[3].slope_pure == *sum[0].slope_pure);
    CHECK(*sum[0].sse_pure < 1e-25);
    std::stringstream ss;
    ss << summary_header() << "\n";
    for (const auto& r : sum) ss << to_csv_row(r) << "\n";
    const auto back = read_summary_csv(ss, "mem");
    REQUIRE(back.size() == 4);
    CHECK(to_csv_row(back[2]) == to_csv_row(sum[2]));
  }

  TEST_CASE("empty data gives 'no data' and a distinct exit code") {
    const ReportOutcome out = render_report({});
    CHECK(out.exit_code == 3);
    CHECK(out.text.find("no data") != std::string::npos);
    const fs::path dir = scratch("empty");
    fs::create_directories(dir);
    { std::ofstream(dir / "summary.csv") << summary_header() << "\n"; }
    CHECK(emit_outputs(dir.string()).exit_code == 3);
    CHECK(fs::exists(dir / "report.txt"));
    fs::remove_all(dir);
  }

  TEST_CASE("single N: no fit line and an 'insufficient N values' note") {
    SummaryRow r;
    r.ensemble = "gaf";
    r.manifold = "S2";
    r.N = 32;
    r.replicas = 5;
    r.mean_w2 = 0.3;
    const ReportOutcome out = render_report({r});
    CHECK(out.exit_code == 0);
    CHECK(out.text.find("insufficient N values") != std::string::npos);
    const std::string svg = render_svg({r}, "one size");
    CHECK(svg.find("<circle") != std::string::npos);
    CHECK(svg.find("<line") == std::string::npos);
  }

  TEST_CASE("slope windows") {
    CHECK(slope_window("harmonic_S2") == std::make_pair(-0.58, -0.42));
    CHECK(slope_window("gaf") == std::make_pair(-0.60, -0.40));
    CHECK(slope_window("harmonic_T2[1,0,0.5,0.8660254037844386]_dual") == std::make_pair(-0.60, -0.40));
    CHECK(slope_window("jittered_T3") == std::make_pair(-0.40, -0.27));
    CHECK(slope_window("iid_T2") == std::make_pair(-0.56, -0.44));
    CHECK(!slope_window("iid_S2"));
  }

  TEST_CASE("golden fixture: report reproduces the recorded verdicts byte for byte") {
    const fs::path src = fs::path(PPW_FIXTURE_DIR);
    const fs::path dir = scratch("golden");
    fs::create_directories(dir);
    fs::copy_file(src / "summary.csv", dir / "summary.csv");
    const ReportOutcome out = emit_outputs(dir.string());
    CHECK(out.exit_code == 0);
    CHECK(out.text == slurp(src / "expected_report.txt"));
    CHECK(slurp(dir / "report.txt") == slurp(src / "expected_report.txt"));
    CHECK(fs::exists(dir / "all.svg"));
    CHECK(fs::exists(dir / "gaf_S2.svg"));
    // Re-serializing the parsed summary gives the shipped bytes back.
    std::ifstream in(src / "summary.csv", std::ios::binary);
    std::string text = summary_header() + "\n";
    for (const auto& r : read_summary_csv(in, "summary.csv")) text += to_csv_row(r) + "\n";
    CHECK(text == slurp(src / "summary.csv"));
    fs::remove_all(dir);
  }
}

TEST_SUITE("experiment_pipeline") {
  TEST_CASE("iid on T2: pure-power slope window and log-corrected fit") {
    ExperimentConfig cfg = parse(
        "[run]\nmanifold = T2\nseed = 7\nreplicas = 20\nm_mult = 8\nbias_fraction = 0\n"
        "[ensemble iid]\nN = 64, 128, 256, 512, 1024, 2048, 4096\n");
    const SweepResult res = run_sweep(cfg, "");
    REQUIRE(res.summary.size() == 7);
    for (const auto& r : res.summary) CHECK(r.failed == 0);
    REQUIRE(res.summary[0].slope_pure);
    const double slope = *res.summary[0].slope_pure;
    MESSAGE("iid T2 slope " << slope << ", sse pure " << *res.summary[0].sse_pure << ", sse log "
                            << *res.summary[0].sse_log);
    CHECK(slope >= -0.56);
    CHECK(slope <= -0.44);
    CHECK(*res.summary[0].sse_log < *res.summary[0].sse_pure);
  }
}
