#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "ppw/experiment.hpp"

namespace ppw {
namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// RFC 4180 fields of one line (no embedded newlines).
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_q = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_q) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        in_q = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_q = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += quote(fields[i]);
  }
  return out;
}

class RowReader {
 public:
  RowReader(const std::vector<std::string>& f, const std::string& ctx) : f_(f), ctx_(ctx) {}
  const std::string& str(std::size_t i) const { return f_[i]; }
  double num(std::size_t i) const {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(f_[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (f_[i].empty() || used != f_[i].size()) throw ParseError(ctx_ + "field " + std::to_string(i + 1) + " is not a number: '" + f_[i] + "'");
    return v;
  }
  std::optional<double> opt(std::size_t i) const {
    if (f_[i].empty()) return std::nullopt;
    return num(i);
  }
  std::uint64_t u64(std::size_t i) const {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
      if (!f_[i].empty() && f_[i][0] != '-') v = std::stoull(f_[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (f_[i].empty() || used != f_[i].size()) throw ParseError(ctx_ + "field " + std::to_string(i + 1) + " is not an integer: '" + f_[i] + "'");
    return v;
  }

 private:
  const std::vector<std::string>& f_;
  std::string ctx_;
};

// Reads a header-plus-rows CSV, calling `row` for every data line.
template <class Fn>
void read_csv(std::istream& in, const std::string& source, const std::string& header, Fn row) {
  std::string line;
  int n = 0;
  bool have_header = false;
  const std::size_t width = split_csv(header).size();
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      if (line != header) throw ParseError(source + ":" + std::to_string(n) + ": unexpected header");
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    const std::string ctx = source + ": row " + std::to_string(n) + ": ";
    if (f.size() != width)
      throw ParseError(ctx + "expected " + std::to_string(width) + " fields, got " + std::to_string(f.size()));
    row(RowReader(f, ctx));
  }
  if (!have_header) throw ParseError(source + ": missing header");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

std::string csv_header() {
  return "ensemble,manifold,N,replica,seed,w2,bracket_low,bracket_high,M,runtime_ms,solver,bound,t_star,w2_4m,status";
}

std::string to_csv_row(const SweepRecord& r) {
  const bool ok = r.ok();
  return join({r.ensemble, r.manifold, std::to_string(r.N), std::to_string(r.replica), std::to_string(r.seed),
               ok ? fmt17(r.w2) : "", ok ? fmt17(r.bracket_low) : "", ok ? fmt17(r.bracket_high) : "",
               std::to_string(r.M), fmt17(r.runtime_ms), r.solver, fmt17(r.bound), fmt17(r.t_star), fmt17(r.w2_4m),
               r.status});
}

std::vector<SweepRecord> read_sweep_csv(std::istream& in, const std::string& source) {
  std::vector<SweepRecord> out;
  read_csv(in, source, csv_header(), [&](const RowReader& f) {
    SweepRecord r;
    r.ensemble = f.str(0);
    r.manifold = f.str(1);
    r.N = f.u64(2);
    r.replica = f.u64(3);
    r.seed = f.u64(4);
    r.status = f.str(14);
    if (r.ok()) {
      r.w2 = f.num(5);
      r.bracket_low = f.num(6);
      r.bracket_high = f.num(7);
    }
    r.M = f.u64(8);
    r.runtime_ms = f.num(9);
    r.solver = f.str(10);
    r.bound = f.opt(11);
    r.t_star = f.opt(12);
    r.w2_4m = f.opt(13);
    out.push_back(std::move(r));
  });
  return out;
}

std::string family_label(const EnsembleSpec& spec) {
  std::string label = spec.label();
  if (spec.as<ensemble::Harmonic>()) {
    const auto pos = label.rfind("_L");
    if (pos != std::string::npos) label.resize(pos);
  }
  return label;
}

std::uint64_t replica_seed(std::uint64_t master, const std::string& label, std::size_t r) {
  return derive_seed(derive_seed(master, fnv1a(label)), r);
}

SweepRecord run_replica(const ExperimentConfig& cfg, const EnsembleSpec& spec, std::size_t replica,
                        const Sampler& sampler) {
  SweepRecord rec;
  rec.ensemble = family_label(spec);
  rec.manifold = cfg.manifold_name;
  rec.N = spec.N();
  rec.replica = replica;
  rec.seed = replica_seed(cfg.master_seed, spec.label(), replica);
  rec.M = static_cast<std::size_t>(std::ceil(cfg.m_mult * static_cast<double>(rec.N)));
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const PointSet ps = sampler.draw(rec.seed);
    W2Options opts;
    opts.solver = cfg.solver;
    if (cfg.solver == Solver::Exact && !cfg.entropic_fallback && rec.N * rec.M > opts.exact_limit)
      throw InvalidInput("instance exceeds the exact solver limit and entropic fallback is disabled");
    const W2Estimate w = w2_to_volume(ps, rec.M, opts);
    rec.w2 = w.value;
    rec.bracket_low = w.bracket_low;
    rec.bracket_high = w.bracket_high;
    rec.solver = to_string(w.solver);
    if (cfg.bias_fraction > 0.0) {
      const auto stride = static_cast<std::size_t>(std::max(1.0, std::round(1.0 / cfg.bias_fraction)));
      if (replica % stride == 0 && rec.N * 4 * rec.M <= cfg.bias_limit) {
        rec.w2_4m = w2_to_volume(ps, 4 * rec.M, opts).value;
      }
    }
    if (cfg.bound) {
      SmoothingBoundConfig bc;
      bc.K_M = cfg.K_M;
      const SmoothingBound b = optimize_smoothing_time(ps, bc);
      rec.bound = b.value;
      rec.t_star = b.t;
    }
  } catch (const std::exception& e) {
    rec.status = "error: " + one_line(e.what());
    rec.solver.clear();
    rec.bound.reset();
    rec.t_star.reset();
    rec.w2_4m.reset();
  }
  rec.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::string summary_header() {
  return "ensemble,manifold,N,replicas,failed,mean_w2,stderr_w2,mean_bracket_low,mean_bracket_high,mean_bound,"
         "median_t_star,bias_4m,slope_pure,sse_pure,slope_log,sse_log";
}

std::string to_csv_row(const SummaryRow& r) {
  return join({r.ensemble, r.manifold, std::to_string(r.N), std::to_string(r.replicas), std::to_string(r.failed),
               fmt17(r.mean_w2), fmt17(r.stderr_w2), fmt17(r.mean_bracket_low), fmt17(r.mean_bracket_high),
               fmt17(r.mean_bound), fmt17(r.median_t_star), fmt17(r.bias_4m), fmt17(r.slope_pure), fmt17(r.sse_pure),
               fmt17(r.slope_log), fmt17(r.sse_log)});
}

std::vector<SummaryRow> read_summary_csv(std::istream& in, const std::string& source) {
  std::vector<SummaryRow> out;
  read_csv(in, source, summary_header(), [&](const RowReader& f) {
    SummaryRow r;
    r.ensemble = f.str(0);
    r.manifold = f.str(1);
    r.N = f.u64(2);
    r.replicas = f.u64(3);
    r.failed = f.u64(4);
    r.mean_w2 = f.num(5);
    r.stderr_w2 = f.num(6);
    r.mean_bracket_low = f.num(7);
    r.mean_bracket_high = f.num(8);
    r.mean_bound = f.opt(9);
    r.median_t_star = f.opt(10);
    r.bias_4m = f.opt(11);
    r.slope_pure = f.opt(12);
    r.sse_pure = f.opt(13);
    r.slope_log = f.opt(14);
    r.sse_log = f.opt(15);
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<SweepRecord>& records) {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<const SweepRecord*>> members;
  for (const SweepRecord& r : records) {
    std::size_t i = 0;
    while (i < rows.size() && !(rows[i].ensemble == r.ensemble && rows[i].manifold == r.manifold && rows[i].N == r.N)) ++i;
    if (i == rows.size()) {
      rows.push_back({});
      rows.back().ensemble = r.ensemble;
      rows.back().manifold = r.manifold;
      rows.back().N = r.N;
      members.emplace_back();
    }
    members[i].push_back(&r);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    SummaryRow& row = rows[i];
    std::vector<double> w, lo, hi, bound, ts, bias;
    for (const SweepRecord* r : members[i]) {
      if (!r->ok()) {
        ++row.failed;
        continue;
      }
      w.push_back(r->w2);
      lo.push_back(r->bracket_low);
      hi.push_back(r->bracket_high);
      if (r->bound) bound.push_back(*r->bound);
      if (r->t_star) ts.push_back(*r->t_star);
      if (r->w2_4m && r->w2 > 0.0) bias.push_back(*r->w2_4m / r->w2 - 1.0);
    }
    row.replicas = w.size();
    auto mean = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    };
    if (!w.empty()) {
      row.mean_w2 = mean(w);
      row.mean_bracket_low = mean(lo);
      row.mean_bracket_high = mean(hi);
      if (w.size() > 1) {
        double ss = 0.0;
        for (double x : w) ss += (x - row.mean_w2) * (x - row.mean_w2);
        row.stderr_w2 = std::sqrt(ss / static_cast<double>(w.size() - 1) / static_cast<double>(w.size()));
      }
    }
    if (!bound.empty()) row.mean_bound = mean(bound);
    if (!ts.empty()) {
      std::sort(ts.begin(), ts.end());
      const std::size_t n = ts.size();
      row.median_t_star = n % 2 ? ts[n / 2] : 0.5 * (ts[n / 2 - 1] + ts[n / 2]);
    }
    if (!bias.empty()) row.bias_4m = mean(bias);
  }
  // Rate fits per ensemble family.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<RatePoint> pts;
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (rows[j].ensemble == rows[i].ensemble && rows[j].manifold == rows[i].manifold && rows[j].replicas > 0 &&
          rows[j].mean_w2 > 0.0 && rows[j].N >= 2) {
        pts.push_back({static_cast<double>(rows[j].N), rows[j].mean_w2});
        idx.push_back(j);
      }
    }
    if (rows[i].slope_pure || pts.size() < 4) continue;
    try {
      const RateFit a = fit_rate(pts, RateModel::PurePower);
      const RateFit b = fit_rate(pts, RateModel::PowerWithSqrtLog);
      for (std::size_t j : idx) {
        rows[j].slope_pure = a.slope;
        rows[j].sse_pure = a.residual_sse;
        rows[j].slope_log = b.slope;
        rows[j].sse_log = b.residual_sse;
      }
    } catch (const InvalidInput&) {
      // fewer than 4 distinct N
    }
  }
  return rows;
}

SweepResult run_sweep(const ExperimentConfig& cfg, const std::string& out_dir, const ProgressFn& progress) {
  namespace fs = std::filesystem;
  std::ofstream data;
  auto check = [&](std::ostream& os, const std::string& what) {
    if (!os) throw std::runtime_error("failed to write " + what);
  };
  auto write_file = [&](const std::string& name, const std::string& text) {
    std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
    f << text;
    f.flush();
    check(f, (fs::path(out_dir) / name).string());
  };
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir + ": " + ec.message());
    write_file("config.txt", cfg.echo());
    write_file("version.txt", std::string("ppw ") + kVersion + "\ncsv_schema " + std::to_string(kCsvSchemaVersion) + "\n");
    data.open(fs::path(out_dir) / "data.csv", std::ios::binary);
    data << csv_header() << "\n";
    check(data, out_dir + "/data.csv");
  }

  SweepResult result;
  std::mutex mu;
  for (const EnsembleEntry& e : cfg.ensembles) {
    for (double value : e.schedule) {
      std::vector<SweepRecord> cell(cfg.replicas);
      std::optional<EnsembleSpec> spec;
      std::optional<Sampler> sampler;
      std::string setup_error;
      try {
        spec.emplace(e.make(cfg.manifold, value));
        sampler.emplace(*spec);
      } catch (const std::exception& ex) {
        setup_error = "error: " + one_line(ex.what());
      }
      if (!setup_error.empty()) {
        for (std::size_t r = 0; r < cfg.replicas; ++r) {
          cell[r].ensemble = e.kind;
          cell[r].manifold = cfg.manifold_name;
          cell[r].replica = r;
          cell[r].status = setup_error;
        }
      } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
          for (std::size_t r = next++; r < cfg.replicas; r = next++) {
            cell[r] = run_replica(cfg, *spec, r, *sampler);
            if (progress) {
              std::lock_guard<std::mutex> lock(mu);
              progress(cell[r]);
            }
          }
        };
        const std::size_t nt = std::min(cfg.threads, cfg.replicas);
        std::vector<std::thread> pool;
        for (std::size_t t = 1; t < nt; ++t) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
      }
      // Rows go out in replica order, whatever order the workers finished in.
      for (SweepRecord& r : cell) {
        if (data.is_open()) {
          data << to_csv_row(r) << "\n";
        }
        result.records.push_back(std::move(r));
      }
      if (data.is_open()) {
        data.flush();
        check(data, out_dir + "/data.csv");
      }
    }
  }
  result.summary = summarize(result.records);
  if (!out_dir.empty()) {
    std::string text = summary_header() + "\n";
    for (const SummaryRow& r : result.summary) text += to_csv_row(r) + "\n";
    write_file("summary.csv", text);
  }
  return result;
}

}  // namespace ppw
