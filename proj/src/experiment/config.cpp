#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ppw/errors.hpp"
#include "ppw/experiment.hpp"

namespace ppw {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string where(const std::string& source, int line) { return source + ":" + std::to_string(line) + ": "; }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

double to_double(const std::string& v, const std::string& ctx) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ParseError(ctx + "expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& v, const std::string& ctx) {
  std::size_t used = 0;
  std::uint64_t x = 0;
  try {
    if (!v.empty() && v[0] != '-') x = std::stoull(v, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ParseError(ctx + "expected a nonnegative integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const std::string& ctx) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ParseError(ctx + "expected true or false, got '" + v + "'");
}

std::string list_text(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += fmt17(xs[i]);
  }
  return out;
}

}  // namespace

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt17(const std::optional<double>& v) { return v ? fmt17(*v) : std::string(); }

std::vector<ConfigSection> parse_key_value(std::istream& in, const std::string& source) {
  std::vector<ConfigSection> out(1);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError(where(source, line) + "unterminated section header");
      const std::string body = trim(s.substr(1, s.size() - 2));
      const auto sp = body.find_first_of(" \t");
      ConfigSection sec;
      sec.name = body.substr(0, sp);
      sec.arg = sp == std::string::npos ? "" : trim(body.substr(sp));
      sec.line = line;
      if (sec.name.empty()) throw ParseError(where(source, line) + "empty section name");
      out.push_back(std::move(sec));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(where(source, line) + "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) throw ParseError(where(source, line) + "empty key");
    for (const auto& [k, v] : out.back().entries) {
      if (k == key) throw ParseError(where(source, line) + "duplicate key '" + key + "'");
    }
    out.back().entries.emplace_back(key, trim(s.substr(eq + 1)));
    out.back().entry_lines.push_back(line);
  }
  if (out.front().entries.empty()) out.erase(out.begin());
  return out;
}

Manifold parse_manifold(const std::string& s) {
  if (s == "S2") return Manifold::sphere2();
  if (s == "T2") return Manifold::torus(2);
  if (s == "T3") return Manifold::torus(3);
  if (s == "T2-hex") {
    Eigen::Matrix2d g;
    g << 1.0, 0.5, 0.0, std::sqrt(3.0) / 2.0;
    return Manifold::torus(g);
  }
  if (s.size() > 4 && s[0] == 'T' && (s[1] == '2' || s[1] == '3') && s[2] == '[' && s.back() == ']') {
    const int d = s[1] - '0';
    const auto items = split_list(s.substr(3, s.size() - 4));
    if (items.size() != static_cast<std::size_t>(d * d))
      throw ParseError("manifold '" + s + "' needs " + std::to_string(d * d) + " generator entries");
    Eigen::MatrixXd g(d, d);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) g(i, j) = to_double(items[static_cast<std::size_t>(j * d + i)], "manifold: ");
    return Manifold::torus(g);
  }
  throw ParseError("unknown manifold '" + s + "' (expected S2, T2, T3, T2-hex or Td[...])");
}

EnsembleSpec EnsembleEntry::make(const Manifold& m, double value) const {
  auto count = [&]() {
    require(value >= 1.0 && value == std::floor(value), "point count must be a positive integer");
    return static_cast<std::size_t>(value);
  };
  if (kind == "harmonic") {
    if (m.is_sphere()) return EnsembleSpec::harmonic(m, value);
    const double p = norm == "inf" ? std::numeric_limits<double>::infinity() : to_double(norm, "norm: ");
    return EnsembleSpec::harmonic(m, value, p);
  }
  if (kind == "spherical") {
    require(m.is_sphere(), "the spherical ensemble lives on S2");
    return EnsembleSpec::spherical(count());
  }
  if (kind == "gaf") {
    require(m.is_sphere(), "GAF zeros live on S2");
    return EnsembleSpec::gaf_zeros(count(), start_at_one);
  }
  if (kind == "jittered") return EnsembleSpec::jittered(m, count());
  if (kind == "iid") return EnsembleSpec::iid(m, count());
  throw InvalidInput("unknown ensemble kind '" + kind + "'");
}

ExperimentConfig parse_experiment(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  bool have_run = false;
  for (const ConfigSection& sec : parse_key_value(in, source)) {
    auto ctx = [&](std::size_t i) { return where(source, sec.entry_lines[i]); };
    if (sec.name == "run") {
      if (have_run) throw ParseError(where(source, sec.line) + "duplicate [run] section");
      have_run = true;
      for (std::size_t i = 0; i < sec.entries.size(); ++i) {
        const auto& [k, v] = sec.entries[i];
        if (k == "manifold") {
          cfg.manifold_name = v;
          try {
            cfg.manifold = parse_manifold(v);
          } catch (const std::exception& e) {
            throw ParseError(ctx(i) + e.what());
          }
        } else if (k == "seed") {
          cfg.master_seed = to_u64(v, ctx(i));
        } else if (k == "replicas") {
          cfg.replicas = to_u64(v, ctx(i));
        } else if (k == "m_mult") {
          cfg.m_mult = to_double(v, ctx(i));
        } else if (k == "solver") {
          try {
            cfg.solver = solver_from_string(v);
          } catch (const std::exception& e) {
            throw ParseError(ctx(i) + e.what());
          }
        } else if (k == "entropic_fallback") {
          cfg.entropic_fallback = to_bool(v, ctx(i));
        } else if (k == "threads") {
          cfg.threads = to_u64(v, ctx(i));
        } else if (k == "out") {
          cfg.out = v;
        } else if (k == "bound") {
          cfg.bound = to_bool(v, ctx(i));
        } else if (k == "K_M") {
          cfg.K_M = to_double(v, ctx(i));
        } else if (k == "bias_fraction") {
          cfg.bias_fraction = to_double(v, ctx(i));
        } else if (k == "bias_limit") {
          cfg.bias_limit = to_u64(v, ctx(i));
        } else {
          throw ParseError(ctx(i) + "unknown key '" + k + "' in [run]");
        }
      }
    } else if (sec.name == "ensemble") {
      EnsembleEntry e;
      e.kind = sec.arg;
      if (e.kind != "harmonic" && e.kind != "spherical" && e.kind != "gaf" && e.kind != "jittered" && e.kind != "iid")
        throw ParseError(where(source, sec.line) + "unknown ensemble '" + e.kind + "'");
      const std::string sched_key = e.kind == "harmonic" ? "L" : "N";
      bool have_sched = false;
      for (std::size_t i = 0; i < sec.entries.size(); ++i) {
        const auto& [k, v] = sec.entries[i];
        if (k == sched_key) {
          for (const std::string& item : split_list(v)) e.schedule.push_back(to_double(item, ctx(i)));
          have_sched = true;
        } else if (k == "norm" && e.kind == "harmonic") {
          if (v != "1" && v != "2" && v != "inf") throw ParseError(ctx(i) + "norm must be 1, 2 or inf");
          e.norm = v;
        } else if (k == "start_at_one" && e.kind == "gaf") {
          e.start_at_one = to_bool(v, ctx(i));
        } else {
          throw ParseError(ctx(i) + "unknown key '" + k + "' in [ensemble " + e.kind + "]");
        }
      }
      if (!have_sched || e.schedule.empty())
        throw ParseError(where(source, sec.line) + "[ensemble " + e.kind + "] needs a nonempty " + sched_key + " list");
      cfg.ensembles.push_back(std::move(e));
    } else {
      throw ParseError(where(source, sec.line) + "unknown section [" + sec.name + "]");
    }
  }
  if (cfg.ensembles.empty()) throw ParseError(source + ": no [ensemble ...] section");
  if (cfg.replicas < 1) throw ParseError(source + ": replicas must be at least 1");
  if (!(cfg.m_mult >= 1.0)) throw ParseError(source + ": m_mult must be at least 1");
  if (cfg.threads < 1) throw ParseError(source + ": threads must be at least 1");
  if (!(cfg.bias_fraction >= 0.0 && cfg.bias_fraction <= 1.0))
    throw ParseError(source + ": bias_fraction must lie in [0, 1]");
  // Reject ensembles that do not fit the manifold before any work starts.
  for (const EnsembleEntry& e : cfg.ensembles) {
    try {
      (void)e.make(cfg.manifold, e.schedule.front());
    } catch (const std::exception& ex) {
      throw ParseError(source + ": [ensemble " + e.kind + "]: " + ex.what());
    }
  }
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path);
  return parse_experiment(in, path);
}

std::string ExperimentConfig::echo() const {
  std::ostringstream os;
  os << "# ppw " << kVersion << "\n";
  os << "[run]\n";
  os << "manifold = " << manifold_name << "\n";
  os << "seed = " << master_seed << "\n";
  os << "replicas = " << replicas << "\n";
  os << "m_mult = " << fmt17(m_mult) << "\n";
  os << "solver = " << to_string(solver) << "\n";
  os << "entropic_fallback = " << (entropic_fallback ? "true" : "false") << "\n";
  os << "threads = " << threads << "\n";
  os << "out = " << out << "\n";
  os << "bound = " << (bound ? "true" : "false") << "\n";
  os << "K_M = " << fmt17(K_M) << "\n";
  os << "bias_fraction = " << fmt17(bias_fraction) << "\n";
  os << "bias_limit = " << bias_limit << "\n";
  for (const EnsembleEntry& e : ensembles) {
    os << "\n[ensemble " << e.kind << "]\n";
    os << (e.kind == "harmonic" ? "L" : "N") << " = " << list_text(e.schedule) << "\n";
    if (e.kind == "harmonic") os << "norm = " << e.norm << "\n";
    if (e.kind == "gaf") os << "start_at_one = " << (e.start_at_one ? "true" : "false") << "\n";
  }
  return os.str();
}

}  // namespace ppw
