#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ppw/experiment.hpp"

namespace ppw {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string file_stem(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') ? c : '_';
  return out;
}

struct Family {
  std::string ensemble;
  std::string manifold;
  std::vector<const SummaryRow*> rows;
};

std::vector<Family> families(const std::vector<SummaryRow>& summary) {
  std::vector<Family> out;
  for (const SummaryRow& r : summary) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const Family& f) { return f.ensemble == r.ensemble && f.manifold == r.manifold; });
    if (it == out.end()) {
      out.push_back({r.ensemble, r.manifold, {}});
      it = out.end() - 1;
    }
    it->rows.push_back(&r);
  }
  return out;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::optional<std::pair<double, double>> slope_window(const std::string& e) {
  if (e == "harmonic_S2" || e == "spherical" || e == "harmonic_T2_p2" || e == "harmonic_T2_pinf")
    return std::make_pair(-0.58, -0.42);
  if (e == "gaf") return std::make_pair(-0.60, -0.40);
  if (e.rfind("harmonic_T2[", 0) == 0 && e.size() > 5 && e.substr(e.size() - 5) == "_dual")
    return std::make_pair(-0.60, -0.40);
  if (e == "jittered_T3") return std::make_pair(-0.40, -0.27);
  if (e == "iid_T2") return std::make_pair(-0.56, -0.44);
  return std::nullopt;
}

ReportOutcome render_report(const std::vector<SummaryRow>& summary) {
  ReportOutcome out;
  std::ostringstream os;
  os << "ppw sweep report\n";
  if (summary.empty()) {
    os << "no data\n";
    out.text = os.str();
    out.exit_code = 3;
    return out;
  }
  for (const Family& f : families(summary)) {
    os << "\n" << f.ensemble << " on " << f.manifold << "\n";
    std::set<std::size_t> ns;
    for (const SummaryRow* r : f.rows) {
      os << "  N=" << r->N << "  replicas=" << r->replicas;
      if (r->failed) os << "  failed=" << r->failed;
      if (r->replicas > 0) {
        os << "  mean_w2=" << sci(r->mean_w2) << "  stderr=" << sci(r->stderr_w2);
        ns.insert(r->N);
      }
      if (r->mean_bound) os << "  mean_bound=" << sci(*r->mean_bound);
      if (r->bias_4m) os << "  bias_4m=" << fixed(*r->bias_4m, 4);
      os << "\n";
    }
    const SummaryRow& first = *f.rows.front();
    if (!first.slope_pure) {
      os << "  insufficient N values (" << ns.size() << " distinct, need 4)\n";
      continue;
    }
    os << "  pure_power           slope " << fixed(*first.slope_pure, 4) << "  sse " << sci(*first.sse_pure) << "\n";
    os << "  power_with_sqrt_log  slope " << fixed(*first.slope_log, 4) << "  sse " << sci(*first.sse_log) << "\n";
    if (const auto w = slope_window(f.ensemble)) {
      const bool pass = *first.slope_pure >= w->first && *first.slope_pure <= w->second;
      os << "  window [" << fixed(w->first, 2) << ", " << fixed(w->second, 2) << "]: " << (pass ? "PASS" : "FAIL") << "\n";
    } else {
      os << "  window: none\n";
    }
  }
  out.text = os.str();
  return out;
}

std::string render_svg(const std::vector<SummaryRow>& summary, const std::string& title) {
  const double W = 640, H = 480, L = 70, R = 20, T = 40, B = 50;
  double nlo = INFINITY, nhi = -INFINITY, wlo = INFINITY, whi = -INFINITY;
  for (const SummaryRow& r : summary) {
    if (r.replicas == 0 || r.mean_w2 <= 0.0) continue;
    nlo = std::min(nlo, std::log10(static_cast<double>(r.N)));
    nhi = std::max(nhi, std::log10(static_cast<double>(r.N)));
    wlo = std::min(wlo, std::log10(r.mean_w2));
    whi = std::max(whi, std::log10(r.mean_w2));
  }
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << " " << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << xml_escape(title) << "</text>\n";
  if (!std::isfinite(nlo)) {
    os << "<text x=\"" << W / 2 << "\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\">no data</text>\n</svg>\n";
    return os.str();
  }
  // Pad the ranges to whole decades' fractions so single points still plot.
  nlo -= 0.1;
  nhi += 0.1;
  wlo -= 0.1;
  whi += 0.1;
  auto px = [&](double lx) { return L + (lx - nlo) / (nhi - nlo) * (W - L - R); };
  auto py = [&](double ly) { return H - B - (ly - wlo) / (whi - wlo) * (H - T - B); };
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(std::ceil(nlo)); e <= static_cast<int>(std::floor(nhi)); ++e) {
    os << "<text x=\"" << fixed(px(e), 1) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">1e"
       << e << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(wlo)); e <= static_cast<int>(std::floor(whi)); ++e) {
    os << "<text x=\"" << L - 6 << "\" y=\"" << fixed(py(e) + 4, 1) << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">1e"
       << e << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">N</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 "
     << H / 2 << ")\">mean W2</text>\n";
  int k = 0;
  double legend_y = T + 16;
  for (const Family& f : families(summary)) {
    const char* color = kColors[k++ % 8];
    double fmin = INFINITY, fmax = -INFINITY, mx = 0.0, my = 0.0;
    int n = 0;
    for (const SummaryRow* r : f.rows) {
      if (r->replicas == 0 || r->mean_w2 <= 0.0) continue;
      const double lx = std::log10(static_cast<double>(r->N)), ly = std::log10(r->mean_w2);
      os << "<circle cx=\"" << fixed(px(lx), 2) << "\" cy=\"" << fixed(py(ly), 2) << "\" r=\"4\" fill=\"" << color << "\"/>\n";
      fmin = std::min(fmin, lx);
      fmax = std::max(fmax, lx);
      mx += lx;
      my += ly;
      ++n;
    }
    const SummaryRow& first = *f.rows.front();
    if (first.slope_pure && n > 0) {
      // The fit line passes through the centroid of the plotted points.
      mx /= n;
      my /= n;
      const double s = *first.slope_pure;
      os << "<line x1=\"" << fixed(px(fmin), 2) << "\" y1=\"" << fixed(py(my + s * (fmin - mx)), 2) << "\" x2=\""
         << fixed(px(fmax), 2) << "\" y2=\"" << fixed(py(my + s * (fmax - mx)), 2) << "\" stroke=\"" << color
         << "\" stroke-width=\"1.5\"/>\n";
    }
    std::string label = f.ensemble;
    if (first.slope_pure) label += " (slope " + fixed(*first.slope_pure, 3) + ")";
    os << "<text x=\"" << W - R - 8 << "\" y=\"" << legend_y << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
       << color << "\">" << xml_escape(label) << "</text>\n";
    legend_y += 16;
  }
  os << "</svg>\n";
  return os.str();
}

ReportOutcome emit_outputs(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path p = fs::path(dir) / "summary.csv";
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ParseError("cannot open " + p.string());
  const std::vector<SummaryRow> summary = read_summary_csv(in, p.string());
  ReportOutcome out = render_report(summary);
  auto write = [&](const fs::path& f, const std::string& text) {
    std::ofstream os(f, std::ios::binary);
    os << text;
    os.flush();
    if (!os) throw std::runtime_error("failed to write " + f.string());
  };
  write(fs::path(dir) / "report.txt", out.text);
  write(fs::path(dir) / "all.svg", render_svg(summary, "mean W2 against N"));
  for (const Family& f : families(summary)) {
    std::vector<SummaryRow> rows;
    for (const SummaryRow* r : f.rows) rows.push_back(*r);
    write(fs::path(dir) / (file_stem(f.ensemble + "_" + f.manifold) + ".svg"), render_svg(rows, f.ensemble + " on " + f.manifold));
  }
  return out;
}

}  // namespace ppw
