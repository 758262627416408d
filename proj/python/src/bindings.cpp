// Python bindings: manifolds, ensembles, sampling, W2, the smoothing bound,
// lattice counts, rate fits and sweeps.

#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ppw/experiment.hpp"
#include "ppw/lattice.hpp"
#include "ppw/samplers.hpp"
#include "ppw/statistics.hpp"
#include "ppw/transport.hpp"

namespace py = pybind11;
using namespace ppw;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<Point>& pts, int cols) {
  Array out({static_cast<py::ssize_t>(pts.size()), static_cast<py::ssize_t>(cols)});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int j = 0; j < cols; ++j) a(static_cast<py::ssize_t>(i), j) = pts[i][j];
  return out;
}

int ambient_dim(const Manifold& m) { return m.is_sphere() ? 3 : m.dim(); }

std::vector<Point> from_array(const Manifold& m, const Array& arr) {
  const int cols = ambient_dim(m);
  if (arr.ndim() != 2 || arr.shape(1) != cols)
    throw InvalidInput("points must have shape (N, " + std::to_string(cols) + ")");
  auto a = arr.unchecked<2>();
  std::vector<Point> pts(static_cast<std::size_t>(arr.shape(0)));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int j = 0; j < cols; ++j) pts[i][j] = a(static_cast<py::ssize_t>(i), j);
    m.validate(pts[i]);
  }
  return pts;
}

LatticeNorm norm_from(const py::object& p) {
  if (py::isinstance<py::str>(p)) {
    const std::string s = p.cast<std::string>();
    if (s == "inf") return LatticeNorm::p_norm(INFINITY);
    return LatticeNorm::p_norm(std::stod(s));
  }
  return LatticeNorm::p_norm(p.cast<double>());
}

}  // namespace

PYBIND11_MODULE(_ppw, mod) {
  mod.doc() = "Point processes on the sphere and flat tori, and their W2 distance to the volume form";

  py::register_exception<InvalidInput>(mod, "InvalidInput", PyExc_ValueError);
  py::register_exception<NumericalError>(mod, "NumericalError", PyExc_RuntimeError);
  py::register_exception<UnsupportedVariant>(mod, "UnsupportedVariant", PyExc_TypeError);

  py::class_<Manifold>(mod, "Manifold")
      .def_static("sphere2", &Manifold::sphere2)
      .def_static("torus", py::overload_cast<int>(&Manifold::torus), py::arg("dim"))
      .def_static("torus_lattice", py::overload_cast<const Eigen::MatrixXd&>(&Manifold::torus), py::arg("generators"))
      .def_static("parse", &parse_manifold, py::arg("name"))
      .def_property_readonly("dim", &Manifold::dim)
      .def_property_readonly("is_sphere", &Manifold::is_sphere)
      .def_property_readonly("diameter", &Manifold::diameter)
      .def_property_readonly("generators", &Manifold::generators)
      .def_property_readonly("label", &Manifold::label)
      .def("__repr__", [](const Manifold& m) { return "Manifold(" + m.label() + ")"; });

  py::class_<EnsembleSpec>(mod, "EnsembleSpec")
      .def_static(
          "harmonic",
          [](const Manifold& m, double L, const py::object& p) { return EnsembleSpec::harmonic(m, L, norm_from(p)); },
          py::arg("manifold"), py::arg("L"), py::arg("p") = 2.0)
      .def_static("spherical", &EnsembleSpec::spherical, py::arg("n"))
      .def_static("gaf_zeros", &EnsembleSpec::gaf_zeros, py::arg("n"), py::arg("start_at_one") = false)
      .def_static("jittered", &EnsembleSpec::jittered, py::arg("manifold"), py::arg("n"))
      .def_static("iid", &EnsembleSpec::iid, py::arg("manifold"), py::arg("n"))
      .def_property_readonly("N", &EnsembleSpec::N)
      .def_property_readonly("manifold", &EnsembleSpec::manifold)
      .def_property_readonly("label", &EnsembleSpec::label)
      .def("__repr__", [](const EnsembleSpec& s) { return "EnsembleSpec(" + s.label() + ")"; });

  mod.def(
      "sample",
      [](const EnsembleSpec& spec, std::uint64_t seed) {
        const PointSet ps = sample(spec, seed);
        return to_array(ps.points, ambient_dim(spec.manifold()));
      },
      py::arg("spec"), py::arg("seed"), "Draws one configuration; rows are points in ambient coordinates.");

  py::class_<W2Estimate>(mod, "W2Estimate")
      .def_readonly("value", &W2Estimate::value)
      .def_readonly("bracket_low", &W2Estimate::bracket_low)
      .def_readonly("bracket_high", &W2Estimate::bracket_high)
      .def_readonly("M", &W2Estimate::M)
      .def_property_readonly("solver", [](const W2Estimate& e) { return to_string(e.solver); })
      .def_readonly("duality_gap", &W2Estimate::duality_gap)
      .def_readonly("rounds", &W2Estimate::rounds)
      .def_readonly("fell_back", &W2Estimate::fell_back);

  mod.def(
      "w2_to_volume",
      [](const Manifold& m, const Array& points, std::size_t M, const std::string& solver) {
        const std::vector<Point> pts = from_array(m, points);
        W2Options opts;
        opts.solver = solver_from_string(solver);
        py::gil_scoped_release release;
        return w2_to_volume(m, pts, M, opts);
      },
      py::arg("manifold"), py::arg("points"), py::arg("M"), py::arg("solver") = "exact");

  mod.def("w1_packing_lower_bound", &w1_packing_lower_bound, py::arg("N"), py::arg("manifold"));

  py::class_<SmoothingBound>(mod, "SmoothingBound")
      .def_readonly("value", &SmoothingBound::value)
      .def_readonly("t", &SmoothingBound::t)
      .def_readonly("l_max", &SmoothingBound::l_max)
      .def_readonly("smoothing_term", &SmoothingBound::smoothing_term)
      .def_readonly("head", &SmoothingBound::head)
      .def_readonly("tail", &SmoothingBound::tail);

  mod.def(
      "smoothing_bound",
      [](const Manifold& m, const Array& points, double K_M, std::optional<double> t) {
        SmoothingEvaluator ev(m, from_array(m, points));
        SmoothingBoundConfig cfg;
        cfg.K_M = K_M;
        if (t) {
          cfg.t = *t;
          return ev.bound(cfg);
        }
        return optimize_smoothing_time(ev, cfg);
      },
      py::arg("manifold"), py::arg("points"), py::arg("K_M") = 0.0, py::arg("t") = py::none(),
      "Smoothing upper bound on W2; minimized over t unless t is given.");

  mod.def("gaf_variance_bound", &gaf_variance_bound, py::arg("l"), py::arg("N"));

  mod.def(
      "count_ball",
      [](const py::object& p, double radius, int dim) { return count_ball(norm_from(p), radius, dim); },
      py::arg("p"), py::arg("radius"), py::arg("dim") = 2);
  mod.def(
      "annulus_difference_count",
      [](const py::object& p, const std::vector<long long>& k, double radius) {
        if (k.empty() || k.size() > 3) throw InvalidInput("k must have 1 to 3 entries");
        IntVec v{};
        for (std::size_t i = 0; i < k.size(); ++i) v[i] = k[i];
        return annulus_difference_count(norm_from(p), v, radius, static_cast<int>(k.size()));
      },
      py::arg("p"), py::arg("k"), py::arg("radius"));
  mod.def(
      "gauss_circle",
      [](double r) {
        const GaussCircleCheck g = gauss_circle_check(r);
        return py::dict(py::arg("count") = g.count, py::arg("error") = g.error, py::arg("bound") = g.bound,
                        py::arg("holds") = g.holds);
      },
      py::arg("r"));

  py::class_<RateFit>(mod, "RateFit")
      .def_property_readonly("model", [](const RateFit& f) { return to_string(f.model); })
      .def_readonly("slope", &RateFit::slope)
      .def_readonly("intercept", &RateFit::intercept)
      .def_readonly("residual_sse", &RateFit::residual_sse)
      .def_readonly("slope_stderr", &RateFit::slope_stderr)
      .def_readonly("residuals", &RateFit::residuals);

  mod.def(
      "fit_rate",
      [](const std::vector<double>& N, const std::vector<double>& w2, const std::string& model) {
        if (N.size() != w2.size()) throw InvalidInput("N and w2 differ in length");
        std::vector<RatePoint> pts;
        for (std::size_t i = 0; i < N.size(); ++i) pts.push_back({N[i], w2[i]});
        return fit_rate(pts, rate_model_from_string(model));
      },
      py::arg("N"), py::arg("w2"), py::arg("model") = "pure_power");

  mod.def(
      "run_sweep",
      [](const std::string& config_text, const std::string& out_dir) {
        std::istringstream in(config_text);
        const ExperimentConfig cfg = parse_experiment(in, "<string>");
        SweepResult res;
        {
          py::gil_scoped_release release;
          res = run_sweep(cfg, out_dir);
        }
        py::list rows;
        for (const SummaryRow& r : res.summary) {
          rows.append(py::dict(py::arg("ensemble") = r.ensemble, py::arg("manifold") = r.manifold,
                               py::arg("N") = r.N, py::arg("replicas") = r.replicas, py::arg("failed") = r.failed,
                               py::arg("mean_w2") = r.mean_w2, py::arg("stderr_w2") = r.stderr_w2,
                               py::arg("mean_bound") = r.mean_bound, py::arg("slope_pure") = r.slope_pure,
                               py::arg("slope_log") = r.slope_log));
        }
        return rows;
      },
      py::arg("config_text"), py::arg("out_dir") = "",
      "Runs a sweep from config text; returns the summary rows.");

  mod.def(
      "report",
      [](const std::string& dir) {
        const ReportOutcome r = emit_outputs(dir);
        return py::make_tuple(r.text, r.exit_code);
      },
      py::arg("dir"), "Writes report.txt and SVG plots from summary.csv in dir.");

  mod.attr("__version__") = "0.1.0";
}
