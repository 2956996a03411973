#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "lqwidth/cli.hpp"
#include "lqwidth/kreinfeller.hpp"
#include "lqwidth/measure_io.hpp"
#include "lqwidth/partition.hpp"
#include "lqwidth/polyapprox.hpp"
#include "lqwidth/spectrum.hpp"

namespace py = pybind11;
using namespace lqwidth;

namespace {

DyadicCube make_cube(unsigned level, const std::vector<std::uint64_t>& index) { return DyadicCube(level, index); }

py::dict cube_dict(const DyadicCube& c) {
  py::dict d;
  d["level"] = c.level();
  d["index"] = std::vector<std::uint64_t>(c.indices().begin(), c.indices().end());
  return d;
}

py::dict partition_dict(const Partition& p) {
  py::list cells;
  for (const auto& c : p.cells) {
    py::dict d = cube_dict(c.cube);
    d["mass"] = c.mass;
    d["J"] = c.j;
    cells.append(d);
  }
  py::dict out;
  out["dimension"] = p.dim;
  out["a"] = p.a;
  out["cardinality"] = p.cardinality();
  out["max_J"] = p.max_j();
  out["max_level"] = p.max_level();
  out["cells"] = cells;
  return out;
}

FunctionHandle wrap(py::function f) {
  return [f](std::span<const double> x) {
    py::gil_scoped_acquire gil;
    return f(std::vector<double>(x.begin(), x.end())).cast<double>();
  };
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Measure spectra, adaptive dyadic partitions and Krein-Feller widths";

  py::register_exception<MeasureParseError>(m, "MeasureParseError", PyExc_ValueError);
  py::register_exception<InvalidMeasure>(m, "InvalidMeasure", PyExc_ValueError);
  py::register_exception<PartitionDepthError>(m, "PartitionDepthError", PyExc_RuntimeError);

  py::class_<MeasureSpec>(m, "Measure")
      .def_static("from_file", [](const std::filesystem::path& p) { return parse_measure_spec(p); })
      .def_static("from_json", [](const std::string& text) {
        auto spec = measure_from_json(nlohmann::json::parse(text));
        require_valid(spec);
        return spec;
      })
      .def_static("lebesgue", [](std::size_t dim) { return MeasureSpec{Lebesgue{dim}}; }, py::arg("dim") = 1)
      .def("to_json", [](const MeasureSpec& s) { return measure_to_json(s).dump(); })
      .def_property_readonly("dimension", [](const MeasureSpec& s) { return dimension(s); })
      .def_property_readonly("type", [](const MeasureSpec& s) { return type_name(s); })
      .def("validate", [](const MeasureSpec& s) { return validate(s); })
      .def("cube_mass", [](const MeasureSpec& s, unsigned level, const std::vector<std::uint64_t>& index) {
        return cube_mass(s, make_cube(level, index));
      }, py::arg("level"), py::arg("index"))
      .def("__repr__", [](const MeasureSpec& s) { return "<Measure " + type_name(s) + " dim=" + std::to_string(dimension(s)) + ">"; });

  // spectrum
  m.def("beta_n", &beta_n, py::arg("measure"), py::arg("level"), py::arg("s"));
  m.def("spectrum_curve", [](const MeasureSpec& s, unsigned level, const std::vector<double>& grid) {
    return spectrum_curve(s, level, grid).beta;
  }, py::arg("measure"), py::arg("level"), py::arg("s_grid"));
  m.def("s_nb", &s_nb, py::arg("measure"), py::arg("level"), py::arg("b"));
  m.def("s_b_estimate", [](const MeasureSpec& s, double b, const std::vector<unsigned>& levels) {
    const auto fp = s_b_estimate(s, b, levels);
    py::dict d;
    d["estimate"] = fp.estimate;
    d["levels"] = fp.levels;
    d["roots"] = fp.roots;
    d["residuals"] = fp.residuals;
    return d;
  }, py::arg("measure"), py::arg("b"), py::arg("levels"));
  m.def("selfsimilar_beta", [](const std::vector<double>& w, const std::vector<double>& r, double s) {
    return selfsimilar_beta(w, r, s);
  }, py::arg("weights"), py::arg("ratios"), py::arg("s"));
  m.def("selfsimilar_s_rho", [](const std::vector<double>& w, const std::vector<double>& r, double rho) {
    return selfsimilar_s_rho(w, r, rho);
  }, py::arg("weights"), py::arg("ratios"), py::arg("rho"));

  // partition
  m.def("j_weight", [](const MeasureSpec& s, unsigned level, const std::vector<std::uint64_t>& index, double a) {
    return j_weight(s, make_cube(level, index), a);
  }, py::arg("measure"), py::arg("level"), py::arg("index"), py::arg("a"));
  m.def("adaptive_partition", [](const MeasureSpec& s, double a, double t, unsigned max_depth) {
    return partition_dict(adaptive_partition(s, a, t, max_depth));
  }, py::arg("measure"), py::arg("a"), py::arg("t"), py::arg("max_depth") = kDefaultMaxDepth);
  m.def("gamma_dyadic", &gamma_dyadic, py::arg("measure"), py::arg("a"), py::arg("n_cells"));
  m.def("min_dyadic_cardinality", &min_dyadic_cardinality, py::arg("measure"), py::arg("a"), py::arg("t"),
        py::arg("max_depth"), py::arg("max_cells"));
  m.def("entropy_estimate", [](const MeasureSpec& s, double a, const std::vector<double>& thresholds) {
    const auto fit = entropy_estimate(s, a, thresholds);
    std::vector<std::size_t> card;
    for (const auto& smp : fit.samples) card.push_back(smp.cardinality);
    py::dict d;
    d["slope"] = fit.slope();
    d["stderr"] = fit.fit.slope_stderr;
    d["cardinalities"] = card;
    return d;
  }, py::arg("measure"), py::arg("a"), py::arg("thresholds"));

  // polynomial approximation
  m.def("kappa", &kappa, py::arg("m"), py::arg("ell"));
  m.def("project_poly", [](py::function u, unsigned level, const std::vector<std::uint64_t>& index, unsigned ell) {
    const auto p = project_poly(wrap(std::move(u)), make_cube(level, index), ell);
    return py::make_tuple(p.coefficients, p.max_moment_residual);
  }, py::arg("u"), py::arg("level"), py::arg("index"), py::arg("ell"));
  m.def("width_upper_sequence", [](const MeasureSpec& s, double p, double q, double ell, const std::vector<std::size_t>& cells) {
    const auto seq = width_upper_sequence(s, OrderParams{p, q, ell, static_cast<double>(dimension(s))}, cells);
    py::list pts;
    for (const auto& pt : seq.points) pts.append(py::make_tuple(pt.dimension, pt.bound));
    py::dict d;
    d["points"] = pts;
    d["slope"] = seq.fit.slope;
    return d;
  }, py::arg("measure"), py::arg("p"), py::arg("q"), py::arg("ell"), py::arg("cells"));

  // Krein-Feller strings
  m.def("eigenvalues", [](const MeasureSpec& s, unsigned level) {
    py::gil_scoped_release release;
    return solve_eigen(discretize(s, level), false).eigenvalues;
  }, py::arg("measure"), py::arg("level") = 8);
  m.def("string_eigenvalues", [](const std::vector<double>& points, const std::vector<double>& weights) {
    AtomicApprox a{points, weights, "atomic", std::nullopt};
    py::gil_scoped_release release;
    return solve_eigen(a, false).eigenvalues;
  }, py::arg("points"), py::arg("weights"));
  m.def("order_fit", [](const MeasureSpec& s, const std::vector<unsigned>& levels, std::size_t first, std::size_t last) {
    OrderFit fit;
    {
      py::gil_scoped_release release;
      fit = order_fit(s, levels, IndexWindow{first, last});
    }
    py::dict d;
    d["slope"] = fit.slope;
    d["stderr"] = fit.slope_stderr;
    d["drift"] = fit.drift;
    d["s1_hat"] = fit.s1_hat;
    d["target"] = fit.target;
    return d;
  }, py::arg("measure"), py::arg("levels"), py::arg("first") = 5, py::arg("last") = 0);
  m.def("split_counting_check", [](const MeasureSpec& s, unsigned level, const std::vector<double>& cuts,
                                   const std::vector<double>& xs) {
    SandwichReport rep;
    {
      py::gil_scoped_release release;
      rep = split_counting_check(discretize(s, level), cuts, xs);
    }
    py::list rows;
    for (const auto& r : rep.rows) rows.append(py::make_tuple(r.x, r.full, r.split_sum, r.gap));
    py::dict d;
    d["ok"] = rep.ok;
    d["rows"] = rows;
    return d;
  }, py::arg("measure"), py::arg("level"), py::arg("cuts"), py::arg("x_grid"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
}
