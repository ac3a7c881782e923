#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "rpl/cli.hpp"
#include "rpl/config.hpp"
#include "rpl/error.hpp"
#include "rpl/gauss.hpp"
#include "rpl/harness.hpp"
#include "rpl/supconv.hpp"

namespace py = pybind11;
using namespace rpl;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Grid make_grid(const std::vector<double>& lo, const std::vector<double>& hi, const std::vector<int>& n) {
  return Grid::make(lo, hi, n);
}

GridFunction to_function(const Grid& g, const Array& values) {
  if (static_cast<std::size_t>(values.size()) != g.size()) {
    throw InvalidArgument("expected " + std::to_string(g.size()) + " values, got " + std::to_string(values.size()));
  }
  return GridFunction(g, std::vector<double>(values.data(), values.data() + values.size()));
}

Array to_array(const GridFunction& f) {
  const Grid& g = f.grid();
  std::vector<py::ssize_t> shape;
  if (g.dim() == 1) shape = {g.n(0)};
  else shape = {g.n(0), g.n(1)};
  Array out(shape);
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

ExtendedReal extended(double p) { return ExtendedReal::from_double(p); }

SupconvMethod method_of(const std::string& m) {
  if (m == "auto") return SupconvMethod::Auto;
  if (m == "direct") return SupconvMethod::Direct;
  if (m == "levelset") return SupconvMethod::LevelSet;
  throw InvalidArgument("unknown method '" + m + "'");
}

ChainOptions options_of(const std::string& method) {
  ChainOptions o;
  o.method = method_of(method);
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Rearrangements, sup-convolutions and functional inequality chains on grids";

  auto& error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const DomainError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::class_<Grid>(m, "Grid")
      .def(py::init(&make_grid), py::arg("lo"), py::arg("hi"), py::arg("n"))
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("size", &Grid::size)
      .def("spacing", &Grid::spacing, py::arg("axis") = 0)
      .def("centers", [](const Grid& g, int axis) {
        std::vector<double> c(static_cast<std::size_t>(g.n(axis)));
        for (int k = 0; k < g.n(axis); ++k) c[static_cast<std::size_t>(k)] = g.center(axis, k);
        return c;
      }, py::arg("axis") = 0)
      .def("__repr__", &Grid::describe);

  py::class_<RearrangementSpec>(m, "Rearrangement")
      .def_static("ball", [](const Grid& source, std::optional<Grid> target) {
        return RearrangementSpec::convex_body(ConvexBody::ball(1.0, source.dim()), source, target);
      }, py::arg("source"), py::arg("target") = py::none())
      .def_static("box", [](const Grid& source, std::vector<double> halfwidths, std::optional<Grid> target) {
        Point hw{halfwidths.at(0), halfwidths.size() > 1 ? halfwidths[1] : 1.0};
        return RearrangementSpec::convex_body(ConvexBody::box(hw, source.dim()), source, target);
      }, py::arg("source"), py::arg("halfwidths"), py::arg("target") = py::none())
      .def_static("gaussian_half_space", &RearrangementSpec::gaussian_half_space, py::arg("source"), py::arg("target"))
      .def_property_readonly("source", &RearrangementSpec::source)
      .def_property_readonly("target", &RearrangementSpec::target)
      .def("__repr__", &RearrangementSpec::describe);

  m.def("phi", py::vectorize(gauss_phi), "Standard normal distribution function.");
  m.def("phi_inv", py::vectorize(gauss_phi_inv), "Inverse of phi on (0, 1).");

  m.def("integrate", [](const Grid& g, const Array& f, const std::string& measure) {
    return integrate(to_function(g, f), measure == "gaussian" ? MeasureSpec::gaussian() : MeasureSpec::lebesgue());
  }, py::arg("grid"), py::arg("f"), py::arg("measure") = "lebesgue");

  m.def("rearrange", [](const RearrangementSpec& spec, const Array& f) {
    GridFunction fn = to_function(spec.source(), f);
    if (fn.is_zero()) return to_array(GridFunction(spec.target()));
    return to_array(rearrange_function(fn, spec, threshold_ladder(fn, AllValues{}, spec.source_measure())));
  }, py::arg("spec"), py::arg("f"), "Rearrangement f* on the target grid over the all-values ladder.");

  m.def("sup_convolve", [](const Grid& g, const Array& f, const Array& h, double t, double p, const Grid& out,
                           const std::string& method) {
    const GridFunction pair[2] = {to_function(g, f), to_function(g, h)};
    SupconvOptions o;
    o.method = method_of(method);
    return to_array(sup_convolve(pair, PMean{extended(p), {1.0 - t, t}}, ComboMap{{1.0 - t, t}}, out, o));
  }, py::arg("grid"), py::arg("f"), py::arg("g"), py::arg("t"), py::arg("p") = 0.0, py::arg("out"),
        py::arg("method") = "auto", "sup over (1-t)x + ty = z of M_p^t(f(x), g(y)).");

  m.def("q_lambda", [](const Grid& g, const Array& f, double lambda, std::optional<Grid> out) {
    return to_array(q_lambda(to_function(g, f), lambda, out.value_or(g)));
  }, py::arg("grid"), py::arg("f"), py::arg("lam"), py::arg("out") = py::none());

  m.def("pli_chain", [](const RearrangementSpec& spec, const Array& f, const Array& g, double t,
                        const std::string& method) {
    return to_json(pli_chain(to_function(spec.source(), f), to_function(spec.source(), g), t, spec, Identity{},
                             options_of(method)));
  }, py::arg("spec"), py::arg("f"), py::arg("g"), py::arg("t"), py::arg("method") = "auto");

  m.def("bbl_chain", [](const RearrangementSpec& spec, const Array& f, const Array& g, double t, double p,
                        const std::string& method) {
    return to_json(bbl_chain(to_function(spec.source(), f), to_function(spec.source(), g), t, extended(p), spec,
                             options_of(method)));
  }, py::arg("spec"), py::arg("f"), py::arg("g"), py::arg("t"), py::arg("p"), py::arg("method") = "auto");

  m.def("lsi_chain", [](const Grid& g, const Array& f, double lambda, const Grid& target) {
    return to_json(integrated_lsi_chain(to_function(g, f), lambda, target));
  }, py::arg("grid"), py::arg("f"), py::arg("lam"), py::arg("target"));

  m.def("dominance_check", [](const Grid& g, const Array& f, double lambda, std::vector<double> levels,
                              const Grid& target) {
    return to_json(superlevel_dominance_check(to_function(g, f), lambda, levels, target));
  }, py::arg("grid"), py::arg("f"), py::arg("lam"), py::arg("levels"), py::arg("target"));

  m.def("run_config", [](const std::string& text) { return to_json(run_chain(parse_config(text))); },
        py::arg("text"), "Runs the chain of a JSON config given as text; returns the report as JSON.");
  m.def("run_convergence", [](const std::string& text) { return to_json(run_convergence(parse_config(text))); },
        py::arg("text"));
  m.def("profile_csv", [](const std::string& text) { return profile_csv(parse_config(text)); }, py::arg("text"));
}
