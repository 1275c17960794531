#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sbmkit/cli.hpp"
#include "sbmkit/estimators.hpp"
#include "sbmkit/fluctuation.hpp"
#include "sbmkit/kernels.hpp"
#include "sbmkit/laplace.hpp"
#include "sbmkit/quadrature.hpp"
#include "sbmkit/simulate.hpp"

namespace py = pybind11;
using namespace sbmkit;

namespace {

BernsteinFamily make_family(const std::string& key, double alpha, std::optional<double> beta) {
    return BernsteinFamily(parse_family(key), alpha, beta);
}

}  // namespace

PYBIND11_MODULE(_sbmkit, m) {
    m.doc() = "Subordinate Brownian motion toolkit: Bernstein functions, kernels, Monte Carlo verifiers";
    m.attr("__version__") = version();

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<QuadratureError>(m, "QuadratureError", PyExc_RuntimeError);
    py::register_exception<InversionError>(m, "InversionError", PyExc_RuntimeError);
    py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

    py::class_<BernsteinFamily>(m, "Family")
        .def(py::init(&make_family), py::arg("key"), py::arg("alpha"), py::arg("beta") = py::none())
        .def_property_readonly("key", [](const BernsteinFamily& f) { return family_key(f.kind()); })
        .def_property_readonly("alpha", &BernsteinFamily::alpha)
        .def_property_readonly("beta", &BernsteinFamily::beta)
        .def("phi", [](const BernsteinFamily& f, double l) { return phi(f, l); }, py::arg("lam"))
        .def("ell", [](const BernsteinFamily& f, double l) { return ell(f, l); }, py::arg("lam"))
        .def("phi_inverse", [](const BernsteinFamily& f, double v) { return phi_inverse(f, v); }, py::arg("value"))
        .def("__repr__", &BernsteinFamily::describe);

    py::class_<SubordinatorModel>(m, "Subordinator")
        .def(py::init([](const BernsteinFamily& f) { return SubordinatorModel(f); }), py::arg("family"))
        .def("potential_density", &SubordinatorModel::potential_density, py::arg("t"))
        .def("levy_density", &SubordinatorModel::levy_density, py::arg("t"));

    py::class_<LadderData>(m, "Ladder")
        .def(py::init([](const BernsteinFamily& f) { return LadderData(f); }), py::arg("family"))
        .def("chi", &LadderData::chi, py::arg("lam"))
        .def("rho", &LadderData::rho, py::arg("lam"))
        .def("potential",
             [](const LadderData& l, double x) {
                 const auto p = l.potential(x);
                 return py::make_tuple(p.V, p.v);
             },
             py::arg("x"), "(V(x), v(x)) of the ladder height potential")
        .def("halfline_green", [](const LadderData& l, double x, double y) { return halfline_green(l, x, y); },
             py::arg("x"), py::arg("y"));

    py::class_<KernelEvaluator>(m, "Kernels")
        .def(py::init([](const BernsteinFamily& f, int d) { return KernelEvaluator(SubordinatorModel(f), d); }),
             py::arg("family"), py::arg("d"))
        .def("green", py::overload_cast<double>(&KernelEvaluator::green, py::const_), py::arg("r"))
        .def("jump", py::overload_cast<double>(&KernelEvaluator::jump, py::const_), py::arg("r"))
        .def("green_predicted", &KernelEvaluator::green_predicted, py::arg("r"))
        .def("jump_predicted", &KernelEvaluator::jump_predicted, py::arg("r"));

    m.def("stable_ball_exit_time", &stable_ball_exit_time, py::arg("alpha"), py::arg("d"), py::arg("r"),
          py::arg("x_norm"));
    m.def("stable_ball_green", &stable_ball_green, py::arg("alpha"), py::arg("d"), py::arg("r"), py::arg("x"),
          py::arg("y"));

    m.def("commands", &command_names);
    // The JSON document crosses the boundary as text; the Python side parses it.
    m.def(
        "_execute",
        [](const std::string& command, const std::string& params) {
            const auto cfg = resolve_config(command, nlohmann::json::parse(params), nlohmann::json::object());
            RunResult r;
            {
                py::gil_scoped_release release;
                r = execute(cfg);
            }
            return py::make_tuple(r.document.dump(), r.pass, to_csv(r));
        },
        py::arg("command"), py::arg("params"));
}
