#include "holocyc/averaging.hpp"
#include "holocyc/core.hpp"
#include "holocyc/flow.hpp"
#include "holocyc/lyapunov.hpp"
#include "holocyc/rigor.hpp"

#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace holocyc;

namespace {

// Boxes and certificates cross the boundary as JSON text, like on the command line.
std::vector<MirandaCertificate> verify_boxes(const PiecewiseSystem& s, const std::string& boxes, int bits)
{
    CrossingEquations eq = crossing_equations(s);
    std::vector<MirandaCertificate> out;
    for (const BoxSpec& b : parse_boxes(boxes)) {
        auto params = b.faces ? *b.faces : default_face_params(eq, b.box);
        out.push_back(miranda_verify(eq, b.box, params, bits));
    }
    return out;
}

} // namespace

PYBIND11_MODULE(_holocyc, m)
{
    m.doc() = "Limit cycles of piecewise holomorphic systems split at Im z = 0.";

    py::enum_<Side>(m, "Side").value("upper", Side::upper).value("lower", Side::lower);
    py::enum_<Stability>(m, "Stability")
        .value("attracting", Stability::attracting)
        .value("repelling", Stability::repelling)
        .value("nonhyperbolic", Stability::nonhyperbolic);

    py::class_<HoloPoly>(m, "HoloPoly")
        .def(py::init<std::vector<Complex>>())
        .def_readonly("coeffs", &HoloPoly::coeffs)
        .def("degree", &HoloPoly::degree)
        .def("__call__", &HoloPoly::operator());

    py::class_<PiecewiseSystem>(m, "PiecewiseSystem")
        .def(py::init([](std::vector<Complex> up, std::vector<Complex> lo) {
                 return PiecewiseSystem{HoloPoly(std::move(up)), HoloPoly(std::move(lo))};
             }),
             py::arg("upper"), py::arg("lower"))
        .def_readonly("upper", &PiecewiseSystem::upper)
        .def_readonly("lower", &PiecewiseSystem::lower)
        .def("has_exact", &PiecewiseSystem::has_exact)
        .def("to_json", &serialize_system);

    m.def("parse_system", &parse_system, py::arg("text"));
    m.def("load_system", &load_system, py::arg("path"));
    m.def("invert_at_infinity", &invert_at_infinity);

    py::class_<FlowOptions>(m, "FlowOptions")
        .def(py::init<>())
        .def_readwrite("rtol", &FlowOptions::rtol)
        .def_readwrite("atol", &FlowOptions::atol)
        .def_readwrite("event_tol", &FlowOptions::event_tol)
        .def_readwrite("max_time", &FlowOptions::max_time)
        .def_readwrite("escape_radius", &FlowOptions::escape_radius);

    py::class_<CycleRecord>(m, "CycleRecord")
        .def_readonly("section_point", &CycleRecord::section_point)
        .def_readonly("period", &CycleRecord::period)
        .def_readonly("floquet_slope", &CycleRecord::floquet_slope)
        .def_readonly("stability", &CycleRecord::stability)
        .def_readonly("residual", &CycleRecord::residual);
    py::class_<CycleScan>(m, "CycleScan")
        .def_readonly("cycles", &CycleScan::cycles)
        .def_readonly("failures", &CycleScan::failures);

    m.def("return_map", &return_map, py::arg("system"), py::arg("x"), py::arg("options") = FlowOptions{});
    m.def("displacement", &displacement, py::arg("system"), py::arg("x"), py::arg("options") = FlowOptions{});
    m.def("find_cycles", &find_cycles, py::arg("system"), py::arg("x_min"), py::arg("x_max"), py::arg("grid") = 400,
          py::arg("options") = FlowOptions{});

    py::class_<LyapunovVector>(m, "LyapunovVector")
        .def_readonly("V", &LyapunovVector::V)
        .def_readonly("first_nonzero", &LyapunovVector::first_nonzero)
        .def_readonly("defined_through", &LyapunovVector::defined_through);
    m.def("lyapunov_quantities", &lyapunov_quantities, py::arg("system"), py::arg("zero_tol") = 1e-9);
    m.def("weak_focus_order", &weak_focus_order, py::arg("system"), py::arg("tol") = 1e-9);
    m.def("unfolding_jacobian",
          py::overload_cast<const Family&, int, const std::vector<double>&>(&unfolding_jacobian), py::arg("family"),
          py::arg("k"), py::arg("steps"));

    py::class_<RealPoly>(m, "RealPoly")
        .def(py::init<std::vector<double>>())
        .def_readonly("coeffs", &RealPoly::coeffs)
        .def("__call__", &RealPoly::operator());
    py::class_<PerturbationPair>(m, "PerturbationPair")
        .def(py::init([](std::vector<std::pair<double, double>> up, std::vector<std::pair<double, double>> lo) {
                 return PerturbationPair{std::move(up), std::move(lo)};
             }),
             py::arg("upper"), py::arg("lower"))
        .def_readonly("upper", &PerturbationPair::upper)
        .def_readonly("lower", &PerturbationPair::lower);
    m.def("averaged_M1", &averaged_M1);
    m.def("averaged_M2", &averaged_M2, py::arg("perturbation"), py::arg("tol") = 1e-12);
    m.def("positive_zeros", &positive_zeros);
    m.def("descartes_bound", &descartes_bound);
    m.def("realize_zeros", &realize_zeros, py::arg("targets"), py::arg("n_plus"), py::arg("n_minus"),
          py::arg("order"));
    m.def("perturbed_system", &perturbed_system, py::arg("perturbation"), py::arg("eps"));

    py::class_<MirandaCertificate>(m, "MirandaCertificate")
        .def_readonly("certified", &MirandaCertificate::certified)
        .def_readonly("failure", &MirandaCertificate::failure);
    m.def("verify_boxes", &verify_boxes, py::arg("system"), py::arg("boxes_json"), py::arg("precision_bits") = 128);
    m.def("certificate_json", &certificate_json);
    m.def("reverify", [](const std::string& text) {
        ReverifyResult r = reverify(text);
        return py::make_tuple(r.ok, r.mismatches);
    });
}
