#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kslab/cutoff.hpp"
#include "kslab/energy.hpp"
#include "kslab/experiment.hpp"
#include "kslab/fields.hpp"
#include "kslab/initial_data.hpp"
#include "kslab/solver.hpp"

namespace py = pybind11;
using namespace kslab;

namespace {

py::array_t<double> to_array(std::span<const double> v) { return py::array_t<double>(v.size(), v.data()); }

py::dict check_dict(const Check& c)
{
    py::dict d;
    d["name"] = c.name;
    d["asserted"] = c.asserted;
    d["passed"] = c.passed;
    d["value"] = c.value;
    d["threshold"] = c.threshold;
    d["note"] = c.note;
    return d;
}

py::list checks_list(const std::vector<Check>& checks)
{
    py::list out;
    for (const auto& c : checks) out.append(check_dict(c));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Radial Keller-Segel laboratory in mass-accumulation variables";

    py::enum_<Grading>(m, "Grading")
        .value("uniform_in_r", Grading::uniform_in_r)
        .value("uniform_in_s", Grading::uniform_in_s)
        .value("log", Grading::log);

    py::enum_<DatumFamily>(m, "DatumFamily")
        .value("pinched_chandrasekhar", DatumFamily::pinched_chandrasekhar)
        .value("scaled_chandrasekhar", DatumFamily::scaled_chandrasekhar)
        .value("compact_bump", DatumFamily::compact_bump)
        .value("zero", DatumFamily::zero);

    py::enum_<Formulation>(m, "Formulation").value("w_form", Formulation::w_form).value("phi_form", Formulation::phi_form);

    m.def("w_star", &w_star, py::arg("n"), py::arg("s"));
    m.def("u_star", &u_star, py::arg("n"), py::arg("r"));
    m.def("chi", &chi, py::arg("t"));
    m.def("zeta", &zeta, py::arg("eps"), py::arg("s"));
    m.def("k_chi", &k_chi);

    py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
        .def_property_readonly("dimension", &Mesh::dimension)
        .def_property_readonly("grading", &Mesh::grading)
        .def_property_readonly("intervals", &Mesh::intervals)
        .def_property_readonly("s_max", &Mesh::s_max)
        .def_property_readonly("r_max", &Mesh::r_max)
        .def_property_readonly("s", [](const Mesh& mesh) { return to_array(mesh.s()); })
        .def_property_readonly("r", [](const Mesh& mesh) { return to_array(mesh.r()); })
        .def("__len__", &Mesh::size);

    m.def(
        "build_mesh",
        [](int n, double s_max, std::size_t intervals, Grading grading) {
            return std::const_pointer_cast<Mesh>(build_mesh(n, s_max, intervals, grading));
        },
        py::arg("n"), py::arg("s_max"), py::arg("intervals"), py::arg("grading") = Grading::uniform_in_r);

    py::class_<InitialDatumSpec>(m, "InitialDatumSpec")
        .def(py::init<>())
        .def_readwrite("n", &InitialDatumSpec::n)
        .def_readwrite("family", &InitialDatumSpec::family)
        .def_readwrite("theta", &InitialDatumSpec::theta)
        .def_readwrite("C", &InitialDatumSpec::C)
        .def_readwrite("a", &InitialDatumSpec::a)
        .def_readwrite("radius", &InitialDatumSpec::radius)
        .def_readwrite("cap", &InitialDatumSpec::cap);

    m.def(
        "make_datum",
        [](const std::shared_ptr<Mesh>& mesh, const InitialDatumSpec& spec) {
            return to_array(make_datum(mesh, spec).values);
        },
        py::arg("mesh"), py::arg("spec"), "Density samples u0(r_j) of the datum on the mesh.");

    m.def(
        "simulate",
        [](const std::shared_ptr<Mesh>& mesh, const InitialDatumSpec& spec, double t_end, std::size_t output_count,
           Formulation formulation, double accuracy_tol) {
            SolverConfig cfg;
            cfg.output_count = output_count;
            cfg.formulation = formulation;
            cfg.accuracy_tol = accuracy_tol;
            Trajectory tr;
            {
                py::gil_scoped_release release;
                tr = run(make_datum(mesh, spec), cfg, t_end);
            }
            py::array_t<double> w({tr.snapshots.size(), mesh->size()});
            auto view = w.mutable_unchecked<2>();
            for (std::size_t k = 0; k < tr.snapshots.size(); ++k)
                for (std::size_t j = 0; j < mesh->size(); ++j) view(k, j) = tr.snapshots[k].values[j];
            py::dict out;
            out["t"] = to_array(tr.times());
            out["w"] = w;
            out["status"] = tr.status;
            out["exploded"] = tr.exploded;
            out["steps"] = tr.dt_stats.steps;
            return out;
        },
        py::arg("mesh"), py::arg("spec"), py::arg("t_end"), py::arg("output_count") = 50,
        py::arg("formulation") = Formulation::w_form, py::arg("accuracy_tol") = 1e-5,
        "Integrates the datum to t_end; returns times, mass snapshots w[k, j] and the run status.");

    py::class_<EnergyParams>(m, "EnergyParams")
        .def(py::init<>())
        .def(py::init([](double p, double gamma, double alpha, double eps) { return EnergyParams{p, gamma, alpha, eps}; }),
             py::arg("p"), py::arg("gamma"), py::arg("alpha"), py::arg("eps") = 0.0)
        .def_readwrite("p", &EnergyParams::p)
        .def_readwrite("gamma", &EnergyParams::gamma)
        .def_readwrite("alpha", &EnergyParams::alpha)
        .def_readwrite("eps", &EnergyParams::eps);

    m.def(
        "admissibility",
        [](int n, const EnergyParams& q) {
            const auto f = admissibility(n, q);
            py::dict d;
            d["gamma_above_floor"] = f.gamma_above_floor;
            d["p_above_one"] = f.p_above_one;
            d["origin_layer_decay"] = f.origin_layer_decay;
            d["tail_weight"] = f.tail_weight;
            d["p_in_window"] = f.p_in_window;
            d["all"] = f.all();
            return d;
        },
        py::arg("n"), py::arg("params"));
    m.def("p_bounds", &p_bounds, py::arg("n"), py::arg("gamma"));
    m.def("theta_threshold", &theta_threshold, py::arg("n"));
    m.def("select_params", &select_params, py::arg("n"), py::arg("theta"));
    m.def(
        "hardy_check",
        [](const std::vector<double>& s, const std::vector<double>& psi, double beta) {
            const auto h = hardy_check(s, psi, beta);
            return py::make_tuple(h.lhs, h.rhs, h.holds);
        },
        py::arg("s"), py::arg("psi"), py::arg("beta"), "Returns (lhs, rhs, holds).");

    m.def(
        "run_experiment",
        [](const std::string& config_text, const std::string& out_dir) {
            const auto cfg = experiment_from_config(KeyValueConfig::parse_string(config_text));
            ExperimentResult res;
            {
                py::gil_scoped_release release;
                res = run_experiment(cfg);
                if (!out_dir.empty()) write_artifacts(res, out_dir);
            }
            py::dict d;
            d["verdict"] = res.verdict;
            d["growth_ratio"] = res.growth_ratio;
            d["entry_time"] = res.entry_time ? py::cast(*res.entry_time) : py::none();
            d["plateau"] = res.plateau;
            d["checks"] = checks_list(res.checks);
            d["all_asserted_pass"] = res.all_asserted_pass();
            d["summary_json"] = res.summary_json();
            return d;
        },
        py::arg("config_text"), py::arg("out_dir") = "",
        "Runs an experiment described by key-value config text; writes artifacts when out_dir is given.");
}
