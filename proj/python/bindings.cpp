#include "lattice_lab/analysis.hpp"
#include "lattice_lab/config.hpp"
#include "lattice_lab/errors.hpp"
#include "lattice_lab/fpe_solver.hpp"
#include "lattice_lab/model.hpp"
#include "lattice_lab/runner.hpp"
#include "lattice_lab/symmetry.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace lattice_lab;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Optical-lattice Fokker-Planck model, symmetry checks and solver";

    static py::exception<ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
    static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            validation_error(e.what());
        } catch (const NumericalError& e) {
            numerical_error(e.what());
        }
    });

    py::class_<LatticeParams>(m, "LatticeParams")
        .def(py::init<double, double, double, double>(), py::arg("alpha"), py::arg("gamma0"), py::arg("gamma1"),
             py::arg("p_c"))
        .def_property_readonly("alpha", &LatticeParams::alpha)
        .def_property_readonly("gamma0", &LatticeParams::gamma0)
        .def_property_readonly("gamma1", &LatticeParams::gamma1)
        .def_property_readonly("p_c", &LatticeParams::p_c)
        .def("__repr__", [](const LatticeParams& p) {
            std::ostringstream os;
            os << "LatticeParams(alpha=" << p.alpha() << ", gamma0=" << p.gamma0() << ", gamma1=" << p.gamma1()
               << ", p_c=" << p.p_c() << ")";
            return os.str();
        });

    py::enum_<Regime>(m, "Regime")
        .value("NormalDiffusion", Regime::NormalDiffusion)
        .value("AnomalousDiffusion", Regime::AnomalousDiffusion)
        .value("NonNormalizable", Regime::NonNormalizable)
        .value("BoundaryAnomalousOnset", Regime::BoundaryAnomalousOnset)
        .value("BoundaryNormalizability", Regime::BoundaryNormalizability);
    m.def("classify_regime", &classify_regime, py::arg("q"));

    py::class_<DerivedParams>(m, "DerivedParams")
        .def_property_readonly("beta", &DerivedParams::beta)
        .def_property_readonly("delta", &DerivedParams::delta)
        .def_property_readonly("q", &DerivedParams::q)
        .def_property_readonly("mu", &DerivedParams::mu)
        .def_property_readonly("Z", &DerivedParams::Z)
        .def_property_readonly("nu", &DerivedParams::nu)
        .def_property_readonly("k", &DerivedParams::k)
        .def_property_readonly("regime", &DerivedParams::regime);
    m.def("derive_params", &derive_params, py::arg("params"));
    m.def("tsallis_density", &tsallis_density, py::arg("p"), py::arg("d"));
    m.def("stationary_second_moment", &stationary_second_moment, py::arg("d"));
    m.def("normalization_Z", [](const LatticeParams& p) {
        const NormalizationResult r = normalization_Z(p);
        return py::dict(py::arg("quadrature") = r.quadrature, py::arg("closed_form") = r.closed_form,
                        py::arg("relative_difference") = r.relative_difference);
    });

    py::class_<Grid>(m, "Grid")
        .def(py::init<double, std::size_t>(), py::arg("p_max"), py::arg("n"))
        .def_property_readonly("p_max", &Grid::p_max)
        .def_property_readonly("dp", &Grid::dp)
        .def_property_readonly("centers", [](const Grid& g) {
            return std::vector<double>(g.centers().begin(), g.centers().end());
        });

    py::class_<Field>(m, "Field")
        .def_readonly("grid", &Field::grid)
        .def_readonly("t", &Field::t)
        .def_readonly("values", &Field::values)
        .def("mass", &Field::mass);

    py::enum_<Method>(m, "Method")
        .value("ChangCooper", Method::ChangCooper)
        .value("CentralCrankNicolson", Method::CentralCrankNicolson);

    py::class_<SchemeConfig>(m, "SchemeConfig")
        .def(py::init([](Method method, double dt, double theta) { return SchemeConfig{method, dt, theta}; }),
             py::arg("method") = Method::ChangCooper, py::arg("dt") = 0.01, py::arg("theta") = 1.0)
        .def_readwrite("method", &SchemeConfig::method)
        .def_readwrite("dt", &SchemeConfig::dt)
        .def_readwrite("theta", &SchemeConfig::theta);

    m.def("gaussian_state", [](const Grid& g, double width) { return init_state(g, GaussianProfile{width}); },
          py::arg("grid"), py::arg("width") = 1.0);
    m.def("stationary_state", [](const Grid& g, const DerivedParams& d) { return init_state(g, TsallisProfile{d}); },
          py::arg("grid"), py::arg("d"));
    m.def("custom_state",
          [](const Grid& g, std::vector<double> values) { return init_state(g, CustomProfile{std::move(values)}); },
          py::arg("grid"), py::arg("values"));

    m.def(
        "evolve",
        [](const Field& state, const LatticeParams& params, const SchemeConfig& cfg, double t_end,
           std::size_t sample_every) {
            EvolveOptions opts;
            opts.t_end = t_end;
            opts.sample_every = sample_every;
            py::gil_scoped_release release;
            return evolve(state, params, cfg, opts);
        },
        py::arg("state"), py::arg("params"), py::arg("scheme") = SchemeConfig{}, py::arg("t_end") = 1.0,
        py::arg("sample_every") = 100);

    py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
        .def_readonly("t", &TrajectoryRecord::t)
        .def_readonly("mass", &TrajectoryRecord::mass)
        .def_readonly("m2", &TrajectoryRecord::m2)
        .def_readonly("l1_to_w0", &TrajectoryRecord::l1_to_w0)
        .def_readonly("stat_residual", &TrajectoryRecord::stat_residual);

    py::class_<EvolveResult>(m, "EvolveResult")
        .def_readonly("final_state", &EvolveResult::final_state)
        .def_readonly("records", &EvolveResult::records)
        .def_readonly("steps", &EvolveResult::steps)
        .def_readonly("dt_used", &EvolveResult::dt_used)
        .def_readonly("max_edge_mass_fraction", &EvolveResult::max_edge_mass_fraction)
        .def_readonly("truncation_time_estimate", &EvolveResult::truncation_time_estimate);

    m.def("stationarity_residual", &stationarity_residual, py::arg("state"), py::arg("params"));

    py::class_<GeneratorSpec>(m, "GeneratorSpec")
        .def(py::init([](double sigma, double nu, double delta) { return GeneratorSpec{sigma, nu, delta}; }),
             py::arg("sigma"), py::arg("nu"), py::arg("delta"))
        .def_static("canonical", &GeneratorSpec::canonical, py::arg("d"), py::arg("sigma") = -2.0)
        .def_readonly("sigma", &GeneratorSpec::sigma)
        .def_readonly("nu", &GeneratorSpec::nu)
        .def_readonly("delta", &GeneratorSpec::delta);

    py::class_<ResidualCoeffs>(m, "ResidualCoeffs")
        .def_readonly("a0", &ResidualCoeffs::a0)
        .def_readonly("a1", &ResidualCoeffs::a1)
        .def_readonly("a2", &ResidualCoeffs::a2)
        .def_readonly("a11", &ResidualCoeffs::a11);

    m.def("extract_A", &extract_A, py::arg("p"), py::arg("t"), py::arg("w"), py::arg("params"), py::arg("gen"));
    m.def("closed_A2", &closed_A2, py::arg("p"), py::arg("params"), py::arg("sigma"));
    m.def(
        "closed_A",
        [](double p, double w, const LatticeParams& params, const GeneratorSpec& gen) {
            return closed_A(p, w, params, gen);
        },
        py::arg("p"), py::arg("w"), py::arg("params"), py::arg("gen"));
    m.def(
        "flow_map",
        [](double p0, double w0, double s, const GeneratorSpec& gen) {
            const FlowPoint f = flow_map(p0, w0, s, gen);
            return py::make_tuple(f.p, f.w);
        },
        py::arg("p0"), py::arg("w0"), py::arg("s"), py::arg("gen"));

    py::class_<TailFit>(m, "TailFit")
        .def_readonly("k_hat", &TailFit::k_hat)
        .def_readonly("r2", &TailFit::r2)
        .def_property_readonly("tail_class", [](const TailFit& t) { return std::string(to_string(t.tail_class)); });
    m.def("tail_exponent", &tail_exponent, py::arg("state"));

    py::class_<VariationReport>(m, "VariationReport")
        .def_readonly("i_phi", &VariationReport::i_phi)
        .def_readonly("i_scale", &VariationReport::i_scale)
        .def_readonly("i_flux", &VariationReport::i_flux)
        .def_readonly("total", &VariationReport::total)
        .def_readonly("finite_phi", &VariationReport::finite_phi)
        .def_readonly("non_normalizable_variation", &VariationReport::non_normalizable_variation);
    m.def("variation_integrals", &variation_integrals, py::arg("state"), py::arg("params"), py::arg("d"));

    m.def(
        "run",
        [](const std::string& command, const std::string& config_json, const std::string& out_dir, unsigned threads) {
            const RunConfig cfg = validate_config(std::string_view(config_json));
            RunOptions opts;
            opts.out_dir = out_dir;
            opts.threads = threads;
            std::ostringstream out;
            std::ostringstream err;
            const RunResult r = run(parse_command(command), cfg, opts, out, err);
            return py::dict(py::arg("exit_code") = r.exit_code, py::arg("run_dir") = r.run_dir.string(),
                            py::arg("stdout") = out.str(), py::arg("stderr") = err.str());
        },
        py::arg("command"), py::arg("config_json"), py::arg("out_dir"), py::arg("threads") = 1);

    m.attr("__version__") = LATTICE_LAB_VERSION;
}
