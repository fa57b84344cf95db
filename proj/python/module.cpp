#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "synth/array_model.hpp"
#include "synth/emit.hpp"
#include "synth/errors.hpp"
#include "synth/hankel.hpp"
#include "synth/pencil.hpp"
#include "synth/sampling.hpp"
#include "synth/scenario.hpp"

namespace py = pybind11;
using namespace synth;

namespace {

sampling::SampleSet to_sample_set(const Eigen::VectorXcd& x) {
    if (x.size() < 3 || x.size() % 2 == 0)
        throw synth::config_error(
            "sample vector must have odd length >= 3 (n = -N..N)");
    sampling::SampleSet s;
    s.x = x;
    s.N = static_cast<int>((x.size() - 1) / 2);
    s.delta = 1.0 / s.N;
    return s;
}

array_model::Excitation to_excitation(const Eigen::VectorXcd& w) {
    array_model::Excitation exc;
    exc.weights = w;
    return exc;
}

py::dict solution_dict(const pencil::SparseArraySolution& sol) {
    py::dict d;
    d["R"] = sol.R;
    d["positions"] = sol.positions;
    d["weights"] = sol.weights;
    d["radial_deviation"] = sol.radial_deviation;
    d["ls_residual"] = sol.ls_residual;
    d["rank_warning"] = sol.rank_warning;
    return d;
}

}  // namespace

PYBIND11_MODULE(_synth, m) {
    m.doc() = "sparse linear array synthesis: Chebyshev reference patterns, "
              "Hankel rank tools, matrix-pencil extraction, and the full "
              "completion pipeline driven by a JSON config";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const synth::config_error& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const synth::io_error& e) {
            PyErr_SetString(PyExc_OSError, e.what());
        } catch (const synth::infeasible_error& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        } catch (const synth::solver_error& e) {
            PyErr_SetString(PyExc_RuntimeError, e.what());
        }
    });

    m.def("chebyshev_taper", &array_model::dolph_chebyshev_taper,
          py::arg("elements"), py::arg("sll_db"),
          "Dolph-Chebyshev weights (max-normalized) for a uniform "
          "half-wavelength array.");

    m.def(
        "sample_reference",
        [](const std::vector<double>& positions_wl,
           const Eigen::VectorXcd& weights, int N) {
            array_model::ElementLayout layout{positions_wl};
            return sampling::sample_reference(layout, to_excitation(weights),
                                              N)
                .x;
        },
        py::arg("positions_wl"), py::arg("weights"), py::arg("N"),
        "Pattern samples x(n) = F(n/N) for n = -N..N; enforces the Nyquist "
        "bound on the aperture.");

    m.def(
        "hankel_rank",
        [](const Eigen::VectorXcd& x, int L, double tau) {
            to_sample_set(x);  // shape validation only
            return hankel::numerical_rank(hankel::hankelize(x, L), tau).rank;
        },
        py::arg("x"), py::arg("L"), py::arg("tau") = 1e-3,
        "Numerical rank of the (2N-L+1) x (L+1) hankelization of x at the "
        "relative singular-value threshold tau.");

    m.def(
        "matrix_pencil",
        [](const Eigen::VectorXcd& x, int L, std::optional<int> R,
           double sigma_ratio) {
            const auto samples = to_sample_set(x);
            const hankel::HankelSpec spec{samples.N, L};
            return solution_dict(
                pencil::baseline_mpm(samples, spec, R, sigma_ratio));
        },
        py::arg("x"), py::arg("L"), py::arg("R") = std::nullopt,
        py::arg("sigma_ratio") = 1e-2,
        "Classical matrix-pencil extraction from samples x (n = -N..N): "
        "element positions, complex weights, and the least-squares residual. "
        "R overrides the automatic model-order pick.");

    m.def(
        "run_config",
        [](const std::string& json_text) {
            const auto config = scenario::parse_config(json_text);
            const auto report = scenario::run_scenario(config);
            return emit::render_results_json(report);
        },
        py::arg("config_json"),
        "Run a full scenario from JSON text and return the results document "
        "(same content the CLI writes to results.json).");

    m.def(
        "validate_config",
        [](const std::string& json_text) {
            const auto c = scenario::parse_config(json_text);
            py::dict d;
            d["elements"] = c.elements;
            d["samples"] = c.samples;
            d["pencil_L"] = c.pencil_L;
            d["iterations"] = c.iterations;
            d["method"] = scenario::to_string(c.method);
            return d;
        },
        py::arg("config_json"),
        "Strict-parse a scenario config; raises ValueError on any schema or "
        "invariant violation.");
}
