#include "synth/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>

#include <json.hpp>

#include "synth/errors.hpp"

namespace synth::scenario {

using json = nlohmann::json;

std::string to_string(Method m) {
    switch (m) {
        case Method::logdet: return "logdet";
        case Method::mpm: return "mpm";
        case Method::both: return "both";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    if (s == "logdet") return Method::logdet;
    if (s == "mpm") return Method::mpm;
    if (s == "both") return Method::both;
    throw synth::config_error("method must be one of logdet|mpm|both, got '" +
                              s + "'");
}

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw synth::config_error(msg);
}

void reject_unknown(const json& j,
                    std::initializer_list<const char*> allowed,
                    const char* where) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (item.key() == a) { known = true; break; }
        if (!known)
            fail("unknown key '" + item.key() + "' in " + where);
    }
}

const json& require(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) fail(std::string("missing required key '") + key + "'");
    return *it;
}

int as_int(const json& v, const char* key) {
    if (!v.is_number_integer())
        fail(std::string("'") + key + "' must be an integer");
    return v.get<int>();
}

double as_num(const json& v, const char* key) {
    if (!v.is_number()) fail(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

TaperSpec parse_taper(const json& v) {
    if (!v.is_object()) fail("'taper' must be an object");
    const json& t = require(v, "type");
    if (!t.is_string()) fail("'taper.type' must be a string");
    TaperSpec out;
    const std::string kind = t.get<std::string>();
    if (kind == "chebyshev") {
        reject_unknown(v, {"type", "sll_db"}, "taper");
        out.kind = TaperSpec::Kind::chebyshev;
        out.sll_db = as_num(require(v, "sll_db"), "taper.sll_db");
    } else if (kind == "uniform") {
        reject_unknown(v, {"type"}, "taper");
        out.kind = TaperSpec::Kind::uniform;
    } else {
        fail("taper.type must be 'chebyshev' or 'uniform', got '" + kind + "'");
    }
    return out;
}

std::vector<sampling::NotchMask> parse_notches(const json& v) {
    if (!v.is_array()) fail("'notches' must be an array");
    std::vector<sampling::NotchMask> out;
    for (const json& e : v) {
        if (!e.is_object()) fail("each notch must be an object");
        reject_unknown(e, {"u_lo", "u_hi", "level_db"}, "notch");
        sampling::NotchMask m;
        m.u_lo = as_num(require(e, "u_lo"), "notch.u_lo");
        m.u_hi = as_num(require(e, "u_hi"), "notch.u_hi");
        m.level_db = as_num(require(e, "level_db"), "notch.level_db");
        out.push_back(m);
    }
    return out;
}

[[noreturn]] void rethrow_with_stage(const char* name) {
    const auto tag = [&](const char* what) {
        return std::string(name) + ": " + what;
    };
    try {
        throw;
    } catch (const synth::config_error& e) {
        throw synth::config_error(tag(e.what()));
    } catch (const synth::infeasible_error& e) {
        throw synth::infeasible_error(tag(e.what()));
    } catch (const synth::io_error& e) {
        throw synth::io_error(tag(e.what()));
    } catch (const synth::solver_error& e) {
        throw synth::solver_error(tag(e.what()));
    } catch (const std::domain_error& e) {
        // Parameter combinations that only surface mid-pipeline (Nyquist,
        // pencil bounds, offsets outside the mainlobe) are config problems.
        throw synth::config_error(tag(e.what()));
    } catch (const std::invalid_argument& e) {
        throw synth::config_error(tag(e.what()));
    } catch (const std::exception& e) {
        throw synth::solver_error(tag(e.what()));
    }
}

template <class F>
auto timed(RunReport& rep, const char* name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto record = [&] {
        const std::chrono::duration<double> dt =
            std::chrono::steady_clock::now() - t0;
        rep.timings.push_back({name, dt.count()});
    };
    try {
        if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
            f();
            record();
        } else {
            auto out = f();
            record();
            return out;
        }
    } catch (...) {
        rethrow_with_stage(name);
    }
}

SlackSummary compute_slack(const completion::LogDetState& state,
                           const sampling::SampleSet& samples,
                           const sampling::ConstraintSpec& cons,
                           const hankel::HankelSpec& spec) {
    SlackSummary out;
    double match = 0.0;
    for (const auto& mp : cons.match)
        match = std::max(match,
                         std::abs(state.x_R[mp.n + samples.N] - mp.target));
    out.match_worst = match - cons.eps;

    double bound = -std::numeric_limits<double>::infinity();
    for (const auto& [n, rho] : cons.bound)
        bound = std::max(bound, std::abs(state.x_R[n + samples.N]) - rho);
    out.bound_worst = cons.bound.empty() ? 0.0 : bound;

    const int rows = spec.rows(), cols = spec.cols();
    Eigen::MatrixXcd blk(rows + cols, rows + cols);
    const Eigen::MatrixXcd Y = hankel::hankelize(state.x_R, spec.L);
    blk.topLeftCorner(rows, rows) = state.P;
    blk.topRightCorner(rows, cols) = Y;
    blk.bottomLeftCorner(cols, rows) = Y.adjoint();
    blk.bottomRightCorner(cols, cols) = state.Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(blk,
                                                        Eigen::EigenvaluesOnly);
    out.psd_min_eig = eig.eigenvalues().minCoeff();
    return out;
}

}  // namespace

void ScenarioConfig::validate() const {
    const int min_elements = taper.kind == TaperSpec::Kind::chebyshev ? 2 : 1;
    if (elements < min_elements)
        fail("elements must be >= " + std::to_string(min_elements) +
             " for this taper");
    if (!(spacing_wl > 0.0) || !std::isfinite(spacing_wl))
        fail("spacing_wl must be positive");
    if (taper.kind == TaperSpec::Kind::chebyshev && !(taper.sll_db < 0.0))
        fail("taper.sll_db must be negative (dB below the mainlobe)");
    if (samples < 5 || samples % 2 == 0)
        fail("samples must be an odd integer >= 5");
    hankel::HankelSpec spec{N(), pencil_L};
    try {
        spec.validate(elements);
    } catch (const std::domain_error& e) {
        fail(std::string("pencil_L: ") + e.what());
    }
    if (iterations < 1) fail("iterations must be >= 1");
    if (!(delta_rel > 0.0)) fail("delta_rel must be positive");
    if (!(eps_rel > 0.0)) fail("eps_rel must be positive");
    if (match_offsets.empty()) fail("match_offsets must not be empty");
    if (!(sidelobe_db < 0.0)) fail("sidelobe_db must be negative");
    if (!(rank_tol > 0.0 && rank_tol < 1.0))
        fail("rank_tol must lie in (0, 1)");
    for (const auto& m : notches) {
        if (!(m.u_lo < m.u_hi)) fail("notch needs u_lo < u_hi");
        if (m.u_lo < -1.0 || m.u_hi > 1.0) fail("notch must lie in [-1, 1]");
        if (!(m.level_db < 0.0)) fail("notch level_db must be negative");
    }
    if (wants_logdet()) {
        // The completion's Hermitian-Hankel structure forces a conjugate-
        // symmetric sample sequence, so masks must come in mirror pairs.
        for (const auto& m : notches) {
            bool mirrored = false;
            for (const auto& o : notches)
                if (std::abs(o.u_lo + m.u_hi) < 1e-9 &&
                    std::abs(o.u_hi + m.u_lo) < 1e-9 &&
                    std::abs(o.level_db - m.level_db) < 1e-9) {
                    mirrored = true;
                    break;
                }
            if (!mirrored)
                fail("notches must be symmetric about u=0 for the log-det "
                     "method");
        }
    }
    if (target_rank) {
        const int max_R = std::min(spec.rows(), spec.cols() - 1);
        if (*target_rank < 1 || *target_rank > max_R)
            fail("target_rank must lie in [1, " + std::to_string(max_R) +
                 "] for this pencil");
    }
}

ScenarioConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw synth::config_error(std::string("config is not valid JSON: ") +
                                  e.what());
    }
    if (!j.is_object()) fail("config root must be a JSON object");
    reject_unknown(j,
                   {"elements", "spacing_wl", "taper", "samples", "pencil_L",
                    "iterations", "delta_rel", "eps_rel", "match_offsets",
                    "sidelobe_db", "notches", "rank_tol", "method",
                    "target_rank"},
                   "config");

    ScenarioConfig c;
    c.elements = as_int(require(j, "elements"), "elements");
    c.spacing_wl = as_num(require(j, "spacing_wl"), "spacing_wl");
    c.taper = parse_taper(require(j, "taper"));
    c.samples = as_int(require(j, "samples"), "samples");
    c.pencil_L = as_int(require(j, "pencil_L"), "pencil_L");
    if (j.contains("iterations"))
        c.iterations = as_int(j.at("iterations"), "iterations");
    if (j.contains("delta_rel"))
        c.delta_rel = as_num(j.at("delta_rel"), "delta_rel");
    if (j.contains("eps_rel")) c.eps_rel = as_num(j.at("eps_rel"), "eps_rel");
    if (j.contains("match_offsets")) {
        const json& mo = j.at("match_offsets");
        if (!mo.is_array()) fail("'match_offsets' must be an array");
        c.match_offsets.clear();
        for (const json& v : mo)
            c.match_offsets.push_back(as_int(v, "match_offsets"));
    }
    if (j.contains("sidelobe_db"))
        c.sidelobe_db = as_num(j.at("sidelobe_db"), "sidelobe_db");
    if (j.contains("notches")) c.notches = parse_notches(j.at("notches"));
    if (j.contains("rank_tol"))
        c.rank_tol = as_num(j.at("rank_tol"), "rank_tol");
    if (j.contains("method")) {
        const json& m = j.at("method");
        if (!m.is_string()) fail("'method' must be a string");
        c.method = method_from_string(m.get<std::string>());
    }
    if (j.contains("target_rank"))
        c.target_rank = as_int(j.at("target_rank"), "target_rank");

    c.validate();
    return c;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw synth::io_error("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw synth::io_error("read failure on config file: " + path);
    return parse_config(buf.str());
}

std::pair<array_model::ElementLayout, array_model::Excitation>
reference_array(const ScenarioConfig& config) {
    auto layout =
        array_model::ElementLayout::uniform(config.elements, config.spacing_wl);
    array_model::Excitation exc;
    exc.weights = Eigen::VectorXcd::Ones(config.elements);
    if (config.taper.kind == TaperSpec::Kind::chebyshev) {
        const auto taper =
            array_model::dolph_chebyshev_taper(config.elements,
                                               config.taper.sll_db);
        for (int m = 0; m < config.elements; ++m) exc.weights[m] = taper[m];
    }
    return {std::move(layout), std::move(exc)};
}

RunReport run_scenario(const ScenarioConfig& config, bool verbose) {
    config.validate();
    RunReport rep;
    rep.config = config;

    const auto [layout, exc] = reference_array(config);
    const int N = config.N();
    const hankel::HankelSpec spec{N, config.pencil_L};
    const auto grid =
        array_model::PatternSampleGrid::linspace(-1.0, 1.0, kPatternGridPoints);

    const auto samples = timed(rep, "sampling", [&] {
        return sampling::sample_reference(layout, exc, N);
    });
    rep.ref_metrics = timed(rep, "reference metrics", [&] {
        return array_model::pattern_metrics(
            grid, array_model::evaluate_pattern(layout, exc, grid));
    });

    if (config.wants_logdet()) {
        const auto cons = timed(rep, "constraints", [&] {
            const auto part =
                sampling::partition_mainlobe(samples, config.sidelobe_db);
            return sampling::build_constraints(samples, part,
                                               config.match_offsets,
                                               config.eps_rel, config.notches);
        });
        completion::RunOptions opts;
        opts.iterations = config.iterations;
        opts.delta_rel = config.delta_rel;
        opts.rank_tau = config.rank_tol;
        opts.verbose = verbose;
        completion::ConicIpmSolver solver;
        const auto state = timed(rep, "completion", [&] {
            return completion::run_logdet(samples, spec, cons, opts, solver);
        });
        rep.rank_trace = state.rank_trace;
        rep.surrogate_trace = state.surrogate_trace;
        rep.x_R = state.x_R;
        {
            const auto Y0 = hankel::hankelize(samples.x, spec.L);
            const auto info = hankel::numerical_rank(Y0, config.rank_tol);
            const double delta = config.delta_rel * info.singular_values[0];
            rep.initial_surrogate =
                (spec.rows() + spec.cols()) * std::log1p(delta);
        }
        rep.slack = compute_slack(state, samples, cons, spec);

        // The pencil can only resolve min(rows, cols - 1) exponentials; a
        // short run can leave the completed rank above that, so clamp.
        const int max_order = std::min(spec.rows(), spec.cols() - 1);
        const int R = std::min(state.rank_trace.back(), max_order);
        auto sol = timed(rep, "pencil", [&] {
            // Weights are fitted against the completed sequence so the
            // reconstruction inherits the completion's feasibility.
            sampling::SampleSet fit{state.x_R, samples.N, samples.delta};
            return pencil::estimate(state.x_R, fit, spec, R);
        });
        rep.logdet_metrics = timed(rep, "synthesis metrics", [&] {
            return array_model::pattern_metrics(
                grid, pencil::reconstruct_pattern(sol, grid));
        });
        rep.logdet = std::move(sol);
    }

    if (config.wants_mpm()) {
        auto sol = timed(rep, "baseline", [&] {
            return pencil::baseline_mpm(samples, spec, config.target_rank);
        });
        rep.baseline_metrics = timed(rep, "baseline metrics", [&] {
            return array_model::pattern_metrics(
                grid, pencil::reconstruct_pattern(sol, grid));
        });
        rep.baseline = std::move(sol);
    }

    return rep;
}

}  // namespace synth::scenario
