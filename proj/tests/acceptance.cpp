// Acceptance gate: runs the bundled scenarios plus the property checks and
// prints exactly one [PASS]/[FAIL] line per criterion on stdout. The exit
// code is the number of failed criteria. Tolerances are pinned here, next to
// the checks they guard.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "synth/array_model.hpp"
#include "synth/completion.hpp"
#include "synth/errors.hpp"
#include "synth/hankel.hpp"
#include "synth/pencil.hpp"
#include "synth/sampling.hpp"
#include "synth/scenario.hpp"

using namespace synth;
using scenario::RunReport;
using scenario::ScenarioConfig;

namespace {

// ------------------------------------------------------------------ plumbing

struct Criterion {
    int number;
    std::string label;
    bool pass = false;
    std::string detail;
};

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s << ' ';
        s << v[i];
    }
    return s.str();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double stage_seconds(const RunReport& r, const std::string& name) {
    for (const auto& t : r.timings)
        if (t.stage == name) return t.seconds;
    return 0.0;
}

/// Runs one scenario, reporting progress on stderr so long gates stay
/// observable in test logs.
std::optional<RunReport> run_or_note(const ScenarioConfig& cfg,
                                     const std::string& tag,
                                     std::string* error) {
    std::fprintf(stderr, "[acceptance] running %s ...\n", tag.c_str());
    try {
        auto report = scenario::run_scenario(cfg);
        std::fprintf(stderr, "[acceptance] %s done in %.1f s\n", tag.c_str(),
                     stage_seconds(report, "completion"));
        return report;
    } catch (const std::exception& e) {
        *error = tag + " failed: " + e.what();
        std::fprintf(stderr, "[acceptance] %s\n", error->c_str());
        return std::nullopt;
    }
}

bool non_increasing(const std::vector<double>& t, double rel_slack,
                    std::string* where) {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] > t[i - 1] + rel_slack * std::abs(t[i - 1])) {
            *where = "rises at step " + std::to_string(i) + " (" +
                     fmt("%.9g", t[i - 1]) + " -> " + fmt("%.9g", t[i]) + ")";
            return false;
        }
    return true;
}

ScenarioConfig trend_config(int elements, double sll_db, double rho_db) {
    ScenarioConfig c;
    c.elements = elements;
    c.spacing_wl = 0.5;
    c.taper = {scenario::TaperSpec::Kind::chebyshev, sll_db};
    c.samples = 81;
    c.pencil_L = 40;
    c.iterations = 10;
    c.delta_rel = 1e-3;
    c.eps_rel = 1e-3;
    c.match_offsets = {-1, 0, 2};
    c.sidelobe_db = rho_db;
    c.rank_tol = 1e-3;
    c.method = scenario::Method::logdet;
    return c;
}

/// Published 12-element positions (wavelengths) for the scenario-A
/// reference: classical matrix-pencil truncation, and the completion-based
/// method, as independently tabulated.
const std::vector<double> kTableBaseline = {
    0.1160, 0.9519, 1.7846, 2.6272, 3.4748, 4.3247,
    5.1753, 6.0252, 6.8728, 7.7154, 8.5481, 9.3840};
const std::vector<double> kTableProposed = {
    0.0944, 0.9366, 1.7796, 2.6251, 3.4379, 4.3245,
    5.1755, 6.0261, 6.8749, 7.7204, 8.5634, 9.4056};

// ------------------------------------------------------------------ criteria

Criterion criterion1(const std::optional<RunReport>& A,
                     const std::string& a_error) {
    Criterion c{1, "scenario A rank reduction"};
    if (!A) {
        c.detail = a_error;
        return c;
    }
    const int rank = A->rank_trace.back();
    const double secs = stage_seconds(*A, "completion");
    const bool time_ok = secs <= 600.0;
    if (rank == 12 && time_ok) {
        c.pass = true;
        c.detail = "final rank 12, trace [" + join_ints(A->rank_trace) +
                   "], completion " + fmt("%.1f", secs) + " s (limit 600)";
    } else if (rank <= 13 && time_ok) {
        c.pass = true;
        c.detail = "warning: final rank " + std::to_string(rank) +
                   " (12 expected, <=13 tolerated), trace [" +
                   join_ints(A->rank_trace) + "], completion " +
                   fmt("%.1f", secs) + " s";
    } else {
        c.detail = "final rank " + std::to_string(rank) + " (need <= 13)" +
                   (time_ok ? "" : ", completion " + fmt("%.1f", secs) +
                                       " s exceeds 600 s");
    }
    return c;
}

Criterion criterion2(const std::optional<RunReport>& A,
                     const std::string& a_error) {
    Criterion c{2, "scenario A sidelobes and match points"};
    if (!A || !A->logdet) {
        c.detail = A ? "no completion solution" : a_error;
        return c;
    }
    const double psl = A->logdet_metrics->psl_db;

    // Match-point deviation of the reconstructed (continuous) pattern
    // against the reference samples. The completion guarantees eps only up
    // to the solver tolerance, so that headroom is granted here too.
    const auto [layout, exc] = scenario::reference_array(A->config);
    const auto samples = sampling::sample_reference(layout, exc, A->config.N());
    const auto part = sampling::partition_mainlobe(samples,
                                                   A->config.sidelobe_db);
    const auto cons = sampling::build_constraints(
        samples, part, A->config.match_offsets, A->config.eps_rel, {});
    std::vector<int> idx;
    for (const auto& mp : cons.match) idx.push_back(mp.n);
    std::sort(idx.begin(), idx.end());
    array_model::PatternSampleGrid grid;
    for (int n : idx) grid.u.push_back(n * samples.delta);
    const auto F = pencil::reconstruct_pattern(*A->logdet, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i)
        worst = std::max(worst, std::abs(F[static_cast<int>(i)] -
                                         samples.at(idx[i])));
    const double allowed = cons.eps + 1e-6 * cons.peak;

    const bool psl_ok = psl <= -29.5;
    const bool match_ok = worst <= allowed;
    c.pass = psl_ok && match_ok;
    c.detail = "R=" + std::to_string(A->logdet->R) + ", PSL " +
               fmt("%.3f", psl) + " dB (need <= -29.5), worst match dev " +
               fmt("%.3e", worst) + " vs eps+tol " + fmt("%.3e", allowed);
    return c;
}

Criterion criterion3(const std::optional<RunReport>& B,
                     const std::string& b_error) {
    Criterion c{3, "scenario B notches"};
    if (!B || !B->logdet) {
        c.detail = B ? "no completion solution" : b_error;
        return c;
    }
    const int rank = B->rank_trace.back();
    const double psl = B->logdet_metrics->psl_db;

    const auto grid = array_model::PatternSampleGrid::linspace(
        -1.0, 1.0, scenario::kPatternGridPoints);
    const auto F = pencil::reconstruct_pattern(*B->logdet, grid);
    const double peak = F.cwiseAbs().maxCoeff();
    double band_max = -300.0;
    for (std::size_t i = 0; i < grid.u.size(); ++i)
        for (const auto& m : B->config.notches)
            if (grid.u[i] >= m.u_lo && grid.u[i] <= m.u_hi)
                band_max = std::max(
                    band_max, 20.0 * std::log10(std::abs(F[static_cast<int>(
                                                     i)]) / peak + 1e-300));

    const bool rank_ok = rank == 13;
    const bool band_ok = band_max <= -44.0;
    const bool psl_ok = psl <= -29.5;
    c.pass = rank_ok && band_ok && psl_ok;
    c.detail = "final rank " + std::to_string(rank) + " (need 13), band max " +
               fmt("%.2f", band_max) + " dB (need <= -44), PSL " +
               fmt("%.3f", psl) + " dB (need <= -29.5), trace [" +
               join_ints(B->rank_trace) + "]";
    return c;
}

Criterion criterion4(const std::optional<RunReport>& A,
                     const std::string& a_error) {
    Criterion c{4, "matrix-pencil baseline reproduction"};
    if (!A || !A->baseline) {
        c.detail = A ? "no baseline solution" : a_error;
        return c;
    }
    const auto& base = *A->baseline;
    std::string detail;
    bool ok = base.positions.size() == kTableBaseline.size();
    double worst = 0.0;
    if (ok) {
        for (std::size_t i = 0; i < kTableBaseline.size(); ++i)
            worst = std::max(worst,
                             std::abs(base.positions[i] - kTableBaseline[i]));
        ok = worst <= 1e-3;
        detail = "baseline worst |d - table| = " + fmt("%.2e", worst) +
                 " wl (need <= 1e-3)";
    } else {
        detail = "baseline returned " + std::to_string(base.positions.size()) +
                 " elements, table has 12";
    }

    // Informational only: the completion-based positions against the
    // published ones; solver-dependent, so never gated.
    if (A->logdet && A->logdet->positions.size() == kTableProposed.size()) {
        double dev = 0.0;
        for (std::size_t i = 0; i < kTableProposed.size(); ++i)
            dev = std::max(dev,
                           std::abs(A->logdet->positions[i] -
                                    kTableProposed[i]));
        detail += "; proposed worst dev " + fmt("%.3f", dev) +
                  " wl vs published (informational)";
    } else if (A->logdet) {
        detail += "; proposed has " +
                  std::to_string(A->logdet->positions.size()) +
                  " elements vs published 12 (informational)";
    }
    c.pass = ok;
    c.detail = detail;
    return c;
}

Criterion criterion5() {
    Criterion c{5, "pencil round-trip property"};
    std::mt19937 rng(424242u);
    std::uniform_real_distribution<double> gap(0.4, 0.8);
    std::uniform_real_distribution<double> origin(0.0, 0.3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_int_distribution<int> order(1, 8);
    const int N = 12;
    const hankel::HankelSpec spec{N, N};

    const auto t0 = std::chrono::steady_clock::now();
    double worst_pos = 0.0, worst_w = 0.0;
    int failures = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int M = order(rng);
        array_model::ElementLayout layout;
        double d = origin(rng);
        for (int i = 0; i < M; ++i) {
            layout.positions.push_back(d);
            d += gap(rng);
        }
        array_model::Excitation exc;
        exc.weights.resize(M);
        for (int i = 0; i < M; ++i)
            exc.weights[i] = {unit(rng) + 2.0, unit(rng)};

        const auto samples = sampling::sample_reference(layout, exc, N);
        const auto sol = pencil::estimate(samples.x, samples, spec, M);
        bool trial_ok = sol.R == M;
        if (trial_ok)
            for (int i = 0; i < M; ++i) {
                const double dp =
                    std::abs(sol.positions[i] - layout.positions[i]);
                const double dw = std::abs(sol.weights[i] - exc.weights[i]) /
                                  std::abs(exc.weights[i]);
                worst_pos = std::max(worst_pos, dp);
                worst_w = std::max(worst_w, dw);
                trial_ok = trial_ok && dp <= 1e-8 && dw <= 1e-8;
            }
        if (!trial_ok) ++failures;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    c.pass = failures == 0 && secs <= 30.0;
    c.detail = "200 trials, worst position dev " + fmt("%.2e", worst_pos) +
               " wl, worst weight dev " + fmt("%.2e", worst_w) + " (need 1e-8)," +
               " " + fmt("%.2f", secs) + " s (limit 30)";
    if (failures) c.detail += ", " + std::to_string(failures) + " failing trials";
    return c;
}

Criterion criterion6() {
    Criterion c{6, "Hankel rank law"};
    std::mt19937 rng(20260816u);
    std::uniform_real_distribution<double> gap(0.45, 0.8);
    std::uniform_real_distribution<double> origin(0.0, 0.3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int N = 16;
    int bad_M = 0, bad_rank = 0;
    for (int M = 1; M <= 10 && bad_M == 0; ++M)
        for (int trial = 0; trial < 3; ++trial) {
            array_model::ElementLayout layout;
            double d = origin(rng);
            for (int i = 0; i < M; ++i) {
                layout.positions.push_back(d);
                d += gap(rng);
            }
            array_model::Excitation exc;
            exc.weights.resize(M);
            for (int i = 0; i < M; ++i)
                exc.weights[i] = {unit(rng) + 1.5, unit(rng)};
            const auto samples = sampling::sample_reference(layout, exc, N);
            const auto Y = hankel::hankelize(samples.x, N);
            const auto info = hankel::numerical_rank(Y, 1e-8);
            if (info.rank != M) {
                bad_M = M;
                bad_rank = info.rank;
                break;
            }
        }
    c.pass = bad_M == 0;
    c.detail = bad_M == 0
                   ? "rank(H) == M at tau=1e-8 for M in 1..10, 3 trials each"
                   : "M=" + std::to_string(bad_M) + " gave rank " +
                         std::to_string(bad_rank);
    return c;
}

Criterion criterion7(const std::optional<RunReport>& A,
                     const std::optional<RunReport>& B,
                     const std::string& a_error, const std::string& b_error) {
    Criterion c{7, "surrogate monotonicity"};
    std::string where;
    if (!A || !B) {
        c.detail = !A ? a_error : b_error;
        return c;
    }
    if (!non_increasing(A->surrogate_trace, 1e-6, &where)) {
        c.detail = "scenario A " + where;
        return c;
    }
    if (!non_increasing(B->surrogate_trace, 1e-6, &where)) {
        c.detail = "scenario B " + where;
        return c;
    }

    std::mt19937 rng(7131u);
    std::uniform_real_distribution<double> depth(18.0, 30.0);
    for (int t = 0; t < 20; ++t) {
        const int M = 5 + t % 4;
        const double sll = -depth(rng);
        auto layout = array_model::ElementLayout::uniform(M, 0.5);
        const auto taper = array_model::dolph_chebyshev_taper(M, sll);
        array_model::Excitation exc;
        exc.weights.resize(M);
        for (int i = 0; i < M; ++i) exc.weights[i] = taper[i];
        const auto samples = sampling::sample_reference(layout, exc, 8);
        // One dB of headroom over the taper's own level keeps the toy
        // problem strictly feasible.
        const auto part = sampling::partition_mainlobe(samples, sll + 1.0);
        const auto cons =
            sampling::build_constraints(samples, part, {-1, 0, 1}, 0.02, {});
        completion::RunOptions opts;
        opts.iterations = 3;
        completion::ConicIpmSolver solver;
        try {
            const auto st =
                completion::run_logdet(samples, {8, 8}, cons, opts, solver);
            if (!non_increasing(st.surrogate_trace, 1e-6, &where)) {
                c.detail = "toy " + std::to_string(t) + " (M=" +
                           std::to_string(M) + ", sll=" + fmt("%.1f", sll) +
                           ") " + where;
                return c;
            }
        } catch (const std::exception& e) {
            c.detail = "toy " + std::to_string(t) + " failed: " + e.what();
            return c;
        }
        std::fprintf(stderr, "[acceptance] toy %d/20 ok\r", t + 1);
    }
    std::fprintf(stderr, "\n");
    c.pass = true;
    c.detail = "non-increasing on A, B, and 20 random feasible toys "
               "(slack 1e-6 relative)";
    return c;
}

Criterion criterion8() {
    Criterion c{8, "Chebyshev taper sidelobe accuracy"};
    const auto grid = array_model::PatternSampleGrid::linspace(-1.0, 1.0,
                                                               4001);
    double worst = 0.0;
    std::string worst_case;
    for (int M : {8, 12, 20})
        for (double sll : {-25.0, -30.0, -40.0}) {
            const auto layout = array_model::ElementLayout::uniform(M, 0.5);
            const auto taper = array_model::dolph_chebyshev_taper(M, sll);
            array_model::Excitation exc;
            exc.weights.resize(M);
            for (int i = 0; i < M; ++i) exc.weights[i] = taper[i];
            const auto F = array_model::evaluate_pattern(layout, exc, grid);
            const auto metrics = array_model::pattern_metrics(grid, F);
            const double dev = std::abs(metrics.psl_db - sll);
            if (dev > worst) {
                worst = dev;
                worst_case = "M=" + std::to_string(M) + ", sll=" +
                             fmt("%.0f", sll) + " -> PSL " +
                             fmt("%.3f", metrics.psl_db);
            }
        }
    c.pass = worst <= 0.2;
    c.detail = "worst |PSL - sll| = " + fmt("%.3f", worst) +
               " dB (need <= 0.2): " + worst_case;
    return c;
}

Criterion criterion9(const std::optional<RunReport>& A,
                     const std::string& a_error) {
    Criterion c{9, "mainlobe width trends"};
    if (!A || !A->logdet) {
        c.detail = A ? "no completion solution" : a_error;
        return c;
    }
    const double w20 = A->logdet_metrics->mainlobe_null_width_u;

    struct Point {
        std::string tag;
        ScenarioConfig cfg;
        double width = 0.0;
    };
    std::vector<Point> elem = {
        {"16 elements", trend_config(16, -30.0, -30.0)},
        {"24 elements", trend_config(24, -30.0, -30.0)}};
    std::vector<Point> depth = {
        {"-25 dB", trend_config(20, -25.0, -25.0)},
        {"-35 dB", trend_config(20, -35.0, -35.0)}};
    for (auto* group : {&elem, &depth})
        for (auto& p : *group) {
            std::string err;
            const auto r = run_or_note(p.cfg, "trend run (" + p.tag + ")",
                                       &err);
            if (!r || !r->logdet) {
                c.detail = err.empty() ? "trend run lost its solution" : err;
                return c;
            }
            p.width = r->logdet_metrics->mainlobe_null_width_u;
        }

    const double w16 = elem[0].width, w24 = elem[1].width;
    const double w25 = depth[0].width, w35 = depth[1].width;
    const bool elements_ok = w16 >= w20 - 1e-12 && w20 >= w24 - 1e-12;
    const bool depth_ok = w25 <= w20 + 1e-12 && w20 <= w35 + 1e-12;
    c.pass = elements_ok && depth_ok;
    c.detail = "null width vs elements 16/20/24: " + fmt("%.4f", w16) + "/" +
               fmt("%.4f", w20) + "/" + fmt("%.4f", w24) +
               (elements_ok ? " (non-increasing ok)" : " (NOT non-increasing)") +
               "; vs sidelobe depth -25/-30/-35: " + fmt("%.4f", w25) + "/" +
               fmt("%.4f", w20) + "/" + fmt("%.4f", w35) +
               (depth_ok ? " (non-decreasing ok)" : " (NOT non-decreasing)");
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <configs-dir>\n");
        return 64;
    }
    const std::string configs = argv[1];

    std::string a_error, b_error;
    std::optional<RunReport> A, B;
    try {
        A = run_or_note(scenario::load_config(configs + "/scenario_A.json"),
                        "scenario A", &a_error);
    } catch (const std::exception& e) {
        a_error = std::string("scenario A config: ") + e.what();
    }
    try {
        B = run_or_note(scenario::load_config(configs + "/scenario_B.json"),
                        "scenario B", &b_error);
    } catch (const std::exception& e) {
        b_error = std::string("scenario B config: ") + e.what();
    }

    std::vector<Criterion> results;
    results.push_back(criterion1(A, a_error));
    results.push_back(criterion2(A, a_error));
    results.push_back(criterion3(B, b_error));
    results.push_back(criterion4(A, a_error));
    results.push_back(criterion5());
    results.push_back(criterion6());
    results.push_back(criterion7(A, B, a_error, b_error));
    results.push_back(criterion8());
    results.push_back(criterion9(A, a_error));

    int failed = 0;
    for (const auto& c : results) {
        if (!c.pass) ++failed;
        std::printf("[%s] %d. %s: %s\n", c.pass ? "PASS" : "FAIL", c.number,
                    c.label.c_str(), c.detail.c_str());
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) -
                                                failed,
                results.size());
    return failed;
}
