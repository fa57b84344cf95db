#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "synth/emit.hpp"
#include "synth/errors.hpp"
#include "synth/scenario.hpp"

namespace {

void print_timings(const synth::scenario::RunReport& report) {
    std::fprintf(stderr, "stage timings:\n");
    double total = 0.0;
    for (const auto& t : report.timings) {
        std::fprintf(stderr, "  %-18s %10.3f s\n", t.stage.c_str(), t.seconds);
        total += t.seconds;
    }
    std::fprintf(stderr, "  %-18s %10.3f s\n", "total", total);
}

void print_solution_line(const char* tag,
                         const synth::pencil::SparseArraySolution& sol,
                         const synth::array_model::PatternMetrics& metrics) {
    std::printf("%s: %d elements, PSL %.2f dB, null width %.4f, "
                "ls residual %.3g%s\n",
                tag, sol.R, metrics.psl_db, metrics.mainlobe_null_width_u,
                sol.ls_residual, sol.rank_warning ? " [rank warning]" : "");
}

void print_summary(const synth::scenario::RunReport& report) {
    std::printf("reference: %d elements, PSL %.2f dB, null width %.4f\n",
                report.config.elements, report.ref_metrics.psl_db,
                report.ref_metrics.mainlobe_null_width_u);
    if (report.logdet) {
        std::printf("rank trace:");
        for (int r : report.rank_trace) std::printf(" %d", r);
        std::printf("\n");
        print_solution_line("log-det synthesis", *report.logdet,
                            *report.logdet_metrics);
        if (report.slack)
            std::printf("constraint slack: match %+.3e, bound %+.3e, "
                        "psd min eig %+.3e\n",
                        report.slack->match_worst, report.slack->bound_worst,
                        report.slack->psd_min_eig);
    }
    if (report.baseline)
        print_solution_line("matrix-pencil baseline", *report.baseline,
                            *report.baseline_metrics);
}

void print_position_table(const synth::scenario::RunReport& report) {
    if (!report.logdet || !report.baseline) return;
    const auto& a = *report.logdet;
    const auto& b = *report.baseline;
    std::printf("\n  r      d_logdet      d_baseline      diff\n");
    const int rows = std::max(a.R, b.R);
    for (int r = 0; r < rows; ++r) {
        if (r < a.R && r < b.R)
            std::printf("%3d   %10.4f    %10.4f    %+8.4f\n", r + 1,
                        a.positions[r], b.positions[r],
                        a.positions[r] - b.positions[r]);
        else if (r < a.R)
            std::printf("%3d   %10.4f             -\n", r + 1, a.positions[r]);
        else
            std::printf("%3d            -    %10.4f\n", r + 1, b.positions[r]);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse array synthesis by low-rank Hankel completion"};
    app.require_subcommand(1);

    std::string config_path, out_dir, method_override;
    bool plot = false, verbose = false;

    CLI::App* cmd_run = app.add_subcommand(
        "run", "run a scenario and write result files");
    cmd_run->add_option("--config", config_path, "scenario JSON file")
        ->required();
    cmd_run->add_option("--out", out_dir, "output directory")->required();
    cmd_run->add_option("--method", method_override,
                        "override the config method (logdet|mpm|both)");
    cmd_run->add_flag("--plot", plot, "also write plot.svg");
    cmd_run->add_flag("--verbose", verbose, "stream solver progress");

    CLI::App* cmd_trace = app.add_subcommand(
        "rank-trace", "print the completion rank/surrogate trace as CSV");
    cmd_trace->add_option("--config", config_path, "scenario JSON file")
        ->required();
    cmd_trace->add_flag("--verbose", verbose, "stream solver progress");

    CLI::App* cmd_compare = app.add_subcommand(
        "compare", "run both methods and print a comparison");
    cmd_compare->add_option("--config", config_path, "scenario JSON file")
        ->required();
    cmd_compare->add_option("--out", out_dir,
                            "optionally also write result files");
    cmd_compare->add_flag("--plot", plot, "with --out, also write plot.svg");
    cmd_compare->add_flag("--verbose", verbose, "stream solver progress");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // bad usage is a config problem
    }

    try {
        auto config = synth::scenario::load_config(config_path);
        if (cmd_run->parsed()) {
            if (!method_override.empty())
                config.method =
                    synth::scenario::method_from_string(method_override);
            const auto report = synth::scenario::run_scenario(config, verbose);
            synth::emit::emit_outputs(report, out_dir, plot);
            print_summary(report);
            std::printf("results written to %s\n", out_dir.c_str());
            print_timings(report);
        } else if (cmd_trace->parsed()) {
            if (!config.wants_logdet())
                config.method = synth::scenario::Method::logdet;
            if (config.method == synth::scenario::Method::both)
                config.method = synth::scenario::Method::logdet;
            const auto report = synth::scenario::run_scenario(config, verbose);
            std::fputs(synth::emit::render_ranktrace_csv(report).c_str(),
                       stdout);
            print_timings(report);
        } else {  // compare
            config.method = synth::scenario::Method::both;
            const auto report = synth::scenario::run_scenario(config, verbose);
            if (!out_dir.empty())
                synth::emit::emit_outputs(report, out_dir, plot);
            print_summary(report);
            print_position_table(report);
            print_timings(report);
        }
        return 0;
    } catch (const synth::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const synth::infeasible_error& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return 4;
    } catch (const synth::io_error& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return 5;
    } catch (const synth::solver_error& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
