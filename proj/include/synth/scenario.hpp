#pragma once
#include <optional>
#include <string>
#include <vector>

#include "synth/array_model.hpp"
#include "synth/completion.hpp"
#include "synth/pencil.hpp"
#include "synth/sampling.hpp"

namespace synth::scenario {

/// Shared u-grid resolution for reported metrics and emitted pattern tables.
inline constexpr int kPatternGridPoints = 4001;

enum class Method { logdet, mpm, both };

std::string to_string(Method m);
Method method_from_string(const std::string& s);  // throws config_error

struct TaperSpec {
    enum class Kind { chebyshev, uniform };
    Kind kind = Kind::chebyshev;
    double sll_db = -30.0;  // chebyshev only
};

/// One synthesis scenario. Fully deterministic: no seeds anywhere.
struct ScenarioConfig {
    int elements = 0;
    double spacing_wl = 0.5;
    TaperSpec taper;
    int samples = 0;  // 2N+1, odd >= 5
    int pencil_L = 0;
    int iterations = 10;
    double delta_rel = 1e-3;
    double eps_rel = 1e-3;
    std::vector<int> match_offsets = {-1, 0, 2};
    double sidelobe_db = -30.0;
    std::vector<sampling::NotchMask> notches;
    double rank_tol = 1e-3;
    Method method = Method::logdet;
    std::optional<int> target_rank;

    int N() const { return (samples - 1) / 2; }
    bool wants_logdet() const { return method != Method::mpm; }
    bool wants_mpm() const { return method != Method::logdet; }
    void validate() const;  // throws config_error
};

/// Strict parse: unknown keys, wrong types, or invariant violations raise
/// config_error. load_config additionally raises io_error when the file
/// cannot be read.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

/// Worst-case constraint slacks of the accepted completion iterate.
struct SlackSummary {
    double match_worst = 0.0;   // max |x_R(n) - x(n)| - eps over the match set
    double bound_worst = 0.0;   // max |x_R(n)| - rho(n) over the bound set
    double psd_min_eig = 0.0;   // smallest eigenvalue of [[P, Y],[Y^H, Q]]
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct RunReport {
    ScenarioConfig config;

    // log-det branch (method = logdet | both)
    std::optional<pencil::SparseArraySolution> logdet;
    std::vector<int> rank_trace;
    std::vector<double> surrogate_trace;
    double initial_surrogate = 0.0;  // identity state, (rows+cols)*log(1+delta)
    Eigen::VectorXcd x_R;            // completed sample sequence
    std::optional<SlackSummary> slack;
    std::optional<array_model::PatternMetrics> logdet_metrics;

    // baseline branch (method = mpm | both)
    std::optional<pencil::SparseArraySolution> baseline;
    std::optional<array_model::PatternMetrics> baseline_metrics;

    array_model::PatternMetrics ref_metrics;

    // Console diagnostics only; never serialized (results.json stays
    // bit-identical across runs of the same config).
    std::vector<StageTiming> timings;
};

/// sample -> partition -> constraints -> completion -> pencil -> metrics,
/// and/or the MPM baseline, per config.method. Module errors are rethrown
/// with a stage label. verbose streams completion progress to stdout.
RunReport run_scenario(const ScenarioConfig& config, bool verbose = false);

/// The reference layout/excitation pair a config describes.
std::pair<array_model::ElementLayout, array_model::Excitation>
reference_array(const ScenarioConfig& config);

}  // namespace synth::scenario
