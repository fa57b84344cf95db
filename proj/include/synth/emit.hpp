#pragma once
#include <string>

#include "synth/scenario.hpp"

namespace synth::emit {

/// results.json content: config echo, per-method solutions/metrics/traces.
/// Deterministic — no timings or timestamps ever appear here.
std::string render_results_json(const scenario::RunReport& report);

/// ranktrace.csv content ("k,rank,surrogate", rows 0..K). Log-det runs only.
std::string render_ranktrace_csv(const scenario::RunReport& report);

/// Writes results.json, elements.csv, pattern.csv and (for log-det runs)
/// ranktrace.csv into out_dir, creating it if needed; with plot=true adds a
/// self-contained plot.svg (normalized dB patterns + element stem chart).
/// Failures raise io_error.
void emit_outputs(const scenario::RunReport& report, const std::string& out_dir,
                  bool plot = false);

}  // namespace synth::emit
