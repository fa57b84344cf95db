#include "synth/emit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "synth/errors.hpp"

namespace synth::emit {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using scenario::RunReport;
using scenario::ScenarioConfig;

namespace {

constexpr double kFloorDb = -300.0;

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<double> normalized_db(const Eigen::VectorXcd& f) {
    const Eigen::VectorXd mag = f.cwiseAbs();
    const double peak = mag.maxCoeff();
    std::vector<double> db(static_cast<std::size_t>(mag.size()), kFloorDb);
    if (peak <= 0.0) return db;
    for (int i = 0; i < mag.size(); ++i)
        db[static_cast<std::size_t>(i)] =
            std::max(kFloorDb, 20.0 * std::log10(mag[i] / peak));
    return db;
}

ordered_json metrics_json(const array_model::PatternMetrics& m) {
    ordered_json j;
    j["peak_u"] = m.peak_u;
    j["peak_level_db"] = m.peak_level_db;
    j["psl_db"] = m.psl_db;
    j["mainlobe_null_width_u"] = m.mainlobe_null_width_u;
    j["degenerate"] = m.degenerate;
    return j;
}

ordered_json solution_json(const pencil::SparseArraySolution& s) {
    ordered_json j;
    j["R"] = s.R;
    j["positions_wl"] = s.positions;
    ordered_json weights = ordered_json::array();
    for (int r = 0; r < s.weights.size(); ++r)
        weights.push_back({s.weights[r].real(), s.weights[r].imag()});
    j["weights"] = std::move(weights);
    std::vector<double> dev(s.radial_deviation.data(),
                            s.radial_deviation.data() + s.radial_deviation.size());
    j["radial_deviation"] = dev;
    j["ls_residual"] = s.ls_residual;
    j["rank_warning"] = s.rank_warning;
    return j;
}

ordered_json config_json(const ScenarioConfig& c) {
    ordered_json j;
    j["elements"] = c.elements;
    j["spacing_wl"] = c.spacing_wl;
    if (c.taper.kind == scenario::TaperSpec::Kind::chebyshev)
        j["taper"] = {{"type", "chebyshev"}, {"sll_db", c.taper.sll_db}};
    else
        j["taper"] = {{"type", "uniform"}};
    j["samples"] = c.samples;
    j["pencil_L"] = c.pencil_L;
    j["iterations"] = c.iterations;
    j["delta_rel"] = c.delta_rel;
    j["eps_rel"] = c.eps_rel;
    j["match_offsets"] = c.match_offsets;
    j["sidelobe_db"] = c.sidelobe_db;
    ordered_json notches = ordered_json::array();
    for (const auto& m : c.notches)
        notches.push_back({{"u_lo", m.u_lo},
                           {"u_hi", m.u_hi},
                           {"level_db", m.level_db}});
    j["notches"] = std::move(notches);
    j["rank_tol"] = c.rank_tol;
    j["method"] = scenario::to_string(c.method);
    if (c.target_rank) j["target_rank"] = *c.target_rank;
    return j;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw synth::io_error("cannot open for writing: " + path.string());
    out << content;
    out.flush();
    if (!out.good()) throw synth::io_error("write failed: " + path.string());
}

// ---------------------------------------------------------------- plot.svg

struct Series {
    std::string label;
    std::string color;
    std::string dash;  // empty = solid
    const std::vector<double>* db;
};

std::string svg_pattern_plot(const std::vector<double>& u,
                             const std::vector<Series>& series) {
    const double x0 = 70, x1 = 850, y0 = 40, y1 = 330;
    const double db_lo = -60.0, db_hi = 0.0;
    const auto X = [&](double uu) { return x0 + (uu + 1.0) / 2.0 * (x1 - x0); };
    const auto Y = [&](double db) {
        const double c = std::clamp(db, db_lo, db_hi);
        return y0 + (db_hi - c) / (db_hi - db_lo) * (y1 - y0);
    };
    std::ostringstream s;
    s << "<rect x='" << x0 << "' y='" << y0 << "' width='" << x1 - x0
      << "' height='" << y1 - y0 << "' fill='white' stroke='#444'/>\n";
    for (int g = 0; g <= 6; ++g) {  // horizontal grid every 10 dB
        const double db = -10.0 * g;
        s << "<line x1='" << x0 << "' y1='" << Y(db) << "' x2='" << x1
          << "' y2='" << Y(db) << "' stroke='#ddd'/>\n"
          << "<text x='" << x0 - 8 << "' y='" << Y(db) + 4
          << "' text-anchor='end' font-size='12'>" << static_cast<int>(db)
          << "</text>\n";
    }
    for (int g = 0; g <= 8; ++g) {  // vertical grid every 0.25 in u
        const double uu = -1.0 + 0.25 * g;
        s << "<line x1='" << X(uu) << "' y1='" << y0 << "' x2='" << X(uu)
          << "' y2='" << y1 << "' stroke='#eee'/>\n"
          << "<text x='" << X(uu) << "' y='" << y1 + 16
          << "' text-anchor='middle' font-size='12'>" << fmt("%.2f", uu)
          << "</text>\n";
    }
    s << "<text x='" << (x0 + x1) / 2 << "' y='" << y1 + 34
      << "' text-anchor='middle' font-size='13'>u = sin(theta)</text>\n"
      << "<text x='20' y='" << (y0 + y1) / 2
      << "' text-anchor='middle' font-size='13' transform='rotate(-90 20 "
      << (y0 + y1) / 2 << ")'>normalized level (dB)</text>\n";
    double ly = y0 + 16;
    for (const auto& ser : series) {
        s << "<polyline fill='none' stroke='" << ser.color
          << "' stroke-width='1.5'";
        if (!ser.dash.empty()) s << " stroke-dasharray='" << ser.dash << "'";
        s << " points='";
        for (std::size_t i = 0; i < u.size(); ++i) {
            s << fmt("%.2f", X(u[i])) << ',' << fmt("%.2f", Y((*ser.db)[i]));
            if (i + 1 < u.size()) s << ' ';
        }
        s << "'/>\n";
        s << "<line x1='" << x1 - 170 << "' y1='" << ly << "' x2='"
          << x1 - 140 << "' y2='" << ly << "' stroke='" << ser.color
          << "' stroke-width='2'";
        if (!ser.dash.empty()) s << " stroke-dasharray='" << ser.dash << "'";
        s << "/>\n<text x='" << x1 - 132 << "' y='" << ly + 4
          << "' font-size='12'>" << ser.label << "</text>\n";
        ly += 18;
    }
    return s.str();
}

struct StemRow {
    std::string label;
    std::string color;
    std::vector<double> positions;
    std::vector<double> mags;  // same length
};

std::string svg_stem_chart(const std::vector<StemRow>& rows) {
    const double x0 = 70, x1 = 850, base0 = 440, row_h = 70;
    double lo = 0.0, hi = 1.0, mag_max = 0.0;
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.positions.size(); ++i) {
            lo = std::min(lo, r.positions[i]);
            hi = std::max(hi, r.positions[i]);
            mag_max = std::max(mag_max, r.mags[i]);
        }
    const double pad = 0.03 * (hi - lo + 1e-12);
    lo -= pad;
    hi += pad;
    if (mag_max <= 0.0) mag_max = 1.0;
    const auto X = [&](double d) { return x0 + (d - lo) / (hi - lo) * (x1 - x0); };
    std::ostringstream s;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double base = base0 + row_h * static_cast<double>(r);
        s << "<line x1='" << x0 << "' y1='" << base << "' x2='" << x1
          << "' y2='" << base << "' stroke='#444'/>\n"
          << "<text x='" << x0 << "' y='" << base - row_h + 14
          << "' font-size='12' fill='" << rows[r].color << "'>"
          << rows[r].label << "</text>\n";
        for (std::size_t i = 0; i < rows[r].positions.size(); ++i) {
            const double x = X(rows[r].positions[i]);
            const double h = (row_h - 22) * rows[r].mags[i] / mag_max;
            s << "<line x1='" << fmt("%.2f", x) << "' y1='" << base
              << "' x2='" << fmt("%.2f", x) << "' y2='" << fmt("%.2f", base - h)
              << "' stroke='" << rows[r].color << "' stroke-width='2'/>\n"
              << "<circle cx='" << fmt("%.2f", x) << "' cy='"
              << fmt("%.2f", base - h) << "' r='3' fill='" << rows[r].color
              << "'/>\n";
        }
    }
    const double axis_y = base0 + row_h * static_cast<double>(rows.size() - 1);
    for (double d = std::ceil(lo); d <= hi; d += 1.0)
        s << "<line x1='" << X(d) << "' y1='" << axis_y << "' x2='" << X(d)
          << "' y2='" << axis_y + 5 << "' stroke='#444'/>\n"
          << "<text x='" << X(d) << "' y='" << axis_y + 18
          << "' text-anchor='middle' font-size='11'>" << fmt("%.0f", d)
          << "</text>\n";
    s << "<text x='" << (x0 + x1) / 2 << "' y='" << axis_y + 34
      << "' text-anchor='middle' font-size='13'>element position "
         "(wavelengths), stem height ~ |w|</text>\n";
    return s.str();
}

std::string render_plot_svg(const RunReport& report,
                            const std::vector<double>& u,
                            const std::vector<double>& ref_db,
                            const std::vector<double>* synth_db,
                            const std::vector<double>* baseline_db) {
    std::vector<Series> series;
    series.push_back({"reference", "#666666", "", &ref_db});
    const bool mpm_only = report.config.method == scenario::Method::mpm;
    if (synth_db)
        series.push_back({mpm_only ? "matrix pencil" : "log-det completion",
                          "#0b64c0", "", synth_db});
    if (baseline_db)
        series.push_back({"matrix pencil baseline", "#c0330b", "6,4",
                          baseline_db});

    const auto [layout, exc] = scenario::reference_array(report.config);
    std::vector<StemRow> rows;
    StemRow ref_row{"reference (" + std::to_string(report.config.elements) +
                        " elements)",
                    "#666666",
                    layout.positions,
                    {}};
    ref_row.mags.resize(layout.positions.size());
    for (std::size_t i = 0; i < ref_row.mags.size(); ++i)
        ref_row.mags[i] = std::abs(exc.weights[static_cast<int>(i)]);
    rows.push_back(std::move(ref_row));
    const pencil::SparseArraySolution* main_sol =
        report.logdet ? &*report.logdet
                      : (report.baseline ? &*report.baseline : nullptr);
    if (main_sol) {
        StemRow syn{"synthesized (" + std::to_string(main_sol->R) +
                        " elements)",
                    "#0b64c0",
                    main_sol->positions,
                    {}};
        syn.mags.resize(main_sol->positions.size());
        for (std::size_t i = 0; i < syn.mags.size(); ++i)
            syn.mags[i] = std::abs(main_sol->weights[static_cast<int>(i)]);
        rows.push_back(std::move(syn));
    }

    std::ostringstream s;
    const double height = 470 + 70.0 * static_cast<double>(rows.size());
    s << "<svg xmlns='http://www.w3.org/2000/svg' viewBox='0 0 900 " << height
      << "' font-family='sans-serif'>\n"
      << "<rect width='900' height='" << height << "' fill='white'/>\n"
      << "<text x='450' y='24' text-anchor='middle' font-size='15'>"
      << "beampattern, " << scenario::to_string(report.config.method)
      << " synthesis</text>\n"
      << svg_pattern_plot(u, series) << svg_stem_chart(rows) << "</svg>\n";
    return s.str();
}

}  // namespace

std::string render_results_json(const RunReport& report) {
    ordered_json root;
    root["config"] = config_json(report.config);
    root["reference"] = ordered_json{{"metrics", metrics_json(report.ref_metrics)}};
    if (report.logdet) {
        ordered_json ld;
        ld["final_rank"] = report.rank_trace.back();
        ld["rank_trace"] = report.rank_trace;
        ld["initial_surrogate"] = report.initial_surrogate;
        ld["surrogate_trace"] = report.surrogate_trace;
        ld["solution"] = solution_json(*report.logdet);
        if (report.slack) {
            ld["constraint_slack"] = ordered_json{
                {"match_worst", report.slack->match_worst},
                {"bound_worst", report.slack->bound_worst},
                {"psd_min_eig", report.slack->psd_min_eig}};
        }
        ld["metrics"] = metrics_json(*report.logdet_metrics);
        root["logdet"] = std::move(ld);
    }
    if (report.baseline) {
        ordered_json bl;
        bl["solution"] = solution_json(*report.baseline);
        bl["metrics"] = metrics_json(*report.baseline_metrics);
        root["baseline"] = std::move(bl);
    }
    return root.dump(2) + "\n";
}

std::string render_ranktrace_csv(const RunReport& report) {
    std::ostringstream s;
    s << "k,rank,surrogate\n";
    for (std::size_t k = 0; k < report.rank_trace.size(); ++k) {
        const double surrogate =
            k == 0 ? report.initial_surrogate : report.surrogate_trace[k - 1];
        s << k << ',' << report.rank_trace[k] << ','
          << fmt("%.12g", surrogate) << '\n';
    }
    return s.str();
}

void emit_outputs(const RunReport& report, const std::string& out_dir,
                  bool plot) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw synth::io_error("cannot create output directory '" +
                                  out_dir + "': " + ec.message());

    write_file(dir / "results.json", render_results_json(report));

    // elements.csv describes the primary synthesis (log-det when present).
    const pencil::SparseArraySolution* main_sol =
        report.logdet ? &*report.logdet
                      : (report.baseline ? &*report.baseline : nullptr);
    {
        std::ostringstream s;
        s << "n,d_wl,w_re,w_im\n";
        if (main_sol)
            for (int r = 0; r < main_sol->R; ++r)
                s << r + 1 << ',' << fmt("%.12g", main_sol->positions[r])
                  << ',' << fmt("%.12g", main_sol->weights[r].real()) << ','
                  << fmt("%.12g", main_sol->weights[r].imag()) << '\n';
        write_file(dir / "elements.csv", s.str());
    }

    const auto grid = array_model::PatternSampleGrid::linspace(
        -1.0, 1.0, scenario::kPatternGridPoints);
    const auto [layout, exc] = scenario::reference_array(report.config);
    const auto ref_db =
        normalized_db(array_model::evaluate_pattern(layout, exc, grid));
    std::vector<double> logdet_db, baseline_db;
    if (report.logdet)
        logdet_db = normalized_db(pencil::reconstruct_pattern(*report.logdet, grid));
    if (report.baseline)
        baseline_db =
            normalized_db(pencil::reconstruct_pattern(*report.baseline, grid));

    // synth_db is the requested method's pattern; with method=both the
    // baseline gets its own column.
    const std::vector<double>* synth = report.logdet ? &logdet_db
                                     : report.baseline ? &baseline_db
                                                       : nullptr;
    const std::vector<double>* extra =
        (report.logdet && report.baseline) ? &baseline_db : nullptr;
    {
        std::ostringstream s;
        s << "u,ref_db,synth_db";
        if (extra) s << ",baseline_db";
        s << '\n';
        for (std::size_t i = 0; i < grid.u.size(); ++i) {
            s << fmt("%.8g", grid.u[i]) << ',' << fmt("%.6f", ref_db[i])
              << ',' << fmt("%.6f", synth ? (*synth)[i] : kFloorDb);
            if (extra) s << ',' << fmt("%.6f", (*extra)[i]);
            s << '\n';
        }
        write_file(dir / "pattern.csv", s.str());
    }

    if (report.logdet)
        write_file(dir / "ranktrace.csv", render_ranktrace_csv(report));

    if (plot)
        write_file(dir / "plot.svg",
                   render_plot_svg(report, grid.u, ref_db,
                                   synth,
                                   extra));
}

}  // namespace synth::emit
