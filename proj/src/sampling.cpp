#include "synth/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace synth::sampling {

SampleSet sample_reference(const ElementLayout& layout, const Excitation& exc,
                           int N) {
    layout.validate();
    if (exc.weights.size() != static_cast<Eigen::Index>(layout.count()))
        throw std::invalid_argument("excitation length does not match layout");
    if (N < 2) throw std::domain_error("need N >= 2 (at least 5 samples)");

    const double delta = 1.0 / N;
    const double d_max = layout.max_abs_position();
    // Phases 2*pi*d*u sampled at spacing delta alias once 2*d_max*delta > 1.
    if (d_max > 0.0 && delta > 1.0 / (2.0 * d_max) + 1e-12) {
        throw std::domain_error(
            "sample spacing " + std::to_string(delta) +
            " violates the Nyquist bound 1/(2*d_max) = " +
            std::to_string(1.0 / (2.0 * d_max)) +
            "; increase the sample count");
    }

    SampleSet out;
    out.N = N;
    out.delta = delta;
    array_model::PatternSampleGrid grid;
    grid.u.resize(2 * N + 1);
    for (int n = -N; n <= N; ++n) grid.u[n + N] = n * delta;
    out.x = array_model::evaluate_pattern(layout, exc, grid);
    return out;
}

RegionPartition partition_mainlobe(const SampleSet& samples, double rho_db) {
    if (rho_db >= 0.0)
        throw std::domain_error("mainlobe threshold must be below the peak");
    const Eigen::VectorXd mag = samples.x.cwiseAbs();
    Eigen::Index peak_idx = 0;
    const double peak = mag.maxCoeff(&peak_idx);
    if (!(peak > 0.0))
        throw std::domain_error("reference pattern is identically zero");

    RegionPartition part;
    part.rho_db = rho_db;
    part.rho_abs = std::pow(10.0, rho_db / 20.0) * peak;

    Eigen::Index il = peak_idx, ir = peak_idx;
    while (il > 0 && mag[il - 1] > part.rho_abs) --il;
    while (ir + 1 < mag.size() && mag[ir + 1] > part.rho_abs) ++ir;
    part.n_l = static_cast<int>(il) - samples.N;
    part.n_r = static_cast<int>(ir) - samples.N;
    return part;
}

ConstraintSpec build_constraints(const SampleSet& samples,
                                 const RegionPartition& part,
                                 const std::vector<int>& match_offsets,
                                 double eps_rel,
                                 const std::vector<NotchMask>& masks) {
    if (eps_rel <= 0.0) throw std::domain_error("eps_rel must be positive");
    const Eigen::VectorXd mag = samples.x.cwiseAbs();
    Eigen::Index peak_idx = 0;
    const double peak = mag.maxCoeff(&peak_idx);
    const int peak_n = static_cast<int>(peak_idx) - samples.N;

    ConstraintSpec spec;
    spec.peak = peak;
    spec.eps = eps_rel * peak;

    std::set<int> match_ns;
    for (int off : match_offsets) {
        const int n = peak_n + off;
        if (n < part.n_l || n > part.n_r)
            throw std::domain_error("match offset " + std::to_string(off) +
                                    " leaves the mainlobe region");
        if (!match_ns.insert(n).second)
            throw std::domain_error("duplicate match offset");
    }
    for (int n : match_ns) spec.match.push_back({n, samples.at(n)});

    for (int n = part.n_l; n <= part.n_r; ++n)
        if (!match_ns.count(n)) spec.free_set.push_back(n);

    for (int n = -samples.N; n <= samples.N; ++n) {
        if (part.in_mainlobe(n)) continue;
        const double u = n * samples.delta;
        double level = part.rho_abs;
        for (const auto& m : masks) {
            if (u >= m.u_lo && u <= m.u_hi) {
                const double masked = std::pow(10.0, m.level_db / 20.0) * peak;
                level = std::min(level, masked);
            }
        }
        spec.bound.emplace_back(n, level);
    }
    return spec;
}

}  // namespace synth::sampling
