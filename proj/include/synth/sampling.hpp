#pragma once
#include <complex>
#include <vector>

#include "synth/array_model.hpp"

namespace synth::sampling {

using array_model::ElementLayout;
using array_model::Excitation;
using Eigen::VectorXcd;

/// x(n) = F(n*Delta) for n = -N..N on the exact [-1, 1] grid (Delta = 1/N).
struct SampleSet {
    VectorXcd x;        // length 2N+1, index 0 <-> n = -N
    int N = 0;
    double delta = 0.0; // 1/N

    std::complex<double> at(int n) const { return x[n + N]; }
    int size() const { return 2 * N + 1; }
    double peak_abs() const { return x.cwiseAbs().maxCoeff(); }
};

/// Mainlobe index window V = {n_l..n_r}; everything else is V_bar.
struct RegionPartition {
    int n_l = 0, n_r = 0;
    double rho_db = 0.0;   // threshold that defined the window
    double rho_abs = 0.0;  // 10^(rho_db/20) * peak

    bool in_mainlobe(int n) const { return n >= n_l && n <= n_r; }
};

struct NotchMask {
    double u_lo = 0.0, u_hi = 0.0;
    double level_db = 0.0;
};

struct MatchPoint {
    int n;                        // sample index
    std::complex<double> target;  // x(n)
};

/// Discretized constraint set of the completion problem.
struct ConstraintSpec {
    std::vector<MatchPoint> match;              // |x_R(n) - x(n)| <= eps
    double eps = 0.0;                           // absolute, linear scale
    std::vector<std::pair<int, double>> bound;  // n in V_bar -> rho(n)
    std::vector<int> free_set;                  // V minus match set
    double peak = 0.0;                          // reference peak magnitude
};

/// Sample the reference pattern; enforces the Nyquist precondition
/// Delta <= 1/(2*d_max) so pencil phases are unambiguous.
SampleSet sample_reference(const ElementLayout& layout, const Excitation& exc,
                           int N);

/// Scan outward from the |x| peak; the mainlobe keeps every index whose
/// magnitude stays above rho_abs = 10^(rho_db/20) * max|x|.
RegionPartition partition_mainlobe(const SampleSet& samples, double rho_db);

/// match_set = {peak + o : o in offsets} with tolerance eps_rel * peak;
/// sidelobe bounds rho(n) from the base level tightened by covering masks.
ConstraintSpec build_constraints(const SampleSet& samples,
                                 const RegionPartition& part,
                                 const std::vector<int>& match_offsets,
                                 double eps_rel,
                                 const std::vector<NotchMask>& masks);

}  // namespace synth::sampling
