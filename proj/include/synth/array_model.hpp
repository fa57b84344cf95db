#pragma once
#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace synth::array_model {

using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Linear-array geometry. Positions are in wavelengths, so the lambda factor
/// cancels in every phase term (lambda/2 spacing is stored as 0.5).
struct ElementLayout {
    std::vector<double> positions;  // strictly increasing, finite

    std::size_t count() const { return positions.size(); }
    double max_abs_position() const;
    void validate() const;  // throws std::domain_error on violation

    static ElementLayout uniform(int M, double spacing_wl);
};

struct Excitation {
    VectorXcd weights;  // same length as the owning layout, not all zero
};

struct PatternSampleGrid {
    std::vector<double> u;  // strictly increasing, within [-1, 1]

    static PatternSampleGrid linspace(double lo, double hi, int n);
};

struct PatternMetrics {
    double peak_u = 0.0;
    double peak_level_db = 0.0;       // 0 at peak after normalization
    double psl_db = 0.0;              // peak sidelobe relative to mainlobe peak
    double mainlobe_null_width_u = 0; // u-distance between flanking minima
    bool degenerate = false;          // constant input / no sidelobe region
};

/// a(u): entry m = exp(j*2*pi*d_m*u). Throws std::domain_error for |u| > 1.
VectorXcd steering_vector(const ElementLayout& layout, double u);

/// F(u) = w^T a(u) per grid point (unconjugated weights).
VectorXcd evaluate_pattern(const ElementLayout& layout, const Excitation& exc,
                           const PatternSampleGrid& grid);

/// Dolph-Chebyshev taper, equiripple sidelobes at sll_db for a uniform
/// lambda/2 array, normalized so max(w) = 1. sll_db must be negative.
std::vector<double> dolph_chebyshev_taper(int M, double sll_db);

/// Peak / PSL / mainlobe width from |samples| on the grid. The mainlobe is
/// bounded by the nearest strict local minima flanking the peak; PSL is the
/// max level outside those bounds in dB relative to the peak. floor_db is
/// reported when there is no sidelobe region.
PatternMetrics pattern_metrics(const PatternSampleGrid& grid,
                               const VectorXcd& samples,
                               double floor_db = -300.0);

}  // namespace synth::array_model
