#include "synth/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace synth::array_model {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
}

double ElementLayout::max_abs_position() const {
    double m = 0.0;
    for (double d : positions) m = std::max(m, std::abs(d));
    return m;
}

void ElementLayout::validate() const {
    if (positions.empty()) throw std::domain_error("layout: count must be >= 1");
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (!std::isfinite(positions[i]))
            throw std::domain_error("layout: non-finite position");
        if (i > 0 && !(positions[i] > positions[i - 1]))
            throw std::domain_error("layout: positions must be strictly increasing");
    }
}

ElementLayout ElementLayout::uniform(int M, double spacing_wl) {
    ElementLayout l;
    l.positions.resize(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) l.positions[m] = m * spacing_wl;
    l.validate();
    return l;
}

PatternSampleGrid PatternSampleGrid::linspace(double lo, double hi, int n) {
    PatternSampleGrid g;
    g.u.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        g.u[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    return g;
}

VectorXcd steering_vector(const ElementLayout& layout, double u) {
    layout.validate();
    if (u < -1.0 || u > 1.0)
        throw std::domain_error("steering_vector: u outside [-1, 1]");
    VectorXcd a(layout.count());
    for (Eigen::Index m = 0; m < a.size(); ++m) {
        const double ph = two_pi * layout.positions[static_cast<std::size_t>(m)] * u;
        a[m] = std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return a;
}

VectorXcd evaluate_pattern(const ElementLayout& layout, const Excitation& exc,
                           const PatternSampleGrid& grid) {
    layout.validate();
    if (static_cast<std::size_t>(exc.weights.size()) != layout.count())
        throw std::invalid_argument("evaluate_pattern: weight/layout length mismatch");
    VectorXcd out(static_cast<Eigen::Index>(grid.u.size()));
    for (std::size_t i = 0; i < grid.u.size(); ++i)
        out[static_cast<Eigen::Index>(i)] =
            exc.weights.transpose() * steering_vector(layout, grid.u[i]);
    return out;
}

// Classical Dolph construction evaluated through the Chebyshev-polynomial
// spectrum and an inverse DFT (O(M^2), M is small).  Matches the textbook
// window: T_{M-1}(beta*cos(pi*k/M)) sampled over k, transformed, symmetrized.
std::vector<double> dolph_chebyshev_taper(int M, double sll_db) {
    if (M < 1) throw std::domain_error("dolph_chebyshev_taper: M must be >= 1");
    if (!(sll_db < 0.0))
        throw std::domain_error("dolph_chebyshev_taper: sll_db must be < 0");
    if (M == 1) return {1.0};
    if (M == 2) return {1.0, 1.0};

    const int order = M - 1;
    const double ripple = std::pow(10.0, std::abs(sll_db) / 20.0);
    const double beta = std::cosh(std::acosh(ripple) / order);

    // Chebyshev polynomial of degree `order` on the scaled cosine grid.
    std::vector<double> p(static_cast<std::size_t>(M));
    for (int k = 0; k < M; ++k) {
        const double x = beta * std::cos(std::numbers::pi * k / M);
        if (x > 1.0)
            p[k] = std::cosh(order * std::acosh(x));
        else if (x < -1.0)
            p[k] = (2 * (M % 2) - 1) * std::cosh(order * std::acosh(-x));
        else
            p[k] = std::cos(order * std::acos(x));
    }

    std::vector<double> w(static_cast<std::size_t>(M));
    if (M % 2) {
        // odd: real part of the DFT, then mirror the first half
        const int n = (M + 1) / 2;
        std::vector<double> f(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int k = 0; k < M; ++k)
                acc += p[k] * std::cos(two_pi * k * i / M);
            f[i] = acc;
        }
        for (int i = 0; i < n; ++i) {
            w[n - 1 - i] = f[i];
            w[n - 1 + i] = f[i];
        }
    } else {
        // even: half-sample phase shift before the transform
        const int n = M / 2 + 1;
        std::vector<double> f(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int k = 0; k < M; ++k) {
                const double ang = std::numbers::pi * k / M;
                acc += p[k] * std::cos(two_pi * k * i / M - ang);
            }
            f[i] = acc;
        }
        for (int i = 1; i < n; ++i) {
            w[n - 1 - i] = f[i];
            w[n - 2 + i] = f[i];
        }
    }
    const double mx = *std::max_element(w.begin(), w.end());
    for (double& v : w) v /= mx;
    return w;
}

PatternMetrics pattern_metrics(const PatternSampleGrid& grid,
                               const VectorXcd& samples, double floor_db) {
    const auto n = samples.size();
    if (n < 5 || grid.u.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("pattern_metrics: need >= 5 consistent samples");
    Eigen::VectorXd mag = samples.cwiseAbs();
    Eigen::Index ip = 0;
    const double peak = mag.maxCoeff(&ip);

    PatternMetrics m;
    m.peak_u = grid.u[static_cast<std::size_t>(ip)];
    m.peak_level_db = 0.0;
    if (peak <= 0.0 || (mag.array() - peak).abs().maxCoeff() < 1e-15 * peak) {
        m.degenerate = true;
        m.psl_db = floor_db;
        m.mainlobe_null_width_u = 0.0;
        return m;
    }

    // nearest strict local minima flanking the peak (ties broken toward it)
    Eigen::Index il = ip;
    while (il > 0 && mag[il - 1] < mag[il]) --il;
    Eigen::Index ir = ip;
    while (ir < n - 1 && mag[ir + 1] < mag[ir]) ++ir;
    m.mainlobe_null_width_u =
        grid.u[static_cast<std::size_t>(ir)] - grid.u[static_cast<std::size_t>(il)];

    double side = 0.0;
    bool any = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i >= il && i <= ir) continue;
        side = std::max(side, mag[i]);
        any = true;
    }
    if (!any || side <= 0.0) {
        m.psl_db = floor_db;
        m.degenerate = !any;
    } else {
        m.psl_db = std::max(floor_db, 20.0 * std::log10(side / peak));
    }
    return m;
}

}  // namespace synth::array_model
