#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "synth/array_model.hpp"
#include "synth/errors.hpp"
#include "synth/pencil.hpp"
#include "synth/sampling.hpp"

using namespace synth;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using std::complex;

namespace {

sampling::SampleSet tone_samples(const std::vector<complex<double>>& z,
                                 const std::vector<complex<double>>& w,
                                 int N) {
    sampling::SampleSet s;
    s.N = N;
    s.delta = 1.0 / N;
    s.x.setZero(2 * N + 1);
    for (int n = -N; n <= N; ++n)
        for (std::size_t r = 0; r < z.size(); ++r)
            s.x[n + N] += w[r] * std::pow(z[r], n);
    return s;
}

sampling::SampleSet reference_case() {
    auto layout = array_model::ElementLayout::uniform(20, 0.5);
    auto taper = array_model::dolph_chebyshev_taper(20, -30.0);
    array_model::Excitation exc;
    exc.weights.resize(20);
    for (int i = 0; i < 20; ++i) exc.weights[i] = taper[i];
    return sampling::sample_reference(layout, exc, 40);
}

// Independently published positions for the 12-element reduction of the
// 20-element -30 dB reference (classical matrix-pencil truncation).
const double kBaselinePositions[12] = {0.1160, 0.9519, 1.7846, 2.6272,
                                       3.4748, 4.3247, 5.1753, 6.0252,
                                       6.8728, 7.7154, 8.5481, 9.3840};

}  // namespace

TEST_CASE("pencil matrices drop opposite columns of the Hankel matrix") {
    VectorXcd seq(5);
    seq << 1.0, 2.0, 3.0, 4.0, 5.0;
    auto [Y1, Y2] = pencil::pencil_matrices(seq, {2, 2});
    REQUIRE(Y1.rows() == 3);
    REQUIRE(Y1.cols() == 2);
    MatrixXcd expect1(3, 2), expect2(3, 2);
    expect1 << 1, 2, 2, 3, 3, 4;
    expect2 << 2, 3, 3, 4, 4, 5;
    CHECK((Y1 - expect1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((Y2 - expect2).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(pencil::pencil_matrices(seq, {2, 0}), std::domain_error);
    CHECK_THROWS_AS(pencil::pencil_matrices(seq, {3, 2}), std::domain_error);
}

TEST_CASE("a single exponential shifts the pencil matrices") {
    const complex<double> z = std::polar(1.0, M_PI / 8.0);
    auto s = tone_samples({z}, {complex<double>(1.0, 0.0)}, 6);
    auto [Y1, Y2] = pencil::pencil_matrices(s.x, {6, 6});
    CHECK((Y2 - z * Y1).cwiseAbs().maxCoeff() < 1e-12);

    auto lambda = pencil::pencil_eigenvalues(Y1, Y2, 1);
    REQUIRE(lambda.size() == 1);
    CHECK(std::abs(lambda[0] - z) < 1e-10);
}

TEST_CASE("two distinct tones are resolved") {
    const complex<double> z1 = std::polar(1.0, 0.7);
    const complex<double> z2 = std::polar(1.0, -1.3);
    auto s = tone_samples({z1, z2},
                          {complex<double>(2.0, 0.4),
                           complex<double>(-0.3, 1.1)},
                          8);
    auto [Y1, Y2] = pencil::pencil_matrices(s.x, {8, 8});
    auto lambda = pencil::pencil_eigenvalues(Y1, Y2, 2);
    REQUIRE(lambda.size() == 2);
    const double e1 = std::min(std::abs(lambda[0] - z1), std::abs(lambda[0] - z2));
    const double e2 = std::min(std::abs(lambda[1] - z1), std::abs(lambda[1] - z2));
    CHECK(e1 < 1e-8);
    CHECK(e2 < 1e-8);
    CHECK(std::abs(lambda[0] - lambda[1]) > 0.1);
}

TEST_CASE("positions invert the forward phase map") {
    VectorXcd z(2);
    z << complex<double>(1.0, 0.0), std::polar(1.0, 2.0 * M_PI * 0.5 * 0.025);
    auto [d, dev] = pencil::positions_from_eigenvalues(z, 0.025);
    CHECK(d[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(dev[0] == doctest::Approx(0.0));
    CHECK(dev[1] == doctest::Approx(0.0));

    // arg = -pi maps to the principal-branch endpoint +pi.
    VectorXcd zneg(1);
    zneg << complex<double>(-1.0, 0.0);
    auto [dneg, devneg] = pencil::positions_from_eigenvalues(zneg, 0.25);
    CHECK(dneg[0] == doctest::Approx(2.0).epsilon(1e-12));

    VectorXcd zero(1);
    zero << complex<double>(0.0, 0.0);
    CHECK_THROWS_AS(pencil::positions_from_eigenvalues(zero, 0.25),
                    std::domain_error);

    // Off-circle modulus shows up as radial deviation.
    VectorXcd off(1);
    off << complex<double>(1.1, 0.0);
    auto [doff, devoff] = pencil::positions_from_eigenvalues(off, 0.25);
    CHECK(devoff[0] == doctest::Approx(std::log(1.1)).epsilon(1e-12));
}

TEST_CASE("least-squares weights fit constants and exact tones") {
    // Constant sequence: single tone z = 1 recovers the constant exactly.
    sampling::SampleSet s;
    s.N = 5;
    s.delta = 0.2;
    s.x = VectorXcd::Constant(11, complex<double>(2.5, -0.5));
    VectorXcd z1(1);
    z1 << complex<double>(1.0, 0.0);
    auto [w, resid] = pencil::ls_weights(z1, s);
    CHECK(std::abs(w[0] - complex<double>(2.5, -0.5)) < 1e-12);
    CHECK(resid < 1e-14);

    // Exact three-tone data: recovery to machine precision.
    std::vector<complex<double>> zs = {std::polar(1.0, 0.4),
                                       std::polar(1.0, -0.9),
                                       std::polar(1.0, 2.2)};
    std::vector<complex<double>> ws = {complex<double>(1.0, 1.0),
                                       complex<double>(-2.0, 0.3),
                                       complex<double>(0.1, -0.7)};
    auto tones = tone_samples(zs, ws, 8);
    VectorXcd zv(3);
    for (int r = 0; r < 3; ++r) zv[r] = zs[static_cast<std::size_t>(r)];
    auto [w3, resid3] = pencil::ls_weights(zv, tones);
    for (int r = 0; r < 3; ++r)
        CHECK(std::abs(w3[r] - ws[static_cast<std::size_t>(r)]) < 1e-10);
    CHECK(resid3 < 1e-12);

    // Near-duplicate eigenvalues are refused with the offending pair named.
    VectorXcd dup(2);
    dup << std::polar(1.0, 0.4), std::polar(1.0, 0.4 + 1e-13);
    bool threw = false;
    try {
        pencil::ls_weights(dup, tones);
    } catch (const synth::solver_error& e) {
        threw = true;
        CHECK(std::string(e.what()).find("near-duplicate") !=
              std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("least-squares solution satisfies the normal equations") {
    auto s = reference_case();
    // Deliberately small model order: the fit is inexact but must still be
    // the orthogonal projection.
    VectorXcd z(3);
    z << std::polar(1.0, 0.3), std::polar(1.0, 0.9), std::polar(1.0, -0.4);
    auto [w, resid] = pencil::ls_weights(z, s);
    MatrixXcd Z(s.size(), 3);
    for (int r = 0; r < 3; ++r)
        for (int n = -s.N; n <= s.N; ++n)
            Z(n + s.N, r) = std::pow(z[r], n);
    const VectorXcd grad = Z.adjoint() * (Z * w - s.x);
    CHECK(grad.norm() <= 1e-8 * s.x.norm());
    CHECK(resid > 0.0);
}

TEST_CASE("reconstruction agrees with the fitted samples on the grid") {
    std::vector<complex<double>> zs = {std::polar(1.0, 0.5),
                                       std::polar(1.0, -0.2)};
    std::vector<complex<double>> ws = {complex<double>(1.2, 0.0),
                                       complex<double>(0.4, 0.8)};
    auto s = tone_samples(zs, ws, 6);
    auto sol = pencil::estimate(s.x, s, {6, 6}, 2);

    array_model::PatternSampleGrid grid;
    for (int n = -s.N; n <= s.N; ++n) grid.u.push_back(n * s.delta);
    auto F = pencil::reconstruct_pattern(sol, grid);
    MatrixXcd Z(s.size(), sol.R);
    for (int r = 0; r < sol.R; ++r)
        for (int n = -s.N; n <= s.N; ++n)
            Z(n + s.N, r) = std::pow(sol.eigenvalues[r], n);
    const VectorXcd fitted = Z * sol.weights;
    CHECK((F - fitted).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("round trip recovers random sparse arrays") {
    std::mt19937 rng(424242u);
    // Span stays below the N = 12 Nyquist bound of 6 wavelengths.
    std::uniform_real_distribution<double> gap(0.4, 0.8);
    std::uniform_real_distribution<double> re(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int M = 1 + static_cast<int>(rng() % 8);
        array_model::ElementLayout layout;
        double pos = 0.0;
        for (int m = 0; m < M; ++m) {
            layout.positions.push_back(pos);
            pos += gap(rng);
        }
        array_model::Excitation exc;
        exc.weights.resize(M);
        for (int m = 0; m < M; ++m)
            exc.weights[m] = complex<double>(re(rng) + 2.0, re(rng));
        const int N = 12;
        auto s = sampling::sample_reference(layout, exc, N);
        auto sol = pencil::estimate(s.x, s, {N, 12}, M);
        REQUIRE(sol.R == M);
        for (int m = 0; m < M; ++m) {
            worst = std::max(worst, std::abs(sol.positions[m] -
                                             layout.positions[m]));
            worst = std::max(worst,
                             std::abs(sol.weights[m] - exc.weights[m]) /
                                 std::abs(exc.weights[m]));
            CHECK(sol.radial_deviation[m] < 1e-8);
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("baseline truncation reproduces the published positions") {
    auto s = reference_case();
    auto sol = pencil::baseline_mpm(s, {40, 40}, 12);
    REQUIRE(sol.R == 12);
    for (int r = 0; r < 12; ++r) {
        CAPTURE(r);
        CHECK(std::abs(sol.positions[r] - kBaselinePositions[r]) < 1e-3);
    }
    CHECK(sol.ls_residual == doctest::Approx(0.009524).epsilon(0.02));
    CHECK_FALSE(sol.rank_warning);

    // Default singular-value threshold lands on the same order.
    auto sol_auto = pencil::baseline_mpm(s, {40, 40});
    CHECK(sol_auto.R == 12);

    // Lossless truncation: exact data at its true order is recovered.
    std::vector<complex<double>> zs = {std::polar(1.0, 0.3),
                                       std::polar(1.0, 1.1)};
    std::vector<complex<double>> ws = {complex<double>(1.0, 0.0),
                                       complex<double>(0.5, 0.5)};
    auto tones = tone_samples(zs, ws, 8);
    auto exact = pencil::baseline_mpm(tones, {8, 8}, 2);
    CHECK(exact.ls_residual < 1e-12);
}

TEST_CASE("over-order requests are flagged, not fatal") {
    array_model::ElementLayout layout{{0.7, 2.3}};
    array_model::Excitation exc;
    exc.weights.resize(2);
    exc.weights << complex<double>(1.0, 0.3), complex<double>(-0.4, 0.9);
    auto s = sampling::sample_reference(layout, exc, 8);
    auto sol = pencil::estimate(s.x, s, {8, 8}, 4);
    CHECK(sol.rank_warning);
    CHECK(sol.ls_residual < 1e-10);
    // The true positions are among the recovered set.
    for (double d : {0.7, 2.3}) {
        double best = 1e9;
        for (double p : sol.positions) best = std::min(best, std::abs(p - d));
        CHECK(best < 1e-6);
    }
    auto honest = pencil::estimate(s.x, s, {8, 8}, 2);
    CHECK_FALSE(honest.rank_warning);
}
