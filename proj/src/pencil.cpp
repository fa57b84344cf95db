#include "synth/pencil.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "synth/errors.hpp"

namespace synth::pencil {
namespace {

// Shared core: reduced pencil on the rank-R right-singular subspace of H.
VectorXcd subspace_eigenvalues(const MatrixXcd& H, int R, bool* rank_warning) {
    const int max_R = static_cast<int>(std::min(H.rows(), H.cols() - 1));
    if (R < 1 || R > max_R)
        throw std::domain_error("model order R out of range for this pencil");

    Eigen::JacobiSVD<MatrixXcd> svd(H, Eigen::ComputeThinV);
    if (rank_warning) {
        const auto& sv = svd.singularValues();
        int numerical = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv[i] >= 1e-10 * sv[0]) ++numerical;
        *rank_warning = R > numerical;
    }

    const MatrixXcd V = svd.matrixV().leftCols(R);  // (L+1) x R
    // Dropping the last/first row of V mirrors dropping the last/first column
    // of H; the nonzero pencil spectrum lives in this R x R problem.
    const MatrixXcd V1 = V.topRows(V.rows() - 1);
    const MatrixXcd V2 = V.bottomRows(V.rows() - 1);
    const MatrixXcd gram = V1.adjoint() * V1;

    Eigen::FullPivLU<MatrixXcd> lu(gram);
    if (!lu.isInvertible())
        throw synth::solver_error("reduced pencil is singular (defective subspace)");
    const MatrixXcd A = (V2.adjoint() * V1) * lu.inverse();

    Eigen::ComplexEigenSolver<MatrixXcd> eig(A, false);
    if (eig.info() != Eigen::Success)
        throw synth::solver_error("pencil eigenproblem failed to converge");
    return eig.eigenvalues();
}

SparseArraySolution assemble(const VectorXcd& z_raw,
                             const sampling::SampleSet& samples,
                             bool rank_warning) {
    const int R = static_cast<int>(z_raw.size());
    auto [d_raw, dev_raw] = positions_from_eigenvalues(z_raw, samples.delta);

    std::vector<int> order(R);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return d_raw[a] < d_raw[b]; });

    SparseArraySolution out;
    out.R = R;
    out.rank_warning = rank_warning;
    out.positions.resize(R);
    out.eigenvalues.resize(R);
    out.radial_deviation.resize(R);
    for (int r = 0; r < R; ++r) {
        out.positions[r] = d_raw[order[r]];
        out.eigenvalues[r] = z_raw[order[r]];
        out.radial_deviation[r] = dev_raw[order[r]];
    }
    std::tie(out.weights, out.ls_residual) =
        ls_weights(out.eigenvalues, samples);
    return out;
}

}  // namespace

std::pair<MatrixXcd, MatrixXcd> pencil_matrices(
    const VectorXcd& x_R, const hankel::HankelSpec& spec) {
    if (spec.L < 1) throw std::domain_error("pencil parameter L must be >= 1");
    if (x_R.size() != 2 * spec.N + 1)
        throw std::domain_error("sample sequence length does not match 2N+1");
    if (spec.rows() < 1)
        throw std::domain_error("pencil parameter L must be <= 2N");
    const MatrixXcd H = hankel::hankelize(x_R, spec.L);
    return {H.leftCols(spec.L), H.rightCols(spec.L)};
}

VectorXcd pencil_eigenvalues(const MatrixXcd& Y1, const MatrixXcd& Y2, int R,
                             bool* rank_warning) {
    if (Y1.rows() != Y2.rows() || Y1.cols() != Y2.cols())
        throw std::domain_error("pencil matrices must share a shape");
    // The two shifted matrices overlap except for one column each; the full
    // Hankel matrix is recovered exactly as [Y1 | last column of Y2].
    MatrixXcd H(Y1.rows(), Y1.cols() + 1);
    H.leftCols(Y1.cols()) = Y1;
    H.col(Y1.cols()) = Y2.col(Y2.cols() - 1);
    return subspace_eigenvalues(H, R, rank_warning);
}

std::pair<std::vector<double>, VectorXd> positions_from_eigenvalues(
    const VectorXcd& z, double delta) {
    if (delta <= 0.0) throw std::domain_error("delta must be positive");
    const double two_pi_delta = 2.0 * M_PI * delta;
    std::vector<double> d(z.size());
    VectorXd dev(z.size());
    for (int r = 0; r < z.size(); ++r) {
        const double mag = std::abs(z[r]);
        if (mag == 0.0)
            throw std::domain_error("pencil eigenvalue at the origin");
        double phase = std::arg(z[r]);
        if (phase == -M_PI) phase = M_PI;  // principal branch (-pi, pi]
        d[r] = phase / two_pi_delta;
        dev[r] = std::abs(std::log(mag));
    }
    return {std::move(d), std::move(dev)};
}

std::pair<VectorXcd, double> ls_weights(const VectorXcd& z,
                                        const sampling::SampleSet& samples) {
    const int R = static_cast<int>(z.size());
    const int N = samples.N;
    if (R < 1 || R > 2 * N + 1)
        throw std::domain_error("weight fit needs 1 <= R <= 2N+1");
    for (int i = 0; i < R; ++i)
        for (int j = i + 1; j < R; ++j)
            if (std::abs(z[i] - z[j]) <= 1e-10 * std::max(1.0, std::abs(z[i]))) {
                std::ostringstream msg;
                msg << "near-duplicate pencil eigenvalues " << i << " and "
                    << j << " (z = " << z[i] << ")";
                throw synth::solver_error(msg.str());
            }

    MatrixXcd Z(2 * N + 1, R);
    for (int r = 0; r < R; ++r) {
        // Fill each column by running products; z^-N then multiply up keeps
        // the cost linear and avoids pow() branch cuts.
        const std::complex<double> zr = z[r];
        std::complex<double> p = std::pow(zr, -N);
        for (int i = 0; i <= 2 * N; ++i) {
            Z(i, r) = p;
            p *= zr;
        }
    }
    VectorXcd w = Z.colPivHouseholderQr().solve(samples.x);
    const double residual = (Z * w - samples.x).norm() / samples.x.norm();
    return {std::move(w), residual};
}

VectorXcd reconstruct_pattern(const SparseArraySolution& solution,
                              const array_model::PatternSampleGrid& grid) {
    array_model::ElementLayout layout{solution.positions};
    array_model::Excitation exc{solution.weights};
    return array_model::evaluate_pattern(layout, exc, grid);
}

SparseArraySolution estimate(const VectorXcd& x_R,
                             const sampling::SampleSet& samples,
                             const hankel::HankelSpec& spec, int R) {
    auto [Y1, Y2] = pencil_matrices(x_R, spec);
    bool warn = false;
    const VectorXcd z = pencil_eigenvalues(Y1, Y2, R, &warn);
    return assemble(z, samples, warn);
}

SparseArraySolution baseline_mpm(const sampling::SampleSet& samples,
                                 const hankel::HankelSpec& spec,
                                 std::optional<int> target_R,
                                 double sigma_ratio) {
    const MatrixXcd H = hankel::hankelize(samples.x, spec.L);
    int R;
    if (target_R) {
        R = *target_R;
    } else {
        Eigen::JacobiSVD<MatrixXcd> svd(H);
        const auto& sv = svd.singularValues();
        R = 0;
        for (int i = 0; i < sv.size(); ++i)
            if (sv[i] >= sigma_ratio * sv[0]) ++R;
        if (R < 1) R = 1;
    }
    bool warn = false;
    const VectorXcd z = subspace_eigenvalues(H, R, &warn);
    return assemble(z, samples, warn);
}

}  // namespace synth::pencil
