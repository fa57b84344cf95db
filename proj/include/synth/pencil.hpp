#pragma once
#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "synth/array_model.hpp"
#include "synth/hankel.hpp"
#include "synth/sampling.hpp"

namespace synth::pencil {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Element positions and excitations recovered from a Hankel sample sequence.
struct SparseArraySolution {
    int R = 0;
    std::vector<double> positions;  // wavelengths, sorted ascending
    VectorXcd weights;              // LS excitation, permuted with positions
    VectorXcd eigenvalues;          // pencil eigenvalues z_r (same order)
    VectorXd radial_deviation;      // |ln|z_r||, unit-circle departure
    double ls_residual = 0.0;       // ||Z w - x|| / ||x||
    bool rank_warning = false;      // R exceeded the data's numerical rank
};

/// Y1 = full Hankel matrix minus its last column, Y2 = minus its first
/// column; both (2N-L+1) x L.
std::pair<MatrixXcd, MatrixXcd> pencil_matrices(const VectorXcd& x_R,
                                                const hankel::HankelSpec& spec);

/// Eigenvalues of the pencil reduced to the rank-R principal row subspace of
/// the full Hankel matrix [Y1 | last column of Y2]. The reduced R x R problem
/// cannot produce the L - R spurious zeros of the rectangular formulation.
/// *rank_warning (if non-null) is set when R exceeds the numerical rank.
VectorXcd pencil_eigenvalues(const MatrixXcd& Y1, const MatrixXcd& Y2, int R,
                             bool* rank_warning = nullptr);

/// d_r = arg(z_r) / (2 pi delta) on the principal branch (-pi, pi], plus the
/// radial deviations |ln|z_r||. Order follows z.
std::pair<std::vector<double>, VectorXd> positions_from_eigenvalues(
    const VectorXcd& z, double delta);

/// Least-squares fit of sum_r w_r z_r^n (n = -N..N) against samples.x via a
/// column-pivoted QR. Returns the weights and the relative residual.
std::pair<VectorXcd, double> ls_weights(const VectorXcd& z,
                                        const sampling::SampleSet& samples);

/// F_hat(u) = sum_r w_r exp(j 2 pi d_r u) evaluated on the grid.
VectorXcd reconstruct_pattern(const SparseArraySolution& solution,
                              const array_model::PatternSampleGrid& grid);

/// Full pipeline on an arbitrary sequence (completed x_R or raw reference):
/// pencil at order R, positions sorted ascending, LS weights fitted against
/// the original samples.
SparseArraySolution estimate(const VectorXcd& x_R,
                             const sampling::SampleSet& samples,
                             const hankel::HankelSpec& spec, int R);

/// Classical matrix-pencil baseline: rank-R truncation of the reference
/// Hankel matrix (R = target_R if given, else the count of singular values
/// >= sigma_ratio * sigma_1), then the standard pencil pipeline.
SparseArraySolution baseline_mpm(const sampling::SampleSet& samples,
                                 const hankel::HankelSpec& spec,
                                 std::optional<int> target_R = std::nullopt,
                                 double sigma_ratio = 1e-2);

}  // namespace synth::pencil
