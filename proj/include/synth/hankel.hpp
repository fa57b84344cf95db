#pragma once
#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace synth::hankel {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Shape bookkeeping for the (2N-L+1) x (L+1) Hankel matrix.
struct HankelSpec {
    int N = 0;  // samples n = -N..N
    int L = 0;  // pencil parameter

    int rows() const { return 2 * N - L + 1; }
    int cols() const { return L + 1; }

    /// Enforces 2N-L >= M and L+1 >= M for a reference element count M.
    void validate(int M_ref) const;
};

/// H_(S): seq of length i+1 -> (i-S+1) x (S+1), entry (p,q) = seq[p+q].
MatrixXcd hankelize(const VectorXcd& seq, int S);

/// All (row, col) cells with row+col = n+N for sample index n in -N..N.
std::vector<std::pair<int, int>> antidiagonal_index(int n, const HankelSpec& spec);

struct RankInfo {
    int rank = 0;
    Eigen::VectorXd singular_values;
};

/// Count of singular values >= tau * sigma_1, with the spectrum attached.
RankInfo numerical_rank(const MatrixXcd& mat, double tau);

}  // namespace synth::hankel
