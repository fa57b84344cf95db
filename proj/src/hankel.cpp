#include "synth/hankel.hpp"

#include <stdexcept>

namespace synth::hankel {

void HankelSpec::validate(int M_ref) const {
    if (N < 1 || L < 1) throw std::domain_error("HankelSpec: N, L must be >= 1");
    if (rows() < 1 || cols() < 1)
        throw std::domain_error("HankelSpec: empty matrix shape");
    if (2 * N - L < M_ref || L + 1 < M_ref)
        throw std::domain_error(
            "HankelSpec: need 2N-L >= M and L+1 >= M for M elements");
}

MatrixXcd hankelize(const VectorXcd& seq, int S) {
    const int i = static_cast<int>(seq.size()) - 1;
    if (i < 0) throw std::domain_error("hankelize: empty sequence");
    if (S < 0 || S > i) throw std::domain_error("hankelize: S out of [0, len-1]");
    MatrixXcd H(i - S + 1, S + 1);
    for (int p = 0; p <= i - S; ++p)
        for (int q = 0; q <= S; ++q) H(p, q) = seq[p + q];
    return H;
}

std::vector<std::pair<int, int>> antidiagonal_index(int n, const HankelSpec& spec) {
    if (n < -spec.N || n > spec.N)
        throw std::domain_error("antidiagonal_index: n out of [-N, N]");
    const int k = n + spec.N;
    std::vector<std::pair<int, int>> cells;
    for (int p = std::max(0, k - spec.cols() + 1);
         p <= std::min(spec.rows() - 1, k); ++p)
        cells.emplace_back(p, k - p);
    return cells;
}

RankInfo numerical_rank(const MatrixXcd& mat, double tau) {
    if (mat.size() == 0) throw std::domain_error("numerical_rank: empty matrix");
    if (!(tau > 0.0 && tau < 1.0))
        throw std::domain_error("numerical_rank: tau must be in (0, 1)");
    Eigen::JacobiSVD<MatrixXcd> svd(mat);
    RankInfo info;
    info.singular_values = svd.singularValues();
    const double s1 = info.singular_values.size() ? info.singular_values[0] : 0.0;
    if (s1 <= 0.0) {
        info.rank = 0;
        return info;
    }
    info.rank = static_cast<int>(
        (info.singular_values.array() >= tau * s1).count());
    return info;
}

}  // namespace synth::hankel
