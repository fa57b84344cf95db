#pragma once
#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "synth/conelp.hpp"
#include "synth/hankel.hpp"
#include "synth/sampling.hpp"

namespace synth::completion {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Iterate of the log-det heuristic: LMI blocks, the completed anti-diagonal
/// sequence, and the per-iteration traces.
struct LogDetState {
    MatrixXcd P, Q;              // Hermitian PSD
    VectorXcd x_R;               // completed samples, length 2N+1
    int k = 0;
    std::vector<int> rank_trace;          // length k+1 (initial + per solve)
    std::vector<double> surrogate_trace;  // length k, log det(diag(P,Q)+dI)
};

/// [[Re H, -Im H], [Im H, Re H]]; PSD of the image iff PSD of H, spectrum
/// doubled in multiplicity. Throws if H is not Hermitian to 1e-10 (relative).
MatrixXd hermitian_real_embedding(const MatrixXcd& H);

/// One convex subproblem of the reweighted-trace iteration:
///     min Tr(W_P P) + Tr(W_Q Q)
///     s.t. [[P, Y],[Y^H, Q]] >= 0 with Y = hankelize(x_R, L),
///          |x_R(n) - x(n)| <= eps  (match set),
///          |x_R(n)| <= rho(n)      (sidelobe set).
/// Variables are flattened real scalars: P diagonal, P off-diagonal re/im
/// pairs (row-major upper), Q likewise, then Re x_R, Im x_R. The Hankel ties
/// are realized by sharing x-variables across the PSD anti-diagonal cells, so
/// there are no explicit equality rows.
class ConicSubproblem {
public:
    ConicSubproblem(const LogDetState& state,
                    const sampling::ConstraintSpec& constraints,
                    const sampling::SampleSet& samples,
                    const hankel::HankelSpec& spec, double delta);

    const MatrixXcd& weight_P() const { return WP_; }
    const MatrixXcd& weight_Q() const { return WQ_; }
    int num_vars() const { return m_; }
    const std::vector<conelp::SocBlock>& soc_blocks() const { return socs_; }
    const conelp::PsdBlock& psd_block() const { return *psd_; }
    VectorXd cost_vector() const;

    /// Decoders for the flattened solution; P/Q are Hermitian by encoding.
    MatrixXcd extract_P(const VectorXd& sol) const;
    MatrixXcd extract_Q(const VectorXd& sol) const;
    VectorXcd extract_x(const VectorXd& sol) const;

private:
    int x_re_index(int k) const { return off_x_ + k; }
    int x_im_index(int k) const { return off_x_ + ns_ + k; }

    int rows_ = 0, cols_ = 0, ns_ = 0, m_ = 0;
    int off_pre_ = 0, off_q_ = 0, off_qre_ = 0, off_x_ = 0;
    MatrixXcd WP_, WQ_;
    std::unique_ptr<conelp::PsdBlock> psd_;
    std::vector<conelp::SocBlock> socs_;
};

struct SubproblemSolution {
    conelp::Status status = conelp::Status::numerical_failure;
    MatrixXcd P, Q;
    VectorXcd x_R;
    double objective = 0.0;
    int iterations = 0;
    double pres = 0.0, dres = 0.0;
};

/// Injected conic back end: one PSD cone plus modulus second-order cones.
class SolverInterface {
public:
    virtual ~SolverInterface() = default;
    virtual SubproblemSolution solve(const ConicSubproblem& sub) = 0;
};

/// In-process interior-point realization of SolverInterface.
class ConicIpmSolver final : public SolverInterface {
public:
    explicit ConicIpmSolver(conelp::Settings settings = {})
        : settings_(settings) {}
    SubproblemSolution solve(const ConicSubproblem& sub) override;

private:
    conelp::Settings settings_;
};

struct RunOptions {
    int iterations = 10;      // K
    double delta_rel = 1e-3;  // delta = delta_rel * sigma_1(Y_0), held fixed
    double rank_tau = 1e-3;
    bool early_stop = false;  // stop once the rank is unchanged 3 iterations
    double solver_tol = 0.0;  // feasibility slack; <= 0 means 1e-6 * peak
    bool verbose = false;
};

/// P_0 = Q_0 = I, x_R = reference samples, rank_trace[0] from the raw Hankel.
LogDetState init_state(const sampling::SampleSet& samples,
                       const hankel::HankelSpec& spec, double rank_tau = 1e-3);

/// K reweighted solves. Appends a rank and a surrogate value per solve.
/// Infeasible subproblems raise infeasible_error (eps/rho too tight); a
/// numerical failure is retried once with delta*10 before raising
/// solver_error. Every accepted iterate is validated against the constraint
/// set (slack <= solver_tol) and the PSD residual bound.
LogDetState run_logdet(const sampling::SampleSet& samples,
                       const hankel::HankelSpec& spec,
                       const sampling::ConstraintSpec& constraints,
                       const RunOptions& opts, SolverInterface& solver);

}  // namespace synth::completion
