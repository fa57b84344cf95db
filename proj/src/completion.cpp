#include "synth/completion.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "synth/errors.hpp"

namespace synth::completion {

namespace {

/// log det(H + delta I) for Hermitian H via its eigenvalues.
double logdet_shifted(const MatrixXcd& H, double delta) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        acc += std::log(es.eigenvalues()[i] + delta);
    return acc;
}

/// Hermitian positive-definite inverse of (H + delta I), adjoint-averaged.
/// The product residual guards against a silently bad factorization.
MatrixXcd shifted_inverse(const MatrixXcd& H, double delta) {
    const int n = static_cast<int>(H.rows());
    MatrixXcd A = H + delta * MatrixXcd::Identity(n, n);
    Eigen::LLT<MatrixXcd> llt(A);
    if (llt.info() != Eigen::Success)
        throw synth::solver_error(
            "weight matrix factorization failed (iterate left the PSD cone)");
    MatrixXcd W = llt.solve(MatrixXcd::Identity(n, n));
    W = (W + W.adjoint()) / 2.0;
    const double resid = (A * W - MatrixXcd::Identity(n, n))
                             .cwiseAbs()
                             .maxCoeff();
    if (!(resid <= 1e-6))
        throw synth::solver_error(
            "weight inversion residual " + std::to_string(resid) +
            " exceeds 1e-6; iterate too ill-conditioned");
    return W;
}

}  // namespace

MatrixXd hermitian_real_embedding(const MatrixXcd& H) {
    if (H.rows() != H.cols())
        throw std::domain_error("embedding needs a square matrix");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw std::domain_error("matrix is not Hermitian to 1e-10");
    const int n = static_cast<int>(H.rows());
    MatrixXd out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = H.real();
    out.topRightCorner(n, n) = -H.imag();
    out.bottomLeftCorner(n, n) = H.imag();
    out.bottomRightCorner(n, n) = H.real();
    return out;
}

ConicSubproblem::ConicSubproblem(const LogDetState& state,
                                 const sampling::ConstraintSpec& constraints,
                                 const sampling::SampleSet& samples,
                                 const hankel::HankelSpec& spec, double delta) {
    if (delta <= 0.0) throw std::domain_error("delta must be positive");
    rows_ = spec.rows();
    cols_ = spec.cols();
    ns_ = 2 * samples.N + 1;
    if (state.P.rows() != rows_ || state.Q.rows() != cols_)
        throw std::invalid_argument("state dimensions disagree with spec");

    WP_ = shifted_inverse(state.P, delta);
    WQ_ = shifted_inverse(state.Q, delta);

    const int nP = rows_ + rows_ * (rows_ - 1);
    const int nQ = cols_ + cols_ * (cols_ - 1);
    off_pre_ = rows_;
    off_q_ = nP;
    off_qre_ = nP + cols_;
    off_x_ = nP + nQ;
    m_ = nP + nQ + 2 * ns_;

    const int nb = rows_ + cols_;
    psd_ = std::make_unique<conelp::PsdBlock>(2 * nb, m_);
    auto& blk = *psd_;
    for (int i = 0; i < rows_; ++i) {
        blk.add(i, i, i, 1.0);
        blk.add(i, nb + i, nb + i, 1.0);
    }
    int t = 0;
    for (int i = 0; i < rows_; ++i)
        for (int j = i + 1; j < rows_; ++j, ++t) {
            blk.add(off_pre_ + 2 * t, i, j, 1.0);
            blk.add(off_pre_ + 2 * t, nb + i, nb + j, 1.0);
            blk.add(off_pre_ + 2 * t + 1, i, nb + j, -1.0);
            blk.add(off_pre_ + 2 * t + 1, j, nb + i, 1.0);
        }
    for (int i = 0; i < cols_; ++i) {
        blk.add(off_q_ + i, rows_ + i, rows_ + i, 1.0);
        blk.add(off_q_ + i, nb + rows_ + i, nb + rows_ + i, 1.0);
    }
    t = 0;
    for (int i = 0; i < cols_; ++i)
        for (int j = i + 1; j < cols_; ++j, ++t) {
            blk.add(off_qre_ + 2 * t, rows_ + i, rows_ + j, 1.0);
            blk.add(off_qre_ + 2 * t, nb + rows_ + i, nb + rows_ + j, 1.0);
            blk.add(off_qre_ + 2 * t + 1, rows_ + i, nb + rows_ + j, -1.0);
            blk.add(off_qre_ + 2 * t + 1, rows_ + j, nb + rows_ + i, 1.0);
        }
    // Y(p, q) = x_R(p + q - N): each sample index threads every cell of its
    // anti-diagonal, which is what keeps Y Hankel without equality rows.
    for (int k = 0; k < ns_; ++k) {
        const int plo = std::max(0, k - cols_ + 1);
        const int phi = std::min(rows_ - 1, k);
        for (int p = plo; p <= phi; ++p) {
            const int q = k - p;
            blk.add(x_re_index(k), p, rows_ + q, 1.0);
            blk.add(x_re_index(k), nb + p, nb + rows_ + q, 1.0);
            blk.add(x_im_index(k), p, nb + rows_ + q, -1.0);
            blk.add(x_im_index(k), rows_ + q, nb + p, 1.0);
        }
    }

    Eigen::MatrixXd Gs = Eigen::MatrixXd::Zero(3, 2);
    Gs(1, 0) = -1.0;
    Gs(2, 1) = -1.0;
    for (const auto& mp : constraints.match) {
        const int k = mp.n + samples.N;
        conelp::SocBlock S;
        S.G = Gs;
        S.h = Eigen::Vector3d(constraints.eps, -mp.target.real(),
                              -mp.target.imag());
        S.cols = {x_re_index(k), x_im_index(k)};
        socs_.push_back(std::move(S));
    }
    for (const auto& [n, rho] : constraints.bound) {
        const int k = n + samples.N;
        conelp::SocBlock S;
        S.G = Gs;
        S.h = Eigen::Vector3d(rho, 0.0, 0.0);
        S.cols = {x_re_index(k), x_im_index(k)};
        socs_.push_back(std::move(S));
    }
}

VectorXd ConicSubproblem::cost_vector() const {
    VectorXd c = VectorXd::Zero(m_);
    for (int i = 0; i < rows_; ++i) c[i] = WP_(i, i).real();
    int t = 0;
    for (int i = 0; i < rows_; ++i)
        for (int j = i + 1; j < rows_; ++j, ++t) {
            c[off_pre_ + 2 * t] = 2.0 * WP_(i, j).real();
            c[off_pre_ + 2 * t + 1] = 2.0 * WP_(i, j).imag();
        }
    for (int i = 0; i < cols_; ++i) c[off_q_ + i] = WQ_(i, i).real();
    t = 0;
    for (int i = 0; i < cols_; ++i)
        for (int j = i + 1; j < cols_; ++j, ++t) {
            c[off_qre_ + 2 * t] = 2.0 * WQ_(i, j).real();
            c[off_qre_ + 2 * t + 1] = 2.0 * WQ_(i, j).imag();
        }
    return c;
}

namespace {
MatrixXcd decode_hermitian(const VectorXd& sol, int off_d, int off_p, int n) {
    MatrixXcd H = MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) H(i, i) = sol[off_d + i];
    int t = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++t) {
            H(i, j) = {sol[off_p + 2 * t], sol[off_p + 2 * t + 1]};
            H(j, i) = std::conj(H(i, j));
        }
    return H;
}
}  // namespace

MatrixXcd ConicSubproblem::extract_P(const VectorXd& sol) const {
    return decode_hermitian(sol, 0, off_pre_, rows_);
}

MatrixXcd ConicSubproblem::extract_Q(const VectorXd& sol) const {
    return decode_hermitian(sol, off_q_, off_qre_, cols_);
}

VectorXcd ConicSubproblem::extract_x(const VectorXd& sol) const {
    VectorXcd x(ns_);
    for (int k = 0; k < ns_; ++k)
        x[k] = {sol[x_re_index(k)], sol[x_im_index(k)]};
    return x;
}

SubproblemSolution ConicIpmSolver::solve(const ConicSubproblem& sub) {
    std::vector<conelp::PsdBlock> psds{sub.psd_block()};
    conelp::ConeLP lp(sub.num_vars(), sub.soc_blocks(), std::move(psds),
                      settings_);
    const VectorXd c = sub.cost_vector();
    conelp::Result r = lp.solve(c);
    SubproblemSolution out;
    out.status = r.status;
    out.iterations = r.iterations;
    out.pres = r.pres;
    out.dres = r.dres;
    if (r.x.size() == sub.num_vars()) {
        out.P = sub.extract_P(r.x);
        out.Q = sub.extract_Q(r.x);
        out.x_R = sub.extract_x(r.x);
        out.objective = c.dot(r.x);
    }
    return out;
}

LogDetState init_state(const sampling::SampleSet& samples,
                       const hankel::HankelSpec& spec, double rank_tau) {
    if (spec.N != samples.N)
        throw std::invalid_argument("Hankel spec does not match sample set");
    LogDetState st;
    st.P = MatrixXcd::Identity(spec.rows(), spec.rows());
    st.Q = MatrixXcd::Identity(spec.cols(), spec.cols());
    st.x_R = samples.x;
    st.k = 0;
    const auto info =
        hankel::numerical_rank(hankel::hankelize(samples.x, spec.L), rank_tau);
    st.rank_trace.push_back(info.rank);
    return st;
}

LogDetState run_logdet(const sampling::SampleSet& samples,
                       const hankel::HankelSpec& spec,
                       const sampling::ConstraintSpec& constraints,
                       const RunOptions& opts, SolverInterface& solver) {
    if (opts.iterations < 1)
        throw std::domain_error("need at least one iteration");
    const Eigen::MatrixXcd Y0 = hankel::hankelize(samples.x, spec.L);
    const auto init_info = hankel::numerical_rank(Y0, opts.rank_tau);
    const double sigma1 = init_info.singular_values[0];
    const double delta = opts.delta_rel * sigma1;
    if (!(delta > 0.0))
        throw std::domain_error("delta_rel must be positive");
    const double solver_tol =
        opts.solver_tol > 0.0 ? opts.solver_tol : 1e-6 * constraints.peak;

    LogDetState st = init_state(samples, spec, opts.rank_tau);
    int unchanged = 0;
    for (int k = 0; k < opts.iterations; ++k) {
        SubproblemSolution sol;
        double delta_try = delta;
        for (int attempt = 0;; ++attempt) {
            ConicSubproblem sub(st, constraints, samples, spec, delta_try);
            sol = solver.solve(sub);
            if (sol.status != conelp::Status::numerical_failure || attempt > 0)
                break;
            delta_try = 10.0 * delta;  // one rescue with a blunter weight
        }
        const std::string tag =
            " at iteration " + std::to_string(k) +
            " (pres=" + std::to_string(sol.pres) +
            ", dres=" + std::to_string(sol.dres) + ")";
        if (sol.status == conelp::Status::infeasible)
            throw synth::infeasible_error(
                "subproblem infeasible" + tag +
                "; match tolerance or sidelobe mask is too tight");
        if (sol.status != conelp::Status::optimal &&
            sol.status != conelp::Status::near_optimal)
            throw synth::solver_error("conic solve failed (" +
                                       conelp::to_string(sol.status) + ")" +
                                       tag);

        // Feasibility invariant on the returned completion.
        for (const auto& mp : constraints.match) {
            const double slack =
                std::abs(sol.x_R[mp.n + samples.N] - mp.target);
            if (slack > constraints.eps + solver_tol)
                throw synth::solver_error(
                    "match constraint violated by " + std::to_string(slack) +
                    tag);
        }
        for (const auto& [n, rho] : constraints.bound) {
            const double mag = std::abs(sol.x_R[n + samples.N]);
            if (mag > rho + solver_tol)
                throw synth::solver_error(
                    "sidelobe bound violated (" + std::to_string(mag) + " > " +
                    std::to_string(rho) + ")" + tag);
        }
        // PSD residual of the assembled block at the solution.
        {
            const int rows = spec.rows(), cols = spec.cols();
            const Eigen::MatrixXcd Y = hankel::hankelize(sol.x_R, spec.L);
            MatrixXcd blkmat(rows + cols, rows + cols);
            blkmat.topLeftCorner(rows, rows) = sol.P;
            blkmat.topRightCorner(rows, cols) = Y;
            blkmat.bottomLeftCorner(cols, rows) = Y.adjoint();
            blkmat.bottomRightCorner(cols, cols) = sol.Q;
            Eigen::SelfAdjointEigenSolver<MatrixXcd> es(
                blkmat, Eigen::EigenvaluesOnly);
            if (es.eigenvalues()(0) < -1e-6 * sigma1)
                throw synth::solver_error(
                    "LMI block left the PSD cone (min eig " +
                    std::to_string(es.eigenvalues()(0)) + ")" + tag);
        }

        st.P = sol.P;
        st.Q = sol.Q;
        st.x_R = sol.x_R;
        st.k = k + 1;
        const auto info = hankel::numerical_rank(
            hankel::hankelize(st.x_R, spec.L), opts.rank_tau);
        st.rank_trace.push_back(info.rank);
        st.surrogate_trace.push_back(logdet_shifted(st.P, delta) +
                                     logdet_shifted(st.Q, delta));
        if (opts.verbose)
            std::printf("iteration %d: %s in %d steps, rank %d, objective "
                        "%.5f, surrogate %.6f\n",
                        k, conelp::to_string(sol.status).c_str(),
                        sol.iterations, info.rank, sol.objective,
                        st.surrogate_trace.back());

        const int n_tr = static_cast<int>(st.rank_trace.size());
        unchanged = (n_tr >= 2 && st.rank_trace[n_tr - 1] ==
                                      st.rank_trace[n_tr - 2])
                        ? unchanged + 1
                        : 0;
        if (opts.early_stop && unchanged >= 3) break;
    }
    return st;
}

}  // namespace synth::completion
