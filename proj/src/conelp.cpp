#include "synth/conelp.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace synth::conelp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// W u for W = eta (2 v v' - J), J = diag(1, -I).
VectorXd soc_w(const VectorXd& v, double eta, const VectorXd& u) {
    VectorXd ju(u.size());
    ju[0] = u[0];
    ju.tail(u.size() - 1) = -u.tail(u.size() - 1);
    return eta * (2.0 * v * v.dot(u) - ju);
}

/// W^{-1} u; the inverse flips the sign of the tail of v and of eta's role.
VectorXd soc_winv(const VectorXd& v, double eta, const VectorXd& u) {
    VectorXd wb(v.size());
    wb[0] = v[0];
    wb.tail(v.size() - 1) = -v.tail(v.size() - 1);
    VectorXd ju(u.size());
    ju[0] = u[0];
    ju.tail(u.size() - 1) = -u.tail(u.size() - 1);
    return (2.0 * wb * wb.dot(u) - ju) / eta;
}

/// max alpha such that lmbda + alpha d stays in the SOC (lmbda interior).
double soc_max_step(const VectorXd& l, const VectorXd& d) {
    const auto l1 = l.tail(l.size() - 1);
    const auto d1 = d.tail(d.size() - 1);
    const double a2 = d[0] * d[0] - d1.squaredNorm();
    const double a1 = 2.0 * (l[0] * d[0] - l1.dot(d1));
    const double a0 = l[0] * l[0] - l1.squaredNorm();
    double best = kInf;
    double roots[2];
    int nroots = 0;
    if (std::abs(a2) < 1e-300) {
        if (a1 != 0.0) roots[nroots++] = -a0 / a1;
    } else {
        const double disc = a1 * a1 - 4.0 * a2 * a0;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            roots[nroots++] = (-a1 - sq) / (2.0 * a2);
            roots[nroots++] = (-a1 + sq) / (2.0 * a2);
        }
    }
    for (int i = 0; i < nroots; ++i) {
        const double r = roots[i];
        if (r > 1e-300 && l[0] + r * d[0] >= -1e-14 * std::max(1.0, l[0]))
            best = std::min(best, r);
    }
    if (d[0] < 0.0) best = std::min(best, -l[0] / d[0]);
    return best;
}

}  // namespace

std::string to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::near_optimal: return "near_optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
        case Status::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

ConeLP::ConeLP(int nvars, std::vector<SocBlock> socs, std::vector<PsdBlock> psds,
               Settings settings)
    : m_(nvars), socs_(std::move(socs)), psds_(std::move(psds)), set_(settings) {
    if (m_ <= 0) throw std::invalid_argument("cone program needs variables");
    int off = 0;
    for (const auto& S : socs_) {
        if (S.dim() < 1 || S.h.size() != S.dim())
            throw std::invalid_argument("bad SOC block shape");
        const int want = S.cols.empty() ? m_ : static_cast<int>(S.cols.size());
        if (S.G.cols() != want)
            throw std::invalid_argument("SOC block column count mismatch");
        soc_off_.push_back(off);
        off += S.dim();
    }
    for (const auto& P : psds_) {
        if (P.dim < 1 || static_cast<int>(P.cells.size()) != m_)
            throw std::invalid_argument("bad PSD block");
        psd_off_.push_back(off);
        off += P.dim * P.dim;
    }
    N_ = off;
    if (N_ == 0) throw std::invalid_argument("empty cone");
    nu_ = 1.0 + 2.0 * static_cast<double>(socs_.size());
    for (const auto& P : psds_) nu_ += P.dim;

    h_ = VectorXd::Zero(N_);
    for (std::size_t b = 0; b < socs_.size(); ++b)
        h_.segment(soc_off_[b], socs_[b].dim()) = socs_[b].h;
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const int d = psds_[b].dim;
        h_.segment(psd_off_[b], d * d) =
            Eigen::Map<const VectorXd>(psds_[b].F0.data(), d * d);
    }

    flat_.resize(psds_.size());
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const auto& P = psds_[b];
        auto& fc = flat_[b];
        for (int i = 0; i < m_; ++i) {
            if (!P.cells[i].empty()) fc.active.push_back(i);
            for (const auto& cell : P.cells[i]) {
                fc.owner.push_back(i);
                fc.rc.push_back(cell.r * P.dim + cell.c);
                fc.val.push_back(cell.v);
                if (cell.r != cell.c) {
                    fc.owner.push_back(i);
                    fc.rc.push_back(cell.c * P.dim + cell.r);
                    fc.val.push_back(cell.v);
                }
            }
        }
    }
}

VectorXd ConeLP::gmul(const VectorXd& x) const {
    VectorXd out = VectorXd::Zero(N_);
    for (std::size_t b = 0; b < socs_.size(); ++b) {
        const auto& S = socs_[b];
        if (S.cols.empty()) {
            out.segment(soc_off_[b], S.dim()) = S.G * x;
        } else {
            VectorXd xs(S.cols.size());
            for (std::size_t i = 0; i < S.cols.size(); ++i) xs[i] = x[S.cols[i]];
            out.segment(soc_off_[b], S.dim()) = S.G * xs;
        }
    }
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const auto& fc = flat_[b];
        double* op = out.data() + psd_off_[b];
        for (std::size_t e = 0; e < fc.owner.size(); ++e)
            op[fc.rc[e]] -= x[fc.owner[e]] * fc.val[e];
    }
    return out;
}

VectorXd ConeLP::gtmul(const VectorXd& z) const {
    VectorXd out = VectorXd::Zero(m_);
    for (std::size_t b = 0; b < socs_.size(); ++b) {
        const auto& S = socs_[b];
        const VectorXd gz = S.G.transpose() * z.segment(soc_off_[b], S.dim());
        if (S.cols.empty()) {
            out += gz;
        } else {
            for (std::size_t i = 0; i < S.cols.size(); ++i)
                out[S.cols[i]] += gz[i];
        }
    }
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const auto& fc = flat_[b];
        const double* zp = z.data() + psd_off_[b];
        for (std::size_t e = 0; e < fc.owner.size(); ++e)
            out[fc.owner[e]] -= fc.val[e] * zp[fc.rc[e]];
    }
    return out;
}

bool ConeLP::compute_scaling(const VectorXd& s, const VectorXd& z,
                             Scaling& W) const {
    W.soc.clear();
    W.psd.clear();
    W.lmbda = VectorXd::Zero(N_);
    for (std::size_t b = 0; b < socs_.size(); ++b) {
        const int k = socs_[b].dim();
        const VectorXd sb = s.segment(soc_off_[b], k);
        const VectorXd zb = z.segment(soc_off_[b], k);
        const double sq_s = sb[0] * sb[0] - sb.tail(k - 1).squaredNorm();
        const double sq_z = zb[0] * zb[0] - zb.tail(k - 1).squaredNorm();
        if (!(sq_s > 0.0) || !(sq_z > 0.0)) return false;
        const double snorm = std::sqrt(sq_s), znorm = std::sqrt(sq_z);
        const VectorXd sbar = sb / snorm, zbar = zb / znorm;
        const double gamma = std::sqrt((1.0 + sbar.dot(zbar)) / 2.0);
        if (!(gamma > 0.0) || !std::isfinite(gamma)) return false;
        VectorXd jz(k);
        jz[0] = zbar[0];
        jz.tail(k - 1) = -zbar.tail(k - 1);
        VectorXd wbar = (sbar + jz) / (2.0 * gamma);
        // The scaling matrix needs the Jordan square root of the scaling
        // point: v = wbar^{1/2}, W = eta (2 v v' - J), W'W = eta^2 P(wbar).
        VectorXd v = wbar;
        v[0] += 1.0;
        v /= std::sqrt(2.0 * (1.0 + wbar[0]));
        const double eta = std::sqrt(snorm / znorm);
        if (!v.allFinite() || !std::isfinite(eta)) return false;
        W.soc.push_back({v, eta});
        W.lmbda.segment(soc_off_[b], k) = soc_w(v, eta, zb);
    }
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const int d = psds_[b].dim;
        Eigen::Map<const MatrixXd> Sm(s.data() + psd_off_[b], d, d);
        Eigen::Map<const MatrixXd> Zm(z.data() + psd_off_[b], d, d);
        const MatrixXd Ss = (Sm + Sm.transpose()) / 2.0;
        const MatrixXd Zs = (Zm + Zm.transpose()) / 2.0;
        Eigen::LLT<MatrixXd> llt_s(Ss), llt_z(Zs);
        if (llt_s.info() != Eigen::Success || llt_z.info() != Eigen::Success)
            return false;
        const MatrixXd Ls = llt_s.matrixL();
        const MatrixXd Lz = llt_z.matrixL();
        Eigen::BDCSVD<MatrixXd> svd(Lz.transpose() * Ls,
                                    Eigen::ComputeFullU | Eigen::ComputeFullV);
        const VectorXd sig = svd.singularValues();
        if (!(sig.minCoeff() > 0.0) || !sig.allFinite()) return false;
        const VectorXd isq = sig.cwiseSqrt().cwiseInverse();
        PsdScale ps;
        ps.R = Ls * svd.matrixV() * isq.asDiagonal();
        ps.Rinv = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
        ps.Minv = ps.Rinv.transpose() * ps.Rinv;
        ps.sig = sig;
        Eigen::Map<MatrixXd> lam(W.lmbda.data() + psd_off_[b], d, d);
        lam.setZero();
        lam.diagonal() = sig;
        W.psd.push_back(std::move(ps));
    }
    return true;
}

ConeLP::Scaling ConeLP::identity_scaling() const {
    Scaling W;
    for (const auto& S : socs_) {
        VectorXd v = VectorXd::Zero(S.dim());
        v[0] = 1.0;
        W.soc.push_back({v, 1.0});
    }
    for (const auto& P : psds_) {
        PsdScale ps;
        ps.R = MatrixXd::Identity(P.dim, P.dim);
        ps.Rinv = ps.R;
        ps.Minv = ps.R;
        ps.sig = VectorXd::Ones(P.dim);
        W.psd.push_back(std::move(ps));
    }
    return W;
}

void ConeLP::scale_dirs(const Scaling& W, const VectorXd& ds, const VectorXd& dz,
                        VectorXd& o1, VectorXd& o2) const {
    o1 = VectorXd::Zero(N_);
    o2 = VectorXd::Zero(N_);
    for (std::size_t b = 0; b < socs_.size(); ++b) {
        const int k = socs_[b].dim();
        const auto& sc = W.soc[b];
        o1.segment(soc_off_[b], k) =
            soc_winv(sc.v, sc.eta, ds.segment(soc_off_[b], k));
        o2.segment(soc_off_[b], k) =
            soc_w(sc.v, sc.eta, dz.segment(soc_off_[b], k));
    }
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const int d = psds_[b].dim;
        const auto& ps = W.psd[b];
        Eigen::Map<const MatrixXd> Dm(ds.data() + psd_off_[b], d, d);
        Eigen::Map<const MatrixXd> Zm(dz.data() + psd_off_[b], d, d);
        Eigen::Map<MatrixXd>(o1.data() + psd_off_[b], d, d) =
            ps.Rinv * Dm * ps.Rinv.transpose();
        Eigen::Map<MatrixXd>(o2.data() + psd_off_[b], d, d) =
            ps.R.transpose() * Zm * ps.R;
    }
}

VectorXd ConeLP::unscale_s(const Scaling& W, const VectorXd& v) const {
    VectorXd out = VectorXd::Zero(N_);
    for (std::size_t b = 0; b < socs_.size(); ++b) {
        const int k = socs_[b].dim();
        const auto& sc = W.soc[b];
        out.segment(soc_off_[b], k) =
            soc_w(sc.v, sc.eta, v.segment(soc_off_[b], k));  // W symmetric
    }
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const int d = psds_[b].dim;
        const auto& ps = W.psd[b];
        Eigen::Map<const MatrixXd> Vm(v.data() + psd_off_[b], d, d);
        Eigen::Map<MatrixXd>(out.data() + psd_off_[b], d, d) =
            ps.R * Vm * ps.R.transpose();
    }
    return out;
}

VectorXd ConeLP::winv2(const Scaling& W, const VectorXd& v) const {
    VectorXd out = VectorXd::Zero(N_);
    for (std::size_t b = 0; b < socs_.size(); ++b) {
        const int k = socs_[b].dim();
        const auto& sc = W.soc[b];
        out.segment(soc_off_[b], k) = soc_winv(
            sc.v, sc.eta, soc_winv(sc.v, sc.eta, v.segment(soc_off_[b], k)));
    }
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const int d = psds_[b].dim;
        const auto& ps = W.psd[b];
        Eigen::Map<const MatrixXd> Vm(v.data() + psd_off_[b], d, d);
        Eigen::Map<MatrixXd>(out.data() + psd_off_[b], d, d) =
            ps.Minv * Vm * ps.Minv;
    }
    return out;
}

bool ConeLP::factor_kkt(const Scaling& W) {
    hfact_.setZero(m_, m_);
    for (std::size_t b = 0; b < socs_.size(); ++b) {
        const auto& S = socs_[b];
        const auto& sc = W.soc[b];
        const int k = S.dim();
        MatrixXd B(k, k);
        for (int i = 0; i < k; ++i) {
            VectorXd e = VectorXd::Zero(k);
            e[i] = 1.0;
            B.col(i) = soc_winv(sc.v, sc.eta, soc_winv(sc.v, sc.eta, e));
        }
        const MatrixXd gtbg = S.G.transpose() * B * S.G;
        if (S.cols.empty()) {
            hfact_ += gtbg;
        } else {
            for (std::size_t a = 0; a < S.cols.size(); ++a)
                for (std::size_t c = 0; c < S.cols.size(); ++c)
                    hfact_(S.cols[a], S.cols[c]) += gtbg(a, c);
        }
    }
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const auto& P = psds_[b];
        const auto& fc = flat_[b];
        const MatrixXd& Minv = W.psd[b].Minv;
        const int d = P.dim;
        MatrixXd U, Vs, T(d, d), Tw(d, d);
        for (int j : fc.active) {
            const auto& cl = P.cells[j];
            const int w = static_cast<int>(cl.size());
            U.resize(d, w);
            Vs.resize(d, w);
            for (int t = 0; t < w; ++t) {
                const auto& cell = cl[t];
                const double vt = cell.r == cell.c ? cell.v / 2.0 : cell.v;
                U.col(t) = Minv.col(cell.r);
                Vs.col(t) = Minv.col(cell.c) * vt;
            }
            T.noalias() = U * Vs.transpose();
            Tw = T + T.transpose();
            const double* tp = Tw.data();
            double* hcol = hfact_.data() +
                           static_cast<std::ptrdiff_t>(j) * m_;
            for (std::size_t e = 0; e < fc.owner.size(); ++e)
                hcol[fc.owner[e]] += fc.val[e] * tp[fc.rc[e]];
        }
    }
    const double reg = 1e-13 * std::max(1.0, hfact_.trace() / m_);
    hfact_.diagonal().array() += reg;
    const lapack_int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', m_,
                                           hfact_.data(), m_);
    return info == 0;
}

void ConeLP::solve_kkt(const Scaling& W, const VectorXd& bx, const VectorXd& bz,
                       VectorXd& dx, VectorXd& dz) const {
    auto cholsolve = [&](VectorXd rhs) {
        LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', m_, 1,
                       hfact_.data(), m_, rhs.data(), m_);
        return rhs;
    };
    auto basic = [&](const VectorXd& bx_, const VectorXd& bz_,
                     VectorXd& dx_, VectorXd& dz_) {
        const VectorXd wb = winv2(W, bz_);
        dx_ = cholsolve(bx_ + gtmul(wb));
        dz_ = winv2(W, gmul(dx_) - bz_);
    };
    basic(bx, bz, dx, dz);
    // one pass of iterative refinement on the block system
    VectorXd t1, wdz;
    scale_dirs(W, VectorXd::Zero(N_), dz, t1, wdz);
    const VectorXd rx = bx - gtmul(dz);
    const VectorXd rz = bz - (gmul(dx) - unscale_s(W, wdz));
    VectorXd ex, ez;
    basic(rx, rz, ex, ez);
    dx += ex;
    dz += ez;
}

VectorXd ConeLP::identity_element() const {
    VectorXd e = VectorXd::Zero(N_);
    for (std::size_t b = 0; b < socs_.size(); ++b) e[soc_off_[b]] = 1.0;
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const int d = psds_[b].dim;
        Eigen::Map<MatrixXd>(e.data() + psd_off_[b], d, d).setIdentity();
    }
    return e;
}

VectorXd ConeLP::push_into_cone(const VectorXd& v) const {
    double alpha = -kInf;
    for (std::size_t b = 0; b < socs_.size(); ++b) {
        const int k = socs_[b].dim();
        const auto vb = v.segment(soc_off_[b], k);
        alpha = std::max(alpha, vb.tail(k - 1).norm() - vb[0]);
    }
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const int d = psds_[b].dim;
        Eigen::Map<const MatrixXd> Vm(v.data() + psd_off_[b], d, d);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(
            (Vm + Vm.transpose()) / 2.0, Eigen::EigenvaluesOnly);
        alpha = std::max(alpha, -es.eigenvalues()(0));
    }
    if (alpha < 0.0) return v;
    return v + (1.0 + alpha) * identity_element();
}

double ConeLP::max_step(const VectorXd& lmbda, const Scaling& W,
                        const VectorXd& ds, const VectorXd& dz, double tau,
                        double dtau, double kappa, double dkappa) const {
    double a = kInf;
    VectorXd sd, zd;
    scale_dirs(W, ds, dz, sd, zd);
    for (std::size_t b = 0; b < socs_.size(); ++b) {
        const int k = socs_[b].dim();
        const VectorXd lb = lmbda.segment(soc_off_[b], k);
        a = std::min(a, soc_max_step(lb, sd.segment(soc_off_[b], k)));
        a = std::min(a, soc_max_step(lb, zd.segment(soc_off_[b], k)));
    }
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const int d = psds_[b].dim;
        const VectorXd lv =
            Eigen::Map<const MatrixXd>(lmbda.data() + psd_off_[b], d, d)
                .diagonal()
                .cwiseSqrt();
        const Eigen::ArrayXXd denom =
            (lv * lv.transpose()).array();
        for (const VectorXd* dir : {&sd, &zd}) {
            Eigen::Map<const MatrixXd> Dm(dir->data() + psd_off_[b], d, d);
            const MatrixXd T =
                (((Dm + Dm.transpose()) / 2.0).array() / denom).matrix();
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(T,
                                                       Eigen::EigenvaluesOnly);
            const double emin = es.eigenvalues()(0);
            if (emin < 0.0) a = std::min(a, -1.0 / emin);
        }
    }
    if (dtau < 0.0) a = std::min(a, -tau / dtau);
    if (dkappa < 0.0) a = std::min(a, -kappa / dkappa);
    return a;
}

VectorXd ConeLP::lambda_compose(const VectorXd& u, const VectorXd& v) const {
    VectorXd w = VectorXd::Zero(N_);
    for (std::size_t b = 0; b < socs_.size(); ++b) {
        const int k = socs_[b].dim();
        const auto ub = u.segment(soc_off_[b], k);
        const auto vb = v.segment(soc_off_[b], k);
        w[soc_off_[b]] = ub.dot(vb);
        w.segment(soc_off_[b] + 1, k - 1) =
            ub[0] * vb.tail(k - 1) + vb[0] * ub.tail(k - 1);
    }
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const int d = psds_[b].dim;
        Eigen::Map<const MatrixXd> U(u.data() + psd_off_[b], d, d);
        Eigen::Map<const MatrixXd> V(v.data() + psd_off_[b], d, d);
        Eigen::Map<MatrixXd>(w.data() + psd_off_[b], d, d) =
            (U * V + V * U) / 2.0;
    }
    return w;
}

VectorXd ConeLP::lambda_solve(const VectorXd& lmbda, const VectorXd& v) const {
    VectorXd u = VectorXd::Zero(N_);
    for (std::size_t b = 0; b < socs_.size(); ++b) {
        const int k = socs_[b].dim();
        const VectorXd lb = lmbda.segment(soc_off_[b], k);
        const auto vb = v.segment(soc_off_[b], k);
        const double a = lb[0] * lb[0] - lb.tail(k - 1).squaredNorm();
        const double u0 = (lb[0] * vb[0] - lb.tail(k - 1).dot(vb.tail(k - 1))) / a;
        u[soc_off_[b]] = u0;
        u.segment(soc_off_[b] + 1, k - 1) =
            (vb.tail(k - 1) - u0 * lb.tail(k - 1)) / lb[0];
    }
    for (std::size_t b = 0; b < psds_.size(); ++b) {
        const int d = psds_[b].dim;
        const VectorXd lv =
            Eigen::Map<const MatrixXd>(lmbda.data() + psd_off_[b], d, d)
                .diagonal();
        Eigen::Map<const MatrixXd> V(v.data() + psd_off_[b], d, d);
        Eigen::Map<MatrixXd> out(u.data() + psd_off_[b], d, d);
        for (int c = 0; c < d; ++c)
            for (int r = 0; r < d; ++r)
                out(r, c) = 2.0 * V(r, c) / (lv[r] + lv[c]);
    }
    return u;
}

Result ConeLP::solve(const VectorXd& c) {
    if (c.size() != m_)
        throw std::invalid_argument("cost vector length mismatch");
    Result res;
    const VectorXd e = identity_element();

    Scaling Wid = identity_scaling();
    if (!factor_kkt(Wid)) return res;  // numerical_failure
    VectorXd x, z0, xd, zd;
    solve_kkt(Wid, VectorXd::Zero(m_), h_, x, z0);
    VectorXd s = push_into_cone(-z0);
    solve_kkt(Wid, -c, VectorXd::Zero(N_), xd, zd);
    VectorXd z = push_into_cone(zd);
    double tau = 1.0, kappa = 1.0;
    const double resx0 = std::max(1.0, c.norm());
    const double resz0 = std::max(1.0, h_.norm());

    Status status = Status::numerical_failure;
    double pres = kInf, dres = kInf, gap = kInf, relgap = kInf, pcost = kInf;
    struct Best {
        VectorXd x, s, z;
        double tau, kappa, pres, dres, gap, relgap, pcost;
    };
    Best best;
    bool have_best = false;
    double best_merit = kInf;
    int it = 0;

    Scaling W;
    for (; it < set_.maxiter; ++it) {
        const VectorXd rx = gtmul(z) + c * tau;
        const VectorXd rz = s + gmul(x) - h_ * tau;
        const double rt = kappa + c.dot(x) + h_.dot(z);
        gap = s.dot(z);
        const double mu = (gap + tau * kappa) / nu_;

        pcost = c.dot(x) / tau;
        const double dcost = -h_.dot(z) / tau;
        pres = rz.norm() / tau / resz0;
        dres = rx.norm() / tau / resx0;
        if (pcost < 0.0)
            relgap = gap / tau / tau / (-pcost);
        else if (dcost > 0.0)
            relgap = gap / tau / tau / dcost;
        else
            relgap = kInf;
        if (set_.verbose)
            std::printf("  it %2d: pcost=% .6e gap=%.2e pres=%.2e dres=%.2e "
                        "mu=%.2e tau=%.2e\n",
                        it, pcost, gap / tau / tau, pres, dres, mu, tau);
        const double merit = std::max({pres, dres, std::min(gap / tau / tau,
                                                            relgap)});
        if (merit < best_merit) {
            best_merit = merit;
            best = {x, s, z, tau, kappa, pres, dres, gap, relgap, pcost};
            have_best = true;
        }
        if (pres <= set_.feastol && dres <= set_.feastol &&
            (gap / tau / tau <= set_.abstol || relgap <= set_.reltol)) {
            status = Status::optimal;
            break;
        }
        if (merit > 1e3 * best_merit && best_merit < 1e-4)
            break;  // diverging past the accuracy floor; keep best iterate
        const double hz = h_.dot(z);
        const double cx = c.dot(x);
        if (hz < 0.0 && gtmul(z).norm() / (-hz) / resx0 <= set_.feastol) {
            status = Status::infeasible;
            break;
        }
        if (cx < 0.0 && (gmul(x) + s).norm() / (-cx) / resz0 <= set_.feastol) {
            status = Status::unbounded;
            break;
        }

        if (!compute_scaling(s, z, W)) break;
        if (!factor_kkt(W)) break;
        VectorXd dx2, dz2;
        solve_kkt(W, -c, h_, dx2, dz2);

        const VectorXd& lmbda = W.lmbda;
        auto direction = [&](double sigma, const VectorXd* comp_corr,
                             double tk_corr, VectorXd& dx, VectorXd& ds,
                             VectorXd& dz, double& dtau, double& dkappa) {
            VectorXd rhs_compl = -lambda_compose(lmbda, lmbda);
            if (comp_corr) rhs_compl -= *comp_corr;
            rhs_compl += sigma * mu * e;
            const VectorXd ds_scaled = lambda_solve(lmbda, rhs_compl);
            const double dtk = -tau * kappa + sigma * mu - tk_corr;
            const double fac = 1.0 - sigma;
            const VectorXd bx = -fac * rx;
            const VectorXd bz = -fac * rz - unscale_s(W, ds_scaled);
            VectorXd dx1, dz1;
            solve_kkt(W, bx, bz, dx1, dz1);
            const double num = -fac * rt - c.dot(dx1) - h_.dot(dz1) - dtk / tau;
            const double den = c.dot(dx2) + h_.dot(dz2) - kappa / tau;
            dtau = num / den;
            dx = dx1 + dtau * dx2;
            dz = dz1 + dtau * dz2;
            VectorXd t1, wdz;
            scale_dirs(W, VectorXd::Zero(N_), dz, t1, wdz);
            ds = unscale_s(W, ds_scaled) - unscale_s(W, wdz);
            dkappa = (dtk - kappa * dtau) / tau;
        };

        VectorXd dxa, dsa, dza;
        double dta, dka;
        direction(0.0, nullptr, 0.0, dxa, dsa, dza, dta, dka);
        double alpha = max_step(lmbda, W, dsa, dza, tau, dta, kappa, dka);
        alpha = std::min(1.0, alpha);
        const double sigma = std::pow(std::min(1.0, 1.0 - alpha), 3);

        VectorXd sda, zda;
        scale_dirs(W, dsa, dza, sda, zda);
        const VectorXd corr = lambda_compose(sda, zda);
        VectorXd dx, ds, dz;
        direction(sigma, &corr, dta * dka, dx, ds, dz, dta, dka);
        alpha = max_step(lmbda, W, ds, dz, tau, dta, kappa, dka);
        alpha = std::min(1.0, 0.99 * alpha);
        if (!std::isfinite(alpha)) break;
        x += alpha * dx;
        s += alpha * ds;
        z += alpha * dz;
        tau += alpha * dta;
        kappa += alpha * dka;
    }
    if (status == Status::numerical_failure && have_best) {
        x = best.x;
        s = best.s;
        z = best.z;
        tau = best.tau;
        kappa = best.kappa;
        pres = best.pres;
        dres = best.dres;
        gap = best.gap;
        relgap = best.relgap;
        pcost = best.pcost;
        const double relaxed = 1e4;
        if (pres <= relaxed * set_.feastol && dres <= relaxed * set_.feastol &&
            (gap / tau / tau <= relaxed * set_.abstol ||
             relgap <= relaxed * set_.reltol))
            status = Status::near_optimal;
    }
    res.status = status;
    res.x = x / tau;
    res.s = s / tau;
    res.z = z / tau;
    res.iterations = std::min(it + 1, set_.maxiter);
    res.pres = pres;
    res.dres = dres;
    res.pcost = pcost;
    return res;
}

}  // namespace synth::conelp
