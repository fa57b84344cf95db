#pragma once
#include <Eigen/Dense>
#include <string>
#include <vector>

namespace synth::conelp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Cone program  min c'x  s.t.  G x + s = h,  s in K,
/// K a product of small second-order cones and dense PSD blocks.
/// Homogeneous self-dual embedding with Nesterov-Todd scaling and a
/// Mehrotra predictor-corrector, Schur complement solved densely.

/// dim-k second-order-cone slice: s = h - G x. When `cols` is non-empty,
/// G has cols.size() columns and acts on x[cols] only.
struct SocBlock {
    MatrixXd G;
    VectorXd h;
    std::vector<int> cols;

    int dim() const { return static_cast<int>(G.rows()); }
};

struct PsdCell {
    int r, c;   // upper triangle after normalization
    double v;
};

/// s_mat = F0 + sum_i x_i F_i must be PSD; F_i sparse symmetric, given by
/// per-variable upper-triangle cells.
struct PsdBlock {
    int dim = 0;
    std::vector<std::vector<PsdCell>> cells;  // indexed by variable
    MatrixXd F0;

    PsdBlock(int dim_, int nvars)
        : dim(dim_), cells(nvars), F0(MatrixXd::Zero(dim_, dim_)) {}

    void add(int var, int r, int c, double v) {
        if (r > c) std::swap(r, c);
        cells[var].push_back({r, c, v});
    }
};

enum class Status {
    optimal,
    near_optimal,       // breakdown exit, best iterate within 1e4x tolerances
    infeasible,
    unbounded,
    numerical_failure,
};

std::string to_string(Status s);

struct Settings {
    double feastol = 1e-7;
    double abstol = 1e-7;
    double reltol = 1e-6;
    int maxiter = 100;
    bool verbose = false;
};

struct Result {
    Status status = Status::numerical_failure;
    VectorXd x;       // primal variables
    VectorXd s, z;    // cone slack / dual, full storage for PSD blocks
    int iterations = 0;
    double pres = 0.0, dres = 0.0;
    double pcost = 0.0;
};

class ConeLP {
public:
    ConeLP(int nvars, std::vector<SocBlock> socs, std::vector<PsdBlock> psds,
           Settings settings = {});

    /// The cost vector is per-solve so a reweighting loop can reuse the
    /// assembled cone structure.
    Result solve(const VectorXd& c);

    int num_vars() const { return m_; }
    int cone_dim() const { return N_; }

private:
    struct SocScale {
        VectorXd v;   // Jordan square root of the scaling point
        double eta;
    };
    struct PsdScale {
        MatrixXd R, Rinv, Minv;  // W(Z) = R' Z R; Minv = Rinv' Rinv
        VectorXd sig;
    };
    struct Scaling {
        std::vector<SocScale> soc;
        std::vector<PsdScale> psd;
        VectorXd lmbda;
    };

    VectorXd gmul(const VectorXd& x) const;
    VectorXd gtmul(const VectorXd& z) const;
    bool compute_scaling(const VectorXd& s, const VectorXd& z, Scaling& W) const;
    Scaling identity_scaling() const;
    void scale_dirs(const Scaling& W, const VectorXd& ds, const VectorXd& dz,
                    VectorXd& o1, VectorXd& o2) const;
    VectorXd unscale_s(const Scaling& W, const VectorXd& v) const;
    VectorXd winv2(const Scaling& W, const VectorXd& v) const;
    bool factor_kkt(const Scaling& W);
    void solve_kkt(const Scaling& W, const VectorXd& bx, const VectorXd& bz,
                   VectorXd& dx, VectorXd& dz) const;
    VectorXd identity_element() const;
    VectorXd push_into_cone(const VectorXd& v) const;
    double max_step(const VectorXd& lmbda, const Scaling& W, const VectorXd& ds,
                    const VectorXd& dz, double tau, double dtau, double kappa,
                    double dkappa) const;
    VectorXd lambda_compose(const VectorXd& u, const VectorXd& v) const;
    VectorXd lambda_solve(const VectorXd& lmbda, const VectorXd& v) const;

    int m_ = 0;
    std::vector<SocBlock> socs_;
    std::vector<PsdBlock> psds_;
    Settings set_;
    std::vector<int> soc_off_, psd_off_;
    int N_ = 0;
    double nu_ = 0.0;
    VectorXd h_;
    // flattened full-storage PSD cells per block: owner variable, r*dim+c, v
    struct FlatCells {
        std::vector<int> owner, rc;
        std::vector<double> val;
        std::vector<int> active;
    };
    std::vector<FlatCells> flat_;
    MatrixXd hfact_;  // Schur complement, then its Cholesky factor (lower)
};

}  // namespace synth::conelp
