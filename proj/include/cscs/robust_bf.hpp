#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cscs/barrier.hpp"
#include "cscs/errors.hpp"
#include "cscs/lmi.hpp"
#include "cscs/mimo.hpp"

namespace cscs {

/// One multi-user multi-subcarrier robust beamformer design. Precoders are
/// already fixed; the optimizer only shapes the per-(sojourner, subcarrier)
/// transmit covariances.
struct RobustBfProblem {
    // [subcarrier][sojourner]
    std::vector<std::vector<Eigen::VectorXd>> equiv_sigmas;
    std::vector<std::vector<MatrixC>> precoders;
    // [subcarrier][inhabitant]
    std::vector<std::vector<ChannelMatrix>> victim_estimates;
    double eps_sq = 0.0;
    double zeta = 1.0;    // Watts, per constraint
    double p_sap = 10.0;  // Watts, total downlink power across subcarriers
    double snr = 100.0;   // linear
    long n_st_star = 8;
    int n_c = 1;

    int n_sojourners() const {
        return equiv_sigmas.empty() ? 0 : static_cast<int>(equiv_sigmas.front().size());
    }
    int n_inhabitants() const {
        return victim_estimates.empty() ? 0 : static_cast<int>(victim_estimates.front().size());
    }
    double subcarrier_power() const { return p_sap / static_cast<double>(n_c); }

    void validate() const {
        if (n_c < 1 || static_cast<int>(equiv_sigmas.size()) != n_c ||
            static_cast<int>(precoders.size()) != n_c ||
            static_cast<int>(victim_estimates.size()) != n_c)
            throw ValidationError("robust bf: per-subcarrier containers disagree with n_c");
        if (!(zeta > 0.0) && zeta != 0.0) throw ValidationError("robust bf: zeta must be finite");
        if (eps_sq < 0.0) throw ValidationError("robust bf: eps_sq must be >= 0");
        if (n_st_star < 1) throw ValidationError("robust bf: n_st_star must be >= 1");
        for (int s = 0; s < n_c; ++s) {
            if (equiv_sigmas[s].size() != precoders[s].size())
                throw ValidationError("robust bf: sigmas/precoders mismatch");
            for (std::size_t i = 0; i < precoders[s].size(); ++i) {
                const auto& w = precoders[s][i];
                if (w.cols() != equiv_sigmas[s][i].size())
                    throw ValidationError("robust bf: precoder width != sigma count");
                const MatrixC g = w.adjoint() * w;
                if ((g - MatrixC::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > 1e-8)
                    throw ValidationError("robust bf: precoder columns must be orthonormal");
            }
        }
    }
};

enum class SolveStatus { Optimal, Infeasible, MaxIter };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        default: return "max_iter";
    }
}

struct BeamformerSolution {
    // [subcarrier][sojourner]
    std::vector<std::vector<MatrixC>> q;
    // [subcarrier][sojourner][inhabitant]; empty when eps_sq == 0
    std::vector<std::vector<std::vector<double>>> s_multipliers;
    double objective = 0.0;  // bits/s/Hz summed over sojourners and subcarriers
    SolveStatus status = SolveStatus::Infeasible;

    MatrixC q_breve(const RobustBfProblem& p, int s, int i) const {
        return p.precoders[s][i] * q[s][i] * p.precoders[s][i].adjoint();
    }
};

namespace detail {

// Hermitian basis of n x n matrices: n diagonal units, then (re, im) pairs per
// off-diagonal position, column-major over (k < l).
inline std::vector<MatrixC> hermitian_basis(int n) {
    std::vector<MatrixC> basis;
    basis.reserve(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        MatrixC b = MatrixC::Zero(n, n);
        b(k, k) = 1.0;
        basis.push_back(b);
    }
    for (int l = 0; l < n; ++l)
        for (int k = 0; k < l; ++k) {
            MatrixC re = MatrixC::Zero(n, n);
            re(k, l) = 1.0;
            re(l, k) = 1.0;
            basis.push_back(re);
            MatrixC im = MatrixC::Zero(n, n);
            im(k, l) = Cplx(0.0, 1.0);
            im(l, k) = Cplx(0.0, -1.0);
            basis.push_back(im);
        }
    return basis;
}

inline MatrixC hermitian_from_coords(const std::vector<MatrixC>& basis,
                                     const Eigen::VectorXd& x, int offset) {
    MatrixC q = MatrixC::Zero(basis.front().rows(), basis.front().cols());
    for (std::size_t p = 0; p < basis.size(); ++p) q += x[offset + static_cast<int>(p)] * basis[p];
    return q;
}

} // namespace detail

/// Feasibility certificates of a solved instance, evaluated on the full-size
/// S-Procedure blocks (not the solver's internal reduction).
struct SolutionCertificates {
    double min_q_eigenvalue = 0.0;
    double max_power_residual = 0.0;  // max over s of (sum_i Tr(Qbr) - budget)
    double min_lmi_eigenvalue = 0.0;  // scaled by each block's norm
    double min_multiplier = 0.0;
};

inline SolutionCertificates certify(const RobustBfProblem& p, const BeamformerSolution& sol) {
    SolutionCertificates c;
    c.min_q_eigenvalue = std::numeric_limits<double>::infinity();
    c.min_lmi_eigenvalue = std::numeric_limits<double>::infinity();
    c.min_multiplier = std::numeric_limits<double>::infinity();
    c.max_power_residual = -std::numeric_limits<double>::infinity();
    const int n_soj = p.n_sojourners();
    const int n_inh = p.n_inhabitants();
    for (int s = 0; s < p.n_c; ++s) {
        double power = 0.0;
        for (int i = 0; i < n_soj; ++i) {
            Eigen::SelfAdjointEigenSolver<MatrixC> eq(sol.q[s][i], Eigen::EigenvaluesOnly);
            c.min_q_eigenvalue = std::min(c.min_q_eigenvalue, eq.eigenvalues().minCoeff());
            const MatrixC qbr = sol.q_breve(p, s, i);
            power += qbr.trace().real();
            for (int j = 0; j < n_inh; ++j) {
                if (p.eps_sq > 0.0) {
                    const double alpha = sol.s_multipliers[s][i][j];
                    c.min_multiplier = std::min(c.min_multiplier, alpha);
                    const MatrixC block =
                        assemble_lmi(qbr, p.victim_estimates[s][j], p.eps_sq, p.zeta, alpha);
                    Eigen::SelfAdjointEigenSolver<MatrixC> eb(block, Eigen::EigenvaluesOnly);
                    const double scale = std::max(1.0, block.cwiseAbs().maxCoeff());
                    c.min_lmi_eigenvalue =
                        std::min(c.min_lmi_eigenvalue, eb.eigenvalues().minCoeff() / scale);
                } else {
                    const double slack =
                        p.zeta - interference(p.victim_estimates[s][j], qbr);
                    c.min_lmi_eigenvalue = std::min(c.min_lmi_eigenvalue, slack / std::max(1.0, p.zeta));
                }
            }
        }
        c.max_power_residual = std::max(c.max_power_residual, power - p.subcarrier_power());
    }
    return c;
}

/// Solves P2: maximize the sum log-det capacity subject to Q >= 0, the
/// per-subcarrier power budget, and one robust interference constraint per
/// (inhabitant, sojourner, subcarrier). Interior-point on the exact concave
/// objective; each robust constraint enters through its S-Procedure block
/// compressed onto the precoder column space, which is an exact reduction
/// because the uncertainty ball is unitarily invariant.
inline BeamformerSolution solve_p2(const RobustBfProblem& p, double tol = 1e-6) {
    p.validate();
    const int n_soj = p.n_sojourners();
    const int n_inh = p.n_inhabitants();
    BeamformerSolution sol;
    sol.q.assign(p.n_c, std::vector<MatrixC>());
    sol.s_multipliers.assign(
        p.n_c, std::vector<std::vector<double>>(n_soj, std::vector<double>(n_inh, 0.0)));

    if (n_soj < 1) throw ValidationError("solve_p2: need at least one sojourner");
    if (p.zeta <= 0.0) {
        sol.status = SolveStatus::Infeasible;
        return sol;
    }
    const int n_r = static_cast<int>(p.equiv_sigmas.front().front().size());
    if (p.p_sap <= 0.0) {
        for (int s = 0; s < p.n_c; ++s)
            for (int i = 0; i < n_soj; ++i) sol.q[s].push_back(MatrixC::Zero(n_r, n_r));
        sol.objective = 0.0;
        sol.status = SolveStatus::Optimal;
        return sol;
    }

    const auto basis = detail::hermitian_basis(n_r);
    const int q_dim = static_cast<int>(basis.size());
    const bool robust = p.eps_sq > 0.0;

    // variable layout: Q coords per (s, i), then alpha per (s, i, j)
    const int n_q_vars = p.n_c * n_soj * q_dim;
    const int n_vars = n_q_vars + (robust ? p.n_c * n_soj * n_inh : 0);
    auto q_offset = [&](int s, int i) { return (s * n_soj + i) * q_dim; };
    auto a_offset = [&](int s, int i, int j) {
        return n_q_vars + (s * n_soj + i) * n_inh + j;
    };

    const double c_snr = p.snr / static_cast<double>(p.n_st_star);
    const double budget = p.subcarrier_power();

    std::vector<AffineBlock> blocks;
    // effective victim channels through each precoder, [s][i][j]
    std::vector<std::vector<std::vector<MatrixC>>> geff(
        p.n_c, std::vector<std::vector<MatrixC>>(n_soj));

    for (int s = 0; s < p.n_c; ++s) {
        AffineBlock power;
        power.constant = MatrixC::Constant(1, 1, budget);
        for (int i = 0; i < n_soj; ++i) {
            const auto& w = p.precoders[s][i];
            const Eigen::VectorXd& sig = p.equiv_sigmas[s][i];

            AffineBlock obj;
            obj.objective = true;
            obj.constant = MatrixC::Identity(n_r, n_r);
            AffineBlock qpsd;
            qpsd.constant = MatrixC::Zero(n_r, n_r);
            const MatrixC lam = sig.cast<Cplx>().asDiagonal();
            for (int pidx = 0; pidx < q_dim; ++pidx) {
                obj.terms.emplace_back(q_offset(s, i) + pidx, c_snr * lam * basis[pidx] * lam);
                qpsd.terms.emplace_back(q_offset(s, i) + pidx, basis[pidx]);
                power.terms.emplace_back(
                    q_offset(s, i) + pidx,
                    MatrixC::Constant(1, 1, -(w * basis[pidx] * w.adjoint()).trace().real()));
            }
            blocks.push_back(std::move(obj));
            blocks.push_back(std::move(qpsd));

            for (int j = 0; j < n_inh; ++j) {
                const MatrixC g = p.victim_estimates[s][j].h * w;  // n_r x n_r
                geff[s][i].push_back(g);
                if (!robust) {
                    AffineBlock nominal;
                    nominal.constant = MatrixC::Constant(1, 1, p.zeta);
                    for (int pidx = 0; pidx < q_dim; ++pidx)
                        nominal.terms.emplace_back(
                            q_offset(s, i) + pidx,
                            MatrixC::Constant(1, 1,
                                              -(g * basis[pidx] * g.adjoint()).trace().real()));
                    blocks.push_back(std::move(nominal));
                    continue;
                }
                // reduced S-Procedure block of size n_r^2 + 1
                const int dim = n_r * n_r;
                AffineBlock lmi;
                lmi.constant = MatrixC::Zero(dim + 1, dim + 1);
                lmi.constant(dim, dim) = p.zeta;
                for (int pidx = 0; pidx < q_dim; ++pidx) {
                    MatrixC term = MatrixC::Zero(dim + 1, dim + 1);
                    term.topLeftCorner(dim, dim) =
                        -Eigen::kroneckerProduct(MatrixC::Identity(n_r, n_r), basis[pidx]);
                    const VectorC jv = -vec(basis[pidx] * g.adjoint());
                    term.topRightCorner(dim, 1) = jv.conjugate();
                    term.bottomLeftCorner(1, dim) = jv.transpose();
                    term(dim, dim) = -(g * basis[pidx] * g.adjoint()).trace().real();
                    lmi.terms.emplace_back(q_offset(s, i) + pidx, std::move(term));
                }
                MatrixC aterm = MatrixC::Zero(dim + 1, dim + 1);
                aterm.topLeftCorner(dim, dim) = MatrixC::Identity(dim, dim);
                aterm(dim, dim) = -p.eps_sq;
                lmi.terms.emplace_back(a_offset(s, i, j), std::move(aterm));
                blocks.push_back(std::move(lmi));

                AffineBlock apos;
                apos.constant = MatrixC::Zero(1, 1);
                apos.terms.emplace_back(a_offset(s, i, j), MatrixC::Identity(1, 1));
                blocks.push_back(std::move(apos));
            }
        }
        blocks.push_back(std::move(power));
    }

    // strictly feasible start: Q = beta I, shrinking beta until every block
    // clears, with the matching analytic multiplier alpha = beta (1 + |G|/eps)
    BarrierSolver solver(n_vars, blocks);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n_vars);
    bool feasible = false;
    for (int s = 0; s < p.n_c; ++s) {
        double beta = 0.5 * budget / std::max(1, n_soj * n_r);
        const double eps = std::sqrt(p.eps_sq);
        for (int i = 0; i < n_soj; ++i)
            for (int j = 0; j < n_inh; ++j) {
                const double gn = geff[s][i][j].norm();
                const double cap = 0.5 * p.zeta / ((gn + eps) * (gn + eps) + 1e-300);
                beta = std::min(beta, cap);
            }
        for (int i = 0; i < n_soj; ++i) {
            for (int k = 0; k < n_r; ++k) x0[q_offset(s, i) + k] = beta;
            if (robust)
                for (int j = 0; j < n_inh; ++j) {
                    const double gn = geff[s][i][j].norm();
                    x0[a_offset(s, i, j)] = beta * (1.0 + gn / eps) + 0.05 * beta;
                }
        }
    }
    for (int attempt = 0; attempt < 60; ++attempt) {
        if (solver.strictly_feasible(x0)) {
            feasible = true;
            break;
        }
        x0 *= 0.5;
    }
    if (!feasible) {
        sol.status = SolveStatus::Infeasible;
        return sol;
    }

    BarrierOptions opts;
    opts.rel_gap = 0.1 * tol;
    BarrierResult res = solver.maximize(x0, opts);

    for (int s = 0; s < p.n_c; ++s) {
        sol.q[s].clear();
        for (int i = 0; i < n_soj; ++i) {
            sol.q[s].push_back(detail::hermitian_from_coords(basis, res.x, q_offset(s, i)));
            if (robust)
                for (int j = 0; j < n_inh; ++j)
                    sol.s_multipliers[s][i][j] = res.x[a_offset(s, i, j)];
        }
    }
    sol.objective = res.objective / std::log(2.0);
    sol.status = res.converged ? SolveStatus::Optimal : SolveStatus::MaxIter;
    return sol;
}

/// Hermitian square root P of Q (so P P^H = Q), with eigenvalue clipping of
/// round-off negatives in [-1e-8, 0).
inline MatrixC beamformer_from_Q(const MatrixC& q) {
    if (q.rows() != q.cols()) throw ValidationError("beamformer_from_Q: Q must be square");
    const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
    if ((q - q.adjoint()).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw ValidationError("beamformer_from_Q: Q is not Hermitian");
    Eigen::SelfAdjointEigenSolver<MatrixC> eig(0.5 * (q + q.adjoint()));
    Eigen::VectorXd ev = eig.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < -1e-8 * scale)
            throw ValidationError("beamformer_from_Q: Q is indefinite beyond tolerance");
        if (ev[i] < 0.0) ev[i] = 0.0;
    }
    return eig.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
           eig.eigenvectors().adjoint();
}

} // namespace cscs
