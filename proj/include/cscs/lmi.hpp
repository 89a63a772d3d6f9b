#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>

#include "cscs/errors.hpp"
#include "cscs/mimo.hpp"

namespace cscs {

/// Tr(H Qbr H^H) in Watts; tiny negative round-off is clamped to zero.
inline double interference(const ChannelMatrix& victim, const MatrixC& q_breve) {
    victim.validate();
    if (q_breve.rows() != q_breve.cols() || q_breve.rows() != victim.cols())
        throw ValidationError("interference: Qbr must be n_t x n_t");
    const double scale = std::max(1.0, q_breve.cwiseAbs().maxCoeff());
    if ((q_breve - q_breve.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw ValidationError("interference: Qbr is not Hermitian");
    const double val = (victim.h * q_breve * victim.h.adjoint()).trace().real();
    if (val < -1e-10 * scale) return 0.0;
    return val > 0.0 ? val : 0.0;
}

/// vec(X): columns of X stacked into one vector.
inline VectorC vec(const MatrixC& x) {
    return Eigen::Map<const VectorC>(x.data(), x.size());
}

/// S-Procedure block for one robust interference constraint:
///   [[alpha I + G, J^H], [J, k - alpha eps^2]]
/// with G = -I_{N_R} (x) Qbr, J = -vec(Qbr Hhat^H)^H as the bottom row and
/// k = zeta - Tr(Hhat Qbr Hhat^H). Positive semidefiniteness of this block is
/// equivalent to the interference staying below zeta over the whole
/// uncertainty ball of radius eps.
inline MatrixC assemble_lmi(const MatrixC& q_breve, const ChannelMatrix& victim_est,
                            double eps_sq, double zeta, double alpha) {
    victim_est.validate();
    if (alpha < 0.0) throw DomainError("assemble_lmi: alpha must be >= 0");
    const Eigen::Index n_t = victim_est.cols();
    const Eigen::Index n_r = victim_est.rows();
    if (q_breve.rows() != n_t || q_breve.cols() != n_t)
        throw ValidationError("assemble_lmi: Qbr must be n_t x n_t");

    const Eigen::Index n = n_t * n_r;
    MatrixC block(n + 1, n + 1);
    block.topLeftCorner(n, n) =
        alpha * MatrixC::Identity(n, n) -
        Eigen::kroneckerProduct(MatrixC::Identity(n_r, n_r), q_breve);
    const VectorC j = -vec(q_breve * victim_est.h.adjoint());
    block.topRightCorner(n, 1) = j.conjugate();  // J^H as a column
    block.bottomLeftCorner(1, n) = j.transpose();
    block(n, n) = zeta - (victim_est.h * q_breve * victim_est.h.adjoint()).trace().real() -
                  alpha * eps_sq;
    return 0.5 * (block + block.adjoint());
}

/// sup over Tr(dH dH^H) <= eps_sq of Tr((Hhat+dH) Qbr (Hhat+dH)^H): the exact
/// worst-case interference over the uncertainty ball. Solved by the secular
/// equation of the trust-region maximizer of a convex quadratic.
inline double worst_case_interference(const ChannelMatrix& victim_est, const MatrixC& q_breve,
                                      double eps_sq) {
    const double nominal = interference(victim_est, q_breve);
    if (eps_sq <= 0.0) return nominal;

    const Eigen::Index n_r = victim_est.rows();
    // maximize x^H M x + 2 Re(b^H x) + c over ||x|| <= eps, M = I (x) Qbr >= 0.
    // Work in the eigenbasis of Qbr: the Kronecker lift just repeats eigenvalues.
    Eigen::SelfAdjointEigenSolver<MatrixC> eig(0.5 * (q_breve + q_breve.adjoint()));
    const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
    const MatrixC bmat = q_breve * victim_est.h.adjoint();  // n_t x n_r; b = vec(bmat)
    // coordinates of b per (eigenvector k, receive antenna r)
    const MatrixC beta = eig.eigenvectors().adjoint() * bmat;
    const double c = nominal;
    const double eps = std::sqrt(eps_sq);

    const double lmax = lam.maxCoeff();
    const double bnorm = beta.norm();
    if (bnorm < 1e-14 * std::max(1.0, lmax)) return c + eps_sq * lmax;

    auto phi = [&](double nu) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < lam.size(); ++k)
            for (Eigen::Index r = 0; r < n_r; ++r) {
                const double d = nu - lam(k);
                s += std::norm(beta(k, r)) / (d * d);
            }
        return s;
    };

    double lo = lmax, hi = lmax + bnorm / eps;
    const double phi_edge = phi(lmax + 1e-12 * std::max(1.0, lmax) + 1e-300);
    if (phi_edge <= eps_sq) {
        // hard case: b has no weight on the top eigenspace; park the leftover
        // budget there
        const double nu = lmax;
        double val = c, used = 0.0;
        for (Eigen::Index k = 0; k < lam.size(); ++k)
            for (Eigen::Index r = 0; r < n_r; ++r) {
                const double d = nu - lam(k);
                if (d < 1e-12 * std::max(1.0, lmax)) continue;
                const double xk = std::abs(beta(k, r)) / d;
                used += xk * xk;
                val += lam(k) * xk * xk + 2.0 * std::abs(beta(k, r)) * xk;
            }
        val += lmax * std::max(0.0, eps_sq - used);
        return val;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (phi(mid) > eps_sq) lo = mid;
        else hi = mid;
    }
    const double nu = 0.5 * (lo + hi);
    double val = c;
    for (Eigen::Index k = 0; k < lam.size(); ++k)
        for (Eigen::Index r = 0; r < n_r; ++r) {
            const double d = nu - lam(k);
            const double xk = std::abs(beta(k, r)) / d;
            val += lam(k) * xk * xk + 2.0 * std::abs(beta(k, r)) * xk;
        }
    return val;
}

} // namespace cscs
