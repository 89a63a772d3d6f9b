#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "cscs/errors.hpp"
#include "cscs/rng.hpp"

namespace cscs {

using Cplx = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;

/// Complex flat-fading channel between one transmitter and one UE on one subcarrier.
struct ChannelMatrix {
    MatrixC h;  // n_r x n_t gains
    int tx_id = 0;
    int user_id = 0;
    int subcarrier_id = 0;

    Eigen::Index rows() const { return h.rows(); }
    Eigen::Index cols() const { return h.cols(); }

    void validate() const {
        if (h.rows() < 1 || h.cols() < 1) throw ValidationError("channel: empty matrix");
        if (!h.allFinite()) throw ValidationError("channel: non-finite entries");
    }
};

enum class PerturbMode {
    Gaussian,  // entries of dH i.i.d. CN(0, eps_sq): the simulation convention
    Boundary,  // dH scaled so Tr(dH dH^H) = eps_sq exactly: worst-case checking
};

/// Estimated channel plus its uncertainty radius; carries the true channel when simulated.
struct UncertainChannel {
    ChannelMatrix estimate;
    double radius_sq = 0.0;
    bool has_true = false;
    ChannelMatrix true_channel;

    MatrixC error() const { return true_channel.h - estimate.h; }
};

inline MatrixC sample_complex_gaussian(Eigen::Index n_r, Eigen::Index n_t, Rng& rng,
                                       double entry_var = 1.0) {
    MatrixC h(n_r, n_t);
    const double s = std::sqrt(entry_var / 2.0);
    for (Eigen::Index i = 0; i < n_r; ++i)
        for (Eigen::Index j = 0; j < n_t; ++j)
            h(i, j) = Cplx(s * rng.normal(), s * rng.normal());
    return h;
}

/// i.i.d. CN(0,1) channel draw, deterministic under the seed.
inline ChannelMatrix sample_channel(int n_r, int n_t, std::uint64_t rng_seed) {
    if (n_r < 1 || n_t < 1) throw ValidationError("sample_channel: dimensions must be >= 1");
    Rng rng(rng_seed);
    return ChannelMatrix{sample_complex_gaussian(n_r, n_t, rng), 0, 0, 0};
}

namespace detail {

inline MatrixC draw_error(Eigen::Index n_r, Eigen::Index n_t, double eps_sq,
                          PerturbMode mode, Rng& rng) {
    if (eps_sq == 0.0) return MatrixC::Zero(n_r, n_t);
    if (mode == PerturbMode::Gaussian) return sample_complex_gaussian(n_r, n_t, rng, eps_sq);
    MatrixC d = sample_complex_gaussian(n_r, n_t, rng, 1.0);
    const double nrm = d.norm();
    return d * (std::sqrt(eps_sq) / (nrm > 0.0 ? nrm : 1.0));
}

} // namespace detail

/// Attaches an error dH to an estimate: true = estimate + dH.
inline UncertainChannel perturb_channel(const ChannelMatrix& est, double eps_sq,
                                        PerturbMode mode, std::uint64_t rng_seed) {
    est.validate();
    if (eps_sq < 0.0) throw DomainError("perturb_channel: eps_sq must be >= 0");
    Rng rng(rng_seed);
    UncertainChannel uc;
    uc.estimate = est;
    uc.radius_sq = eps_sq;
    uc.has_true = true;
    uc.true_channel = est;
    uc.true_channel.h = est.h + detail::draw_error(est.rows(), est.cols(), eps_sq, mode, rng);
    return uc;
}

/// Same error law, applied the other way around: the true channel is given and the
/// estimate is truth minus a sampled error, so truth keeps the CN(0,1) law exactly.
inline UncertainChannel uncertain_from_true(const ChannelMatrix& truth, double eps_sq,
                                            PerturbMode mode, Rng& rng) {
    truth.validate();
    if (eps_sq < 0.0) throw DomainError("uncertain_from_true: eps_sq must be >= 0");
    UncertainChannel uc;
    uc.radius_sq = eps_sq;
    uc.has_true = true;
    uc.true_channel = truth;
    uc.estimate = truth;
    uc.estimate.h = truth.h - detail::draw_error(truth.rows(), truth.cols(), eps_sq, mode, rng);
    return uc;
}

/// Row-stack of every channel except channels[exclude_index], order preserved.
inline MatrixC stack_interfering(const std::vector<ChannelMatrix>& channels,
                                 std::size_t exclude_index) {
    if (channels.empty()) throw ValidationError("stack_interfering: empty channel list");
    const Eigen::Index n_t = channels.front().cols();
    Eigen::Index rows = 0;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        if (i == exclude_index) continue;
        if (channels[i].cols() != n_t)
            throw ValidationError("stack_interfering: transmit-antenna mismatch");
        rows += channels[i].rows();
    }
    if (rows == 0) throw ValidationError("stack_interfering: nothing left after exclusion");
    MatrixC out(rows, n_t);
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        if (i == exclude_index) continue;
        out.middleRows(r, channels[i].rows()) = channels[i].h;
        r += channels[i].rows();
    }
    return out;
}

/// Two-stage BD construction: W = V0 * V1 with V0 the null-space basis of the
/// stacked victims and (U, Lambda, V1) the SVD of the equivalent channel H_own*V0.
struct BdPrecoder {
    MatrixC w;        // n_t x n_r, orthonormal columns
    MatrixC decoder;  // U^H, n_r x n_r
    Eigen::VectorXd sigma;  // descending singular values of the equivalent channel
};

namespace detail {

// make the largest-magnitude entry of each column real-positive
inline void fix_column_phases(MatrixC& v, MatrixC* paired = nullptr) {
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
        Eigen::Index idx = 0;
        v.col(k).cwiseAbs().maxCoeff(&idx);
        const Cplx p = v(idx, k);
        const double mag = std::abs(p);
        if (mag < 1e-300) continue;
        const Cplx phase = p / mag;
        v.col(k) /= phase;
        if (paired && k < paired->cols()) paired->col(k) /= phase;
    }
}

} // namespace detail

inline BdPrecoder bd_precoder(const MatrixC& h_tilde, const ChannelMatrix& h_own) {
    h_own.validate();
    const Eigen::Index n_t = h_own.cols();
    const Eigen::Index n_r = h_own.rows();
    if (h_tilde.cols() != n_t)
        throw ValidationError("bd_precoder: stacked victims and own channel disagree on n_t");

    Eigen::JacobiSVD<MatrixC> svd1(h_tilde, Eigen::ComputeFullV);
    const auto& sv1 = svd1.singularValues();
    const double smax = sv1.size() > 0 ? sv1(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv1.size(); ++i)
        if (sv1(i) >= 1e-10 * smax && sv1(i) > 0.0) ++rank;
    const Eigen::Index null_dim = n_t - rank;
    if (null_dim < n_r)
        throw InfeasibleError(
            "bd_precoder: null space dimension " + std::to_string(null_dim) +
            " < n_r = " + std::to_string(n_r) +
            "; full-rank BD needs n_t >= " + std::to_string(rank + n_r));

    MatrixC v0 = svd1.matrixV().rightCols(null_dim);
    detail::fix_column_phases(v0);

    const MatrixC h_eq = h_own.h * v0;
    Eigen::JacobiSVD<MatrixC> svd2(h_eq, Eigen::ComputeFullU | Eigen::ComputeFullV);
    MatrixC v1 = svd2.matrixV().leftCols(n_r);
    MatrixC u = svd2.matrixU();
    detail::fix_column_phases(v1, &u);

    BdPrecoder out;
    out.w = v0 * v1;
    out.decoder = u.adjoint();
    out.sigma = svd2.singularValues().head(n_r);
    return out;
}

/// log2 det(I + (snr/n_st_star) * Lambda Q Lambda^H) in bits/s/Hz.
inline double capacity_term(const Eigen::VectorXd& sigma, const MatrixC& q, double snr,
                            long n_st_star) {
    if (q.rows() != q.cols() || q.rows() != sigma.size())
        throw ValidationError("capacity_term: Q and sigma dimensions disagree");
    const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
    if ((q - q.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw ValidationError("capacity_term: Q is not Hermitian");
    Eigen::SelfAdjointEigenSolver<MatrixC> eig(0.5 * (q + q.adjoint()),
                                               Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-9 * scale)
        throw ValidationError("capacity_term: Q is not positive semidefinite");
    if (n_st_star < 1) throw ValidationError("capacity_term: n_st_star must be >= 1");

    const MatrixC lam = sigma.cast<Cplx>().asDiagonal();
    const MatrixC a = MatrixC::Identity(sigma.size(), sigma.size()) +
                      (snr / static_cast<double>(n_st_star)) * lam * q * lam.adjoint();
    Eigen::SelfAdjointEigenSolver<MatrixC> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    double bits = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        bits += std::log2(std::max(es.eigenvalues()(i), 1e-300));
    return bits > 0.0 ? bits : 0.0;
}

} // namespace cscs
