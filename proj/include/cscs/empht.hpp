#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "cscs/errors.hpp"
#include "cscs/phase_type.hpp"
#include "cscs/rng.hpp"

namespace cscs {

struct EmphtOptions {
    int max_iters = 500;
    double ll_tol = 1e-7;          // absolute log-likelihood growth below which we stop
    std::uint64_t init_seed = 0x0e4d5eedULL;  // randomized feasible start, fixed by default
};

struct EmphtResult {
    PhaseTypeDist dist;
    std::vector<double> log_likelihood;  // one entry per completed iteration
    int iterations = 0;
    bool converged = false;              // growth fell below ll_tol before max_iters
    bool degenerate_samples = false;     // all sample values identical
    bool few_samples = false;            // fewer than 10*m samples
};

namespace detail {

// Feasible randomized start: total rates near m/mean with jitter, strictly
// positive off-diagonals and exit rates so EM never pins structural zeros.
inline PhaseTypeDist empht_init(int m, double sample_mean, std::uint64_t seed) {
    Rng rng(seed);
    PhaseTypeDist d;
    d.m = m;
    d.alpha.resize(m);
    d.rate_matrix.resize(m, m);
    for (int i = 0; i < m; ++i) d.alpha[i] = 1.0 + 0.2 * rng.u01();
    d.alpha /= d.alpha.sum();
    const double base = static_cast<double>(m) / sample_mean;
    for (int i = 0; i < m; ++i) {
        const double total = base * rng.uniform(0.6, 1.4);
        std::vector<double> w(static_cast<std::size_t>(m));  // off-diagonal + exit weights
        double wsum = 0.0;
        for (int j = 0; j < m; ++j) {
            w[j] = 0.1 + rng.u01();
            wsum += w[j];
        }
        double off = 0.0;
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            d.rate_matrix(i, j) = total * (0.5 * w[j] / wsum);
            off += d.rate_matrix(i, j);
        }
        d.rate_matrix(i, i) = -total;
        // implied exit rate = total - off > 0 by construction
        (void)off;
    }
    return d;
}

} // namespace detail

/// EM fit of a general m-phase phase-type distribution to positive durations.
/// The E-step conditional expectations come from the block matrix exponential
/// exp([[R, t*alpha],[0, R]] * y), whose off-diagonal block carries the
/// convolution integrals; the log-likelihood trace is non-decreasing.
inline EmphtResult empht_fit(const DurationSamples& samples, int m,
                             const EmphtOptions& opts = {}) {
    samples.validate();
    if (m < 1) throw ValidationError("empht_fit: m must be >= 1");
    if (static_cast<int>(samples.count()) < m)
        throw ValidationError("empht_fit: need at least m samples");
    if (opts.max_iters < 1) throw ValidationError("empht_fit: max_iters must be >= 1");

    const std::size_t n = samples.count();
    const double mean =
        std::accumulate(samples.values.begin(), samples.values.end(), 0.0) / double(n);

    EmphtResult res;
    res.few_samples = static_cast<int>(n) < 10 * m;
    res.degenerate_samples =
        std::all_of(samples.values.begin(), samples.values.end(),
                    [&](double v) { return v == samples.values.front(); });

    PhaseTypeDist d = detail::empht_init(m, mean, opts.init_seed);

    Eigen::MatrixXd block(2 * m, 2 * m);
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        const Eigen::VectorXd exit = d.exit_rates();

        Eigen::VectorXd b_sum = Eigen::VectorXd::Zero(m);     // expected starts
        Eigen::VectorXd z_sum = Eigen::VectorXd::Zero(m);     // expected occupation times
        Eigen::MatrixXd n_sum = Eigen::MatrixXd::Zero(m, m);  // expected transient jumps
        Eigen::VectorXd e_sum = Eigen::VectorXd::Zero(m);     // expected exits to absorption
        double ll = 0.0;

        block.setZero();
        block.topLeftCorner(m, m) = d.rate_matrix;
        block.bottomRightCorner(m, m) = d.rate_matrix;
        block.topRightCorner(m, m) = exit * d.alpha.transpose();

        for (double y : samples.values) {
            const Eigen::MatrixXd e = (block * y).exp();
            const auto expRy = e.topLeftCorner(m, m);
            const auto conv = e.topRightCorner(m, m);  // int_0^y exp(R(y-s)) t a exp(Rs) ds

            const Eigen::VectorXd bvec = expRy * exit;          // exp(Ry) t
            const Eigen::RowVectorXd avec = d.alpha.transpose() * expRy;  // a exp(Ry)
            double f = d.alpha.dot(bvec);
            if (!(f > 0.0)) f = std::numeric_limits<double>::min();
            ll += std::log(f);

            b_sum += d.alpha.cwiseProduct(bvec) / f;
            z_sum += conv.diagonal() / f;
            e_sum += avec.transpose().cwiseProduct(exit) / f;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    if (j != i) n_sum(i, j) += d.rate_matrix(i, j) * conv(j, i) / f;
        }

        res.log_likelihood.push_back(ll);
        res.iterations = iter + 1;
        if (ll - prev_ll < opts.ll_tol && iter > 0) {
            res.converged = true;
            break;
        }
        prev_ll = ll;

        // M-step
        d.alpha = b_sum / double(n);
        d.alpha = d.alpha.cwiseMax(0.0);
        d.alpha /= d.alpha.sum();
        for (int i = 0; i < m; ++i) {
            const double z = std::max(z_sum[i], 1e-300);
            double off = 0.0;
            for (int j = 0; j < m; ++j) {
                if (j == i) continue;
                d.rate_matrix(i, j) = n_sum(i, j) / z;
                off += d.rate_matrix(i, j);
            }
            const double texit = e_sum[i] / z;
            d.rate_matrix(i, i) = -(off + std::max(texit, 1e-300));
        }
    }

    res.dist = d;
    return res;
}

inline EmphtResult empht_fit(const DurationSamples& samples, int m, int max_iters,
                             double ll_tol) {
    EmphtOptions opts;
    opts.max_iters = max_iters;
    opts.ll_tol = ll_tol;
    return empht_fit(samples, m, opts);
}

} // namespace cscs
