#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>
#include <vector>

#include "cscs/errors.hpp"
#include "cscs/rng.hpp"

namespace cscs {

/// Absorption-time law of a CTMC with m transient states: initial probabilities
/// alpha (all starting mass on transient states) and transient-rate matrix R,
/// a sub-generator whose exit rates are t = -R*1.
struct PhaseTypeDist {
    Eigen::VectorXd alpha;        // length m, nonnegative, sums to 1
    Eigen::MatrixXd rate_matrix;  // m x m sub-generator, 1/minute
    int m = 0;

    Eigen::VectorXd exit_rates() const { return -rate_matrix.rowwise().sum(); }

    void validate(double tol = 1e-9) const {
        if (m < 1) throw ValidationError("phase-type: m must be >= 1");
        if (alpha.size() != m || rate_matrix.rows() != m || rate_matrix.cols() != m)
            throw ValidationError("phase-type: alpha/rate_matrix shape mismatch with m");
        if (alpha.minCoeff() < -tol)
            throw ValidationError("phase-type: alpha has negative entries");
        if (std::abs(alpha.sum() - 1.0) > tol)
            throw ValidationError("phase-type: alpha does not sum to 1");
        for (int i = 0; i < m; ++i) {
            if (!(rate_matrix(i, i) < 0.0))
                throw ValidationError("phase-type: diagonal of R must be negative");
            double row = 0.0;
            for (int j = 0; j < m; ++j) {
                if (j != i && rate_matrix(i, j) < -tol)
                    throw ValidationError("phase-type: off-diagonal of R must be nonnegative");
                row += rate_matrix(i, j);
            }
            if (row > tol)
                throw ValidationError("phase-type: R row sums must be <= 0");
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(rate_matrix);
        if (!lu.isInvertible())
            throw ValidationError("phase-type: R is singular (some state never absorbs)");
    }
};

/// Empirical sojourn durations in minutes.
struct DurationSamples {
    std::vector<double> values;

    std::size_t count() const { return values.size(); }

    void validate() const {
        if (values.empty()) throw ValidationError("duration samples: need at least one value");
        for (double v : values)
            if (!(v > 0.0) || !std::isfinite(v))
                throw ValidationError("duration samples: all values must be positive and finite");
    }
};

/// F_X(x) = 1 - alpha * exp(R x) * 1.
inline double ph_cdf(const PhaseTypeDist& dist, double x) {
    dist.validate();
    if (x < 0.0) throw DomainError("ph_cdf: negative duration");
    if (x == 0.0) return 0.0;
    const Eigen::MatrixXd e = (dist.rate_matrix * x).exp();
    double f = 1.0 - dist.alpha.dot(e.rowwise().sum());
    if (f < 0.0) f = 0.0;
    if (f > 1.0) f = 1.0;
    return f;
}

/// Survival 1 - F_X(x); exact complement of ph_cdf.
inline double ph_survival(const PhaseTypeDist& dist, double x) {
    dist.validate();
    if (x < 0.0) throw DomainError("ph_survival: negative duration");
    if (x == 0.0) return 1.0;
    const Eigen::MatrixXd e = (dist.rate_matrix * x).exp();
    double s = dist.alpha.dot(e.rowwise().sum());
    if (s < 0.0) s = 0.0;
    if (s > 1.0) s = 1.0;
    return s;
}

/// Density f_X(x) = alpha * exp(R x) * t.
inline double ph_pdf(const PhaseTypeDist& dist, double x) {
    dist.validate();
    if (x < 0.0) throw DomainError("ph_pdf: negative duration");
    const Eigen::MatrixXd e = (dist.rate_matrix * x).exp();
    const double f = dist.alpha.dot(e * dist.exit_rates());
    return f > 0.0 ? f : 0.0;
}

/// Mean absorption time -alpha * R^{-1} * 1.
inline double ph_mean(const PhaseTypeDist& dist) {
    dist.validate();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dist.m);
    return -dist.alpha.dot(dist.rate_matrix.partialPivLu().solve(ones));
}

/// Second raw moment 2 * alpha * R^{-2} * 1, for variance checks against fits.
inline double ph_second_moment(const PhaseTypeDist& dist) {
    dist.validate();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dist.m);
    const Eigen::VectorXd r1 = dist.rate_matrix.partialPivLu().solve(ones);
    return 2.0 * dist.alpha.dot(dist.rate_matrix.partialPivLu().solve(r1));
}

/// One absorption time of the CTMC, started per alpha.
inline double ph_sample(const PhaseTypeDist& dist, Rng& rng) {
    const Eigen::VectorXd exit = dist.exit_rates();
    int state = rng.discrete(dist.alpha.data(), dist.m);
    double t = 0.0;
    for (;;) {
        const double hold = -dist.rate_matrix(state, state);
        t += rng.exponential(hold);
        // choose exit vs. a transient jump, proportional to the rates out of `state`
        std::vector<double> w(static_cast<std::size_t>(dist.m) + 1);
        for (int j = 0; j < dist.m; ++j) w[j] = j == state ? 0.0 : dist.rate_matrix(state, j);
        w[dist.m] = exit[state];
        const int nxt = rng.discrete(w.data(), dist.m + 1);
        if (nxt == dist.m) return t;
        state = nxt;
    }
}

inline double ph_sample(const PhaseTypeDist& dist, std::uint64_t rng_seed) {
    dist.validate();
    Rng rng(rng_seed);
    return ph_sample(dist, rng);
}

} // namespace cscs
