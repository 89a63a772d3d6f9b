#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "cscs/errors.hpp"
#include "cscs/mimo.hpp"

namespace cscs {

/// Hermitian-valued affine map S(x) = constant + sum_p x_{terms[p].first} * terms[p].second.
/// Objective blocks contribute weight * logdet S to the maximized objective;
/// constraint blocks contribute their log-det barrier and must stay positive definite.
struct AffineBlock {
    MatrixC constant;
    std::vector<std::pair<int, MatrixC>> terms;
    double weight = 1.0;
    bool objective = false;
};

struct BarrierOptions {
    double rel_gap = 1e-7;   // stop once (barrier dims)/t <= rel_gap * max(1,|f|)
    double t0 = 1.0;
    double mu = 8.0;
    int max_path_steps = 60;
    int max_newton_per_step = 80;
};

struct BarrierResult {
    Eigen::VectorXd x;
    double objective = 0.0;  // sum of weight * logdet F over objective blocks (natural log)
    bool converged = false;
    int newton_iterations = 0;
};

/// Path-following Newton maximizer for concave log-det objectives over LMI
/// feasible sets. The caller provides a strictly feasible start; iterates stay
/// strictly feasible throughout.
class BarrierSolver {
public:
    BarrierSolver(int n_vars, std::vector<AffineBlock> blocks)
        : n_(n_vars), blocks_(std::move(blocks)) {
        for (const auto& b : blocks_)
            if (!b.objective) barrier_dims_ += static_cast<double>(b.constant.rows());
    }

    BarrierResult maximize(Eigen::VectorXd x0, const BarrierOptions& opts = {}) const {
        BarrierResult res;
        res.x = std::move(x0);
        if (!strictly_feasible(res.x))
            throw InfeasibleError("barrier solver: start point is not strictly feasible");

        double t = opts.t0;
        for (int step = 0; step < opts.max_path_steps; ++step) {
            center(res, t, opts);
            res.objective = objective_value(res.x);
            if (barrier_dims_ / t <= opts.rel_gap * std::max(1.0, std::abs(res.objective))) {
                res.converged = true;
                break;
            }
            t *= opts.mu;
        }
        return res;
    }

    double objective_value(const Eigen::VectorXd& x) const {
        double f = 0.0;
        for (const auto& b : blocks_) {
            if (!b.objective) continue;
            Eigen::LLT<MatrixC> llt(evaluate(b, x));
            if (llt.info() != Eigen::Success)
                throw InfeasibleError("barrier solver: objective block left the cone");
            f += b.weight * 2.0 * llt.matrixL().toDenseMatrix().diagonal().real().array().log().sum();
        }
        return f;
    }

    bool strictly_feasible(const Eigen::VectorXd& x) const {
        for (const auto& b : blocks_) {
            Eigen::LLT<MatrixC> llt(evaluate(b, x));
            if (llt.info() != Eigen::Success) return false;
        }
        return true;
    }

private:
    MatrixC evaluate(const AffineBlock& b, const Eigen::VectorXd& x) const {
        MatrixC s = b.constant;
        for (const auto& [idx, a] : b.terms) s += x[idx] * a;
        return s;
    }

    double phi(const Eigen::VectorXd& x, double t) const {
        double val = 0.0;
        for (const auto& b : blocks_) {
            Eigen::LLT<MatrixC> llt(evaluate(b, x));
            if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
            const double ld =
                2.0 * llt.matrixL().toDenseMatrix().diagonal().real().array().log().sum();
            val += (b.objective ? t * b.weight : 1.0) * ld;
        }
        return val;
    }

    void center(BarrierResult& res, double t, const BarrierOptions& opts) const {
        Eigen::VectorXd grad(n_);
        Eigen::MatrixXd hess(n_, n_);
        for (int it = 0; it < opts.max_newton_per_step; ++it) {
            grad.setZero();
            hess.setZero();
            for (const auto& b : blocks_) {
                const MatrixC s = evaluate(b, res.x);
                Eigen::LLT<MatrixC> llt(s);
                if (llt.info() != Eigen::Success)
                    throw InfeasibleError("barrier solver: iterate left the cone");
                const MatrixC sinv = llt.solve(MatrixC::Identity(s.rows(), s.cols()));
                const double coef = b.objective ? t * b.weight : 1.0;
                std::vector<MatrixC> sa;
                sa.reserve(b.terms.size());
                for (const auto& [idx, a] : b.terms) {
                    sa.push_back(sinv * a);
                    grad[idx] += coef * sa.back().trace().real();
                }
                for (std::size_t p = 0; p < b.terms.size(); ++p)
                    for (std::size_t q = p; q < b.terms.size(); ++q) {
                        const double h = coef * (sa[p] * sa[q]).trace().real();
                        const int ip = b.terms[p].first, iq = b.terms[q].first;
                        hess(ip, iq) -= h;
                        if (ip != iq) hess(iq, ip) -= h;
                    }
            }

            Eigen::MatrixXd neg = -hess;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(neg);
            Eigen::VectorXd d;
            if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
                d = ldlt.solve(grad);
            } else {
                neg += 1e-10 * neg.diagonal().cwiseAbs().maxCoeff() *
                       Eigen::MatrixXd::Identity(n_, n_);
                d = neg.ldlt().solve(grad);
            }
            const double decrement = grad.dot(d);
            ++res.newton_iterations;
            if (decrement <= 1e-3) return;  // quadratic zone; f-error ~ decrement/(2t)

            const double phi0 = phi(res.x, t);
            double theta = 1.0;
            while (theta > 1e-14) {
                const Eigen::VectorXd cand = res.x + theta * d;
                const double val = phi(cand, t);
                if (std::isfinite(val) && val >= phi0 + 0.25 * theta * decrement) {
                    res.x = cand;
                    break;
                }
                theta *= 0.5;
            }
            if (theta <= 1e-14) return;  // no ascent step found; stay centered enough
        }
    }

    int n_;
    std::vector<AffineBlock> blocks_;
    double barrier_dims_ = 0.0;
};

} // namespace cscs
