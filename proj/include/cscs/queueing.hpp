#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "cscs/errors.hpp"
#include "cscs/phase_type.hpp"

namespace cscs {

/// Piecewise-constant arrival intensity: rates[k] arrivals per slot over
/// [k*slot_length, (k+1)*slot_length), horizon = slot_length * rates.size().
struct ArrivalProfile {
    double slot_length_min = 0.0;
    std::vector<double> rates;  // arrivals per slot

    double horizon() const { return slot_length_min * static_cast<double>(rates.size()); }

    // intensity in arrivals/minute at time t
    double rate_per_min(double t) const {
        if (t < 0.0 || t > horizon()) return 0.0;
        auto idx = static_cast<std::size_t>(t / slot_length_min);
        if (idx >= rates.size()) idx = rates.size() - 1;
        return rates[idx] / slot_length_min;
    }

    void validate() const {
        if (!(slot_length_min > 0.0)) throw ValidationError("arrival profile: slot length must be > 0");
        if (rates.empty()) throw ValidationError("arrival profile: need at least one slot");
        for (double r : rates)
            if (r < 0.0 || !std::isfinite(r))
                throw ValidationError("arrival profile: rates must be nonnegative and finite");
    }
};

/// M_t/G/infinity input pair: arrivals plus the phase-type sojourn law. N2(0)=0.
struct ConcurrencyModel {
    ArrivalProfile profile;
    PhaseTypeDist service;

    void validate() const {
        profile.validate();
        service.validate();
    }
};

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

} // namespace detail

/// Offered load v(t) = int_0^t lambda(tau) [1 - F_X(t - tau)] d tau, integrated
/// slot by slot so the rate discontinuities land on panel boundaries.
inline double offered_load(const ConcurrencyModel& model, double t, double quad_tol = 1e-8) {
    model.validate();
    const double T = model.profile.horizon();
    if (t < 0.0 || t > T * (1.0 + 1e-12))
        throw DomainError("offered_load: t outside [0, horizon]");
    if (t <= 0.0) return 0.0;

    const double slot = model.profile.slot_length_min;
    const auto f = [&](double tau) {
        return model.profile.rate_per_min(tau) * ph_survival(model.service, t - tau);
    };
    double v = 0.0;
    const auto nslots = model.profile.rates.size();
    for (std::size_t k = 0; k < nslots; ++k) {
        const double a = slot * static_cast<double>(k);
        if (a >= t) break;
        const double b = std::min(slot * static_cast<double>(k + 1), t);
        v += detail::integrate(f, a, b, quad_tol * (b - a) / t);
    }
    return v > 0.0 ? v : 0.0;
}

/// Poisson pmf v^n e^{-v} / n!; log-space evaluation once v or n is large.
inline double concurrency_pmf(double v, long n) {
    if (v < 0.0 || n < 0) throw DomainError("concurrency_pmf: negative input");
    if (v == 0.0) return n == 0 ? 1.0 : 0.0;
    if (v > 50.0 || n > 50)
        return std::exp(static_cast<double>(n) * std::log(v) - v - std::lgamma(static_cast<double>(n) + 1.0));
    double p = std::exp(-v);
    for (long k = 1; k <= n; ++k) p *= v / static_cast<double>(k);
    return p;
}

/// Poisson CDF sum_{n=0}^{n_max} pmf(v, n).
inline double concurrency_cdf(double v, long n_max) {
    if (v < 0.0) throw DomainError("concurrency_cdf: negative mean");
    if (n_max < 0) return 0.0;
    if (v == 0.0) return 1.0;
    if (v > 50.0 || n_max > 50) {
        double s = 0.0;
        for (long n = n_max; n >= 0; --n) s += concurrency_pmf(v, n);
        return std::min(s, 1.0);
    }
    double term = std::exp(-v);
    double s = term;
    for (long n = 1; n <= n_max; ++n) {
        term *= v / static_cast<double>(n);
        s += term;
    }
    return std::min(s, 1.0);
}

/// Supportable-head count floor(N_U / Q), the conservative integerization.
inline long supportable_count(long n_supportable, double qos) {
    if (!(qos > 0.0) || qos > 1.0) throw DomainError("qos must lie in (0, 1]");
    if (n_supportable < 1) throw DomainError("n_supportable must be >= 1");
    return static_cast<long>(std::floor(static_cast<double>(n_supportable) / qos + 1e-12));
}

/// P(N_U, t) = F_{N2(t)}(floor(N_U / Q)) with v(t) from the offered load.
inline double adequacy_probability(const ConcurrencyModel& model, long n_supportable,
                                   double qos, double t, double quad_tol = 1e-8) {
    const long n = supportable_count(n_supportable, qos);
    return concurrency_cdf(offered_load(model, t, quad_tol), n);
}

/// Precomputes the offered load on a Gauss-Legendre grid (16 nodes per slot) so
/// the time-averaged adequacy can be swept cheaply over candidate capacities.
class AdequacyAverager {
public:
    explicit AdequacyAverager(const ConcurrencyModel& model, double quad_tol = 1e-8) {
        model.validate();
        static const double gl_x[8] = {0.0950125098376374, 0.2816035507792589,
                                       0.4580167776572274, 0.6178762444026438,
                                       0.7554044083550030, 0.8656312023878318,
                                       0.9445750230732326, 0.9894009349916499};
        static const double gl_w[8] = {0.1894506104550685, 0.1826034150449236,
                                       0.1691565193950025, 0.1495959888165767,
                                       0.1246289712555339, 0.0951585116824928,
                                       0.0622535239386479, 0.0271524594117541};
        const double slot = model.profile.slot_length_min;
        const auto nslots = model.profile.rates.size();
        horizon_ = model.profile.horizon();
        nodes_.reserve(nslots * 16);
        weights_.reserve(nslots * 16);
        loads_.reserve(nslots * 16);
        for (std::size_t k = 0; k < nslots; ++k) {
            const double a = slot * static_cast<double>(k);
            const double c = a + 0.5 * slot;
            const double h = 0.5 * slot;
            for (int j = 0; j < 8; ++j) {
                for (double sgn : {-1.0, 1.0}) {
                    const double t = c + sgn * h * gl_x[j];
                    nodes_.push_back(t);
                    weights_.push_back(h * gl_w[j]);
                    loads_.push_back(offered_load(model, t, quad_tol));
                }
            }
        }
    }

    // (1/T) integral of F_{N2(t)}(n_eval) dt; n_eval < 0 yields 0
    double mean_cdf(long n_eval) const {
        if (n_eval < 0) return 0.0;
        double acc = 0.0, comp = 0.0;  // Kahan
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const double term = weights_[i] * concurrency_cdf(loads_[i], n_eval) - comp;
            const double next = acc + term;
            comp = (next - acc) - term;
            acc = next;
        }
        return std::min(acc / horizon_, 1.0);
    }

    double mean_adequacy(long n_supportable, double qos) const {
        return mean_cdf(supportable_count(n_supportable, qos));
    }

    // time average of P(N2(t) < ceiling capacity): the strictly-less convention
    // used by the planning figures
    double mean_strict_adequacy(long n_supportable, double qos) const {
        return mean_cdf(supportable_count(n_supportable, qos) - 1);
    }

    double horizon() const { return horizon_; }
    const std::vector<double>& loads() const { return loads_; }
    const std::vector<double>& nodes() const { return nodes_; }

private:
    double horizon_ = 0.0;
    std::vector<double> nodes_, weights_, loads_;
};

/// E[P(N_U, t)] = (1/T) int_0^T P(N_U, t) dt via composite 16-node
/// Gauss-Legendre per arrival slot.
inline double mean_adequacy(const ConcurrencyModel& model, long n_supportable, double qos,
                            double quad_tol = 1e-8) {
    return AdequacyAverager(model, quad_tol).mean_adequacy(n_supportable, qos);
}

} // namespace cscs
