#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "cscs/errors.hpp"
#include "cscs/queueing.hpp"

namespace cscs {

struct PlannerConfig {
    int n_r = 2;                // receive antennas per UE
    long n1 = 0;                // total inhabitants
    long n1_prime = 0;          // inhabitants counted inside SSSC coverage
    double qos = 1.0;           // sojourner QoS fraction Q in (0,1]
    double qos_prime = 1.0;     // inhabitant QoS factor Q' > 0
    double eta = 0.99;          // target mean adequacy
    double gamma = 0.001;       // adequacy-growth threshold
    double overlap_ratio = 0.0; // S_{A1 cap A2} / S_{A2}
    long n_u_cap = 500;         // search cap on supportable sojourners

    void validate() const {
        if (n_r < 1) throw ValidationError("planner: n_r must be >= 1");
        if (!(qos > 0.0) || qos > 1.0) throw ValidationError("planner: Q must lie in (0,1]");
        if (!(qos_prime > 0.0)) throw ValidationError("planner: Q' must be > 0");
        if (!(eta > 0.0) || !(eta < 1.0)) throw ValidationError("planner: eta must lie in (0,1)");
        if (!(gamma > 0.0)) throw ValidationError("planner: gamma must be > 0");
        if (overlap_ratio < 0.0 || overlap_ratio > 1.0)
            throw ValidationError("planner: overlap ratio must lie in [0,1]");
        if (n1 < 0 || n1_prime < 0) throw ValidationError("planner: inhabitant counts must be >= 0");
    }
};

/// N_U = N_ST / N_R - N1'; N_ST must be divisible by N_R and leave N_U >= 1,
/// the full-rank BD precondition.
inline long supportable_sojourners(long n_st, const PlannerConfig& cfg) {
    cfg.validate();
    if (n_st % cfg.n_r != 0)
        throw DomainError("supportable_sojourners: N_ST must be divisible by N_R");
    const long n_u = n_st / cfg.n_r - cfg.n1_prime;
    if (n_u < 1)
        throw DomainError("supportable_sojourners: N_ST/N_R must exceed N1'");
    return n_u;
}

namespace detail {

// Planning curves follow the strictly-less adequacy convention of the
// enterprise experiments; the Eq.-5 operator stays available via mean_adequacy.
inline double planning_value(const AdequacyAverager& avg, long n_u, const PlannerConfig& cfg) {
    return avg.mean_strict_adequacy(n_u, cfg.qos);
}

} // namespace detail

/// Minimum N_ST (stepping by N_R from N_R*(N1'+1)) whose time-averaged adequacy
/// reaches eta. Monotone linear search; throws once the cap is exceeded.
inline long select_sap_antennas_eta(const AdequacyAverager& avg, const PlannerConfig& cfg) {
    cfg.validate();
    for (long n_u = 1; n_u <= cfg.n_u_cap; ++n_u) {
        if (detail::planning_value(avg, n_u, cfg) >= cfg.eta)
            return cfg.n_r * (n_u + cfg.n1_prime);
    }
    throw InfeasibleError("eta selection: adequacy below eta up to the cap of " +
                          std::to_string(cfg.n_u_cap) + " sojourners");
}

inline long select_sap_antennas_eta(const ConcurrencyModel& model, const PlannerConfig& cfg) {
    return select_sap_antennas_eta(AdequacyAverager(model), cfg);
}

/// Minimum N_ST whose adequacy growth from one extra supportable sojourner
/// drops to gamma or less.
inline long select_sap_antennas_gamma(const AdequacyAverager& avg, const PlannerConfig& cfg) {
    cfg.validate();
    double cur = detail::planning_value(avg, 1, cfg);
    for (long n_u = 1; n_u <= cfg.n_u_cap; ++n_u) {
        const double next = detail::planning_value(avg, n_u + 1, cfg);
        if (next - cur <= cfg.gamma)
            return cfg.n_r * (n_u + cfg.n1_prime);
        cur = next;
    }
    throw InfeasibleError("gamma selection: adequacy growth above gamma up to the cap of " +
                          std::to_string(cfg.n_u_cap) + " sojourners");
}

inline long select_sap_antennas_gamma(const ConcurrencyModel& model, const PlannerConfig& cfg) {
    return select_sap_antennas_gamma(AdequacyAverager(model), cfg);
}

/// N_IT = ceil(N_R * Q' * (N1 + N_U* * overlap_ratio)); antenna counts are integers,
/// and rounding up never under-provisions the inhabitants.
inline long iap_antennas(const PlannerConfig& cfg, long n_u_star) {
    cfg.validate();
    if (n_u_star < 1) throw DomainError("iap_antennas: N_U* must be >= 1");
    const double raw = static_cast<double>(cfg.n_r) * cfg.qos_prime *
                       (static_cast<double>(cfg.n1) +
                        static_cast<double>(n_u_star) * cfg.overlap_ratio);
    return static_cast<long>(std::ceil(raw - 1e-9));
}

/// Area of the lens shared by two disks with radii r1, r2 and center distance d.
inline double disk_overlap_area(double r1, double r2, double d) {
    if (!(r1 > 0.0) || !(r2 > 0.0) || d < 0.0)
        throw DomainError("disk_overlap_area: radii must be positive, distance nonnegative");
    const double pi = 3.14159265358979323846;
    if (d >= r1 + r2) return 0.0;
    const double rmin = std::min(r1, r2);
    if (d <= std::abs(r1 - r2)) return pi * rmin * rmin;
    const double c1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1);
    const double c2 = (d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2);
    const double tri = 0.5 * std::sqrt(std::max(0.0, (-d + r1 + r2) * (d + r1 - r2) *
                                                     (d - r1 + r2) * (d + r1 + r2)));
    return r1 * r1 * std::acos(std::clamp(c1, -1.0, 1.0)) +
           r2 * r2 * std::acos(std::clamp(c2, -1.0, 1.0)) - tri;
}

} // namespace cscs
