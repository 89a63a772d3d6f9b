#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cscs/queueing.hpp"
#include "oracles.hpp"

using namespace cscs;

namespace {

ConcurrencyModel exp_model(double lam_per_min, double service_mean, double slot_min,
                           int n_slots) {
    ConcurrencyModel m;
    m.profile.slot_length_min = slot_min;
    m.profile.rates.assign(n_slots, lam_per_min * slot_min);
    m.service.m = 1;
    m.service.alpha = Eigen::VectorXd::Ones(1);
    m.service.rate_matrix = Eigen::MatrixXd::Constant(1, 1, -1.0 / service_mean);
    return m;
}

ConcurrencyModel erlang_model(double lam_per_min, double mu, double slot_min, int n_slots) {
    ConcurrencyModel m;
    m.profile.slot_length_min = slot_min;
    m.profile.rates.assign(n_slots, lam_per_min * slot_min);
    m.service.m = 2;
    m.service.alpha.resize(2);
    m.service.alpha << 1.0, 0.0;
    m.service.rate_matrix.resize(2, 2);
    m.service.rate_matrix << -mu, mu, 0.0, -mu;
    return m;
}

} // namespace

TEST_CASE("offered_load closed form for exponential service") {
    const auto m = exp_model(0.125, 60.0, 10.0, 48);
    CHECK(offered_load(m, 0.0) == 0.0);
    const double expect = 7.5 * (1.0 - std::exp(-2.0));
    CHECK_THAT(offered_load(m, 120.0), Catch::Matchers::WithinAbs(expect, 1e-7));
    CHECK_THAT(offered_load(m, 120.0), Catch::Matchers::WithinAbs(6.4850, 1e-4));
    // near-stationary by the end of the horizon
    CHECK_THAT(offered_load(m, 480.0), Catch::Matchers::WithinAbs(7.5, 1e-3));
    CHECK_THROWS_AS(offered_load(m, 481.0), DomainError);
    CHECK_THROWS_AS(offered_load(m, -1.0), DomainError);
}

TEST_CASE("offered_load matches the semi-analytic phase-type route") {
    const auto m = erlang_model(0.2, 0.07, 10.0, 30);
    for (double t : {13.0, 55.0, 120.0, 240.0, 300.0}) {
        const double quad = offered_load(m, t, 1e-10);
        const double closed = oracles::offered_load_closed(m, t);
        CHECK_THAT(quad, Catch::Matchers::WithinAbs(closed, 1e-8));
    }
}

TEST_CASE("offered_load with non-uniform rates") {
    auto m = erlang_model(0.0, 0.1, 10.0, 12);
    m.profile.rates.assign(12, 1.0);
    m.profile.rates[3] = 5.0;  // burst in one slot
    for (double t : {35.0, 40.0, 47.5, 90.0}) {
        CHECK_THAT(offered_load(m, t, 1e-10),
                   Catch::Matchers::WithinAbs(oracles::offered_load_closed(m, t), 1e-8));
    }
}

TEST_CASE("concurrency_pmf basics") {
    CHECK(concurrency_pmf(0.0, 0) == 1.0);
    CHECK_THAT(concurrency_pmf(7.5, 7), Catch::Matchers::WithinAbs(0.14645, 1e-5));
    double sum = 0.0;
    for (long n = 0; n <= 200; ++n) sum += concurrency_pmf(7.5, n);
    CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THROWS_AS(concurrency_pmf(-1.0, 0), DomainError);
    CHECK_THROWS_AS(concurrency_pmf(1.0, -1), DomainError);
    // log-space path agrees with the regularized-gamma route
    CHECK_THAT(concurrency_pmf(80.0, 75),
               Catch::Matchers::WithinRel(
                   oracles::poisson_cdf(75, 80.0) - oracles::poisson_cdf(74, 80.0), 1e-9));
}

TEST_CASE("concurrency_cdf against the regularized-gamma oracle") {
    CHECK(concurrency_cdf(0.0, 0) == 1.0);
    CHECK(concurrency_cdf(0.0, 17) == 1.0);
    CHECK_THAT(concurrency_cdf(7.5, 10), Catch::Matchers::WithinAbs(0.86224, 1e-5));
    for (double v : {0.3, 2.0, 7.5, 30.0, 120.0})
        for (long n : {0L, 3L, 10L, 40L, 140L})
            CHECK_THAT(concurrency_cdf(v, n),
                       Catch::Matchers::WithinAbs(oracles::poisson_cdf(n, v), 1e-10));
    CHECK_THAT(concurrency_cdf(7.5, 400), Catch::Matchers::WithinAbs(1.0, 1e-12));
    double prev = 0.0;
    for (long n = 0; n < 30; ++n) {
        const double f = concurrency_cdf(7.5, n);
        CHECK(f >= prev);
        prev = f;
    }
}

TEST_CASE("adequacy_probability") {
    const auto m = exp_model(0.125, 60.0, 10.0, 48);
    CHECK(adequacy_probability(m, 10, 1.0, 0.0) == 1.0);
    // v(480) ~ 7.5, so this sits near the stationary value
    CHECK_THAT(adequacy_probability(m, 10, 1.0, 480.0),
               Catch::Matchers::WithinAbs(0.86224, 2e-3));
    // Q = 0.5 doubles the supportable head count
    CHECK_THAT(adequacy_probability(m, 10, 0.5, 480.0),
               Catch::Matchers::WithinAbs(concurrency_cdf(offered_load(m, 480.0), 20), 1e-12));
    CHECK_THROWS_AS(adequacy_probability(m, 10, 0.0, 10.0), DomainError);
    CHECK_THROWS_AS(adequacy_probability(m, 10, 1.5, 10.0), DomainError);
}

TEST_CASE("mean_adequacy monotone in capacity and trivial cases") {
    auto quiet = exp_model(0.0, 60.0, 10.0, 8);
    CHECK(mean_adequacy(quiet, 5, 1.0) == 1.0);

    const auto m = exp_model(0.125, 60.0, 10.0, 24);
    const AdequacyAverager avg(m);
    double prev = 0.0;
    for (long n = 1; n <= 25; ++n) {
        const double e = avg.mean_adequacy(n, 1.0);
        CHECK(e >= prev - 1e-12);
        prev = e;
    }
    CHECK(avg.mean_strict_adequacy(10, 1.0) <= avg.mean_adequacy(10, 1.0));
}

TEST_CASE("mean_adequacy against a discrete-event simulation") {
    const auto m = exp_model(0.1, 40.0, 10.0, 24);  // v_inf = 4
    const long n_u = 6;
    const double analytic = mean_adequacy(m, n_u, 1.0);

    // estimate (1/T) int P(N2(t) <= 6) dt by simulating the queue and averaging
    // the indicator over a uniform time grid
    Rng rng(515);
    const int reps = 4000;
    std::vector<double> grid;
    for (int g = 0; g < 48; ++g) grid.push_back(240.0 * (g + 0.5) / 48.0);
    double hit = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto counts = oracles::simulate_queue_once(m, grid, rng);
        for (int c : counts)
            if (c <= n_u) hit += 1.0;
    }
    const double sim = hit / (static_cast<double>(reps) * grid.size());
    CHECK_THAT(analytic, Catch::Matchers::WithinAbs(sim, 0.01));
}

TEST_CASE("offered_load continuity in t") {
    const auto m = erlang_model(0.15, 0.05, 10.0, 24);
    const double lip = 0.15 + 1.0;  // max rate/min plus slack
    double prev = offered_load(m, 0.0);
    for (int i = 1; i <= 240; ++i) {
        const double t = static_cast<double>(i);
        const double v = offered_load(m, t);
        CHECK(std::abs(v - prev) <= lip * 1.0 + 1e-6);
        prev = v;
    }
}
