#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cscs/mimo.hpp"
#include "oracles.hpp"

using namespace cscs;

TEST_CASE("sample_channel moments and determinism") {
    Rng rng(512);
    double var = 0.0;
    const int draws = 2000;
    const int per = 50;  // 2000 * 50 = 1e5 entries
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(5, 5);
    for (int k = 0; k < draws; ++k) {
        const MatrixC h = sample_complex_gaussian(5, 10, rng);
        var += h.squaredNorm() / 50.0;
        acc += h.leftCols(5) * h.leftCols(5).adjoint() / 5.0;
        (void)per;
    }
    CHECK_THAT(var / draws, Catch::Matchers::WithinRel(1.0, 0.02));
    const Eigen::MatrixXcd cov = acc / draws;
    CHECK((cov - Eigen::MatrixXcd::Identity(5, 5)).cwiseAbs().maxCoeff() < 0.05);

    const auto a = sample_channel(2, 8, 77);
    const auto b = sample_channel(2, 8, 77);
    CHECK(a.h == b.h);
    CHECK(sample_channel(2, 8, 78).h != a.h);
}

TEST_CASE("perturb_channel modes") {
    const auto est = sample_channel(2, 8, 1);
    const auto none = perturb_channel(est, 0.0, PerturbMode::Gaussian, 3);
    CHECK(none.true_channel.h == est.h);

    const auto bnd = perturb_channel(est, 0.37, PerturbMode::Boundary, 3);
    CHECK_THAT(bnd.error().squaredNorm(), Catch::Matchers::WithinAbs(0.37, 1e-12));

    Rng rng(5);
    double tr = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const MatrixC d = detail::draw_error(2, 8, 0.1, PerturbMode::Gaussian, rng);
        tr += d.squaredNorm();
    }
    CHECK_THAT(tr / n, Catch::Matchers::WithinRel(1.6, 0.03));

    CHECK_THROWS_AS(perturb_channel(est, -0.1, PerturbMode::Gaussian, 3), DomainError);
}

TEST_CASE("stack_interfering shapes and round trip") {
    std::vector<ChannelMatrix> users;
    for (int u = 0; u < 4; ++u) users.push_back(sample_channel(2, 8, 100 + u));
    const MatrixC st = stack_interfering(users, 1);
    REQUIRE(st.rows() == 6);
    REQUIRE(st.cols() == 8);
    CHECK(st.middleRows(0, 2) == users[0].h);
    CHECK(st.middleRows(2, 2) == users[2].h);
    CHECK(st.middleRows(4, 2) == users[3].h);

    std::vector<ChannelMatrix> two = {users[0], users[1]};
    CHECK(stack_interfering(two, 0) == users[1].h);

    auto bad = users;
    bad[2].h = sample_channel(2, 6, 9).h;
    CHECK_THROWS_AS(stack_interfering(bad, 0), ValidationError);

    std::vector<ChannelMatrix> one = {users[0]};
    CHECK_THROWS_AS(stack_interfering(one, 0), ValidationError);  // empty after exclusion
}

TEST_CASE("bd_precoder zero-interference and SVD identity") {
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<ChannelMatrix> users;
        for (int u = 0; u < 4; ++u)
            users.push_back(sample_channel(2, 8, 1000 + 10 * rep + u));
        for (std::size_t i = 0; i < users.size(); ++i) {
            const MatrixC h_tilde = stack_interfering(users, i);
            const auto bd = bd_precoder(h_tilde, users[i]);
            REQUIRE(bd.w.rows() == 8);
            REQUIRE(bd.w.cols() == 2);
            CHECK((h_tilde * bd.w).norm() <= 1e-8 * h_tilde.norm());
            CHECK((bd.w.adjoint() * bd.w - MatrixC::Identity(2, 2)).cwiseAbs().maxCoeff() <
                  1e-10);
            REQUIRE(bd.sigma.size() == 2);
            CHECK(bd.sigma(0) >= bd.sigma(1));
            CHECK(bd.sigma(1) > 0.0);
            const MatrixC diag = bd.decoder * users[i].h * bd.w;
            CHECK((diag - bd.sigma.cast<Cplx>().asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() <
                  1e-8);
        }
    }
}

TEST_CASE("bd_precoder feasibility law") {
    // with N_u users at n_r antennas, success iff n_t >= n_r * N_u on random draws
    for (int n_t = 4; n_t <= 10; n_t += 2) {
        std::vector<ChannelMatrix> users;
        for (int u = 0; u < 4; ++u) users.push_back(sample_channel(2, n_t, 40 + n_t + u));
        const MatrixC h_tilde = stack_interfering(users, 0);
        if (n_t >= 8) {
            CHECK_NOTHROW(bd_precoder(h_tilde, users[0]));
        } else {
            CHECK_THROWS_AS(bd_precoder(h_tilde, users[0]), InfeasibleError);
        }
    }
}

TEST_CASE("bd_precoder determinism") {
    std::vector<ChannelMatrix> users;
    for (int u = 0; u < 3; ++u) users.push_back(sample_channel(2, 6, 7000 + u));
    const auto a = bd_precoder(stack_interfering(users, 0), users[0]);
    const auto b = bd_precoder(stack_interfering(users, 0), users[0]);
    CHECK(a.w == b.w);
    CHECK(a.decoder == b.decoder);
}

TEST_CASE("capacity_term identities and oracle") {
    Eigen::VectorXd ones2 = Eigen::VectorXd::Ones(2);
    CHECK(capacity_term(ones2, MatrixC::Zero(2, 2), 1.0, 1) == 0.0);
    CHECK_THAT(capacity_term(ones2, MatrixC::Identity(2, 2), 1.0, 1),
               Catch::Matchers::WithinAbs(2.0, 1e-12));

    Rng rng(88);
    for (int rep = 0; rep < 15; ++rep) {
        const MatrixC g = sample_complex_gaussian(2, 2, rng);
        const MatrixC q = g * g.adjoint();
        Eigen::VectorXd sig(2);
        sig << rng.uniform(0.2, 3.0), rng.uniform(0.1, 1.5);
        const double snr = 100.0;
        const long nst = 8;
        const double got = capacity_term(sig, q, snr, nst);
        const MatrixC lam = sig.cast<Cplx>().asDiagonal();
        Eigen::SelfAdjointEigenSolver<MatrixC> eig((snr / nst) * lam * q * lam.adjoint());
        double expect = 0.0;
        for (Eigen::Index i = 0; i < 2; ++i) expect += std::log2(1.0 + eig.eigenvalues()(i));
        CHECK_THAT(got, Catch::Matchers::WithinAbs(expect, 1e-9));
    }

    // monotone under PSD increments
    Rng rng2(89);
    for (int rep = 0; rep < 10; ++rep) {
        const MatrixC g = sample_complex_gaussian(2, 2, rng2);
        const MatrixC q = g * g.adjoint();
        const MatrixC h = sample_complex_gaussian(2, 2, rng2);
        const MatrixC d = h * h.adjoint();
        Eigen::VectorXd sig(2);
        sig << 1.0, 0.4;
        CHECK(capacity_term(sig, q + d, 10.0, 4) >= capacity_term(sig, q, 10.0, 4) - 1e-9);
    }

    MatrixC notpsd = -MatrixC::Identity(2, 2);
    CHECK_THROWS_AS(capacity_term(ones2, notpsd, 1.0, 1), ValidationError);
    MatrixC nothermitian = MatrixC::Zero(2, 2);
    nothermitian(0, 1) = 1.0;
    CHECK_THROWS_AS(capacity_term(ones2, nothermitian, 1.0, 1), ValidationError);
}
