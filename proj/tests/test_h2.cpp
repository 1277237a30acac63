#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "gridloss/h2.hpp"
#include "gridloss/sim.hpp"
#include "test_util.hpp"

using namespace gridloss;

namespace {

Eigen::MatrixXd random_hurwitz(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd R(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) R(i, j) = u(rng);
    return R - (R.norm() + 0.5) * Eigen::MatrixXd::Identity(n, n);
}

/// Decoupled modal 3x3 subsystem for one positive Laplacian eigenvalue.
Eigen::MatrixXd modal_a(const InverterParams& p, double lam, bool couple) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 3);
    A(0, 1) = 1.0;
    A(1, 0) = -p.k_p * lam / p.tau_p;
    A(1, 1) = -1.0 / p.tau_p;
    A(2, 2) = -(p.c_q() + p.k_q * lam) / p.tau_q;
    if (couple) {
        A(1, 2) = p.k_p * p.alpha * lam / p.tau_p;
        A(2, 0) = -p.k_q * p.alpha * lam / p.tau_q;
    }
    return A;
}

Eigen::MatrixXd modal_ctc(const InverterParams& p, double lam) {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(3, 3);
    Q(0, 0) = p.alpha * lam;
    Q(2, 2) = p.alpha * lam;
    return Q;
}

}  // namespace

TEST_CASE("lyapunov solver on frozen cases") {
    SUBCASE("A = -I gives X = Q/2") {
        const Eigen::MatrixXd A = -Eigen::MatrixXd::Identity(4, 4);
        const Eigen::MatrixXd X = solve_lyapunov(A, Eigen::MatrixXd::Identity(4, 4));
        CHECK((X - 0.5 * Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
    }
    SUBCASE("2x2 companion solved by hand") {
        // A'X + XA = -diag(1,0) with A = [[0,1],[-1,-1]] expands to
        // -2 x12 = -1, x11 - x12 - x22 = 0, 2 x12 - 2 x22 = 0,
        // so X = [[1, 1/2],[1/2, 1/2]].
        Eigen::MatrixXd A(2, 2), Q(2, 2), want(2, 2);
        A << 0, 1, -1, -1;
        Q << 1, 0, 0, 0;
        want << 1.0, 0.5, 0.5, 0.5;
        const Eigen::MatrixXd X = solve_lyapunov(A, Q);
        CHECK((X - want).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((A.transpose() * X + X * A + Q).norm() < 1e-12);
    }
    SUBCASE("random stable systems satisfy the residual contract") {
        std::mt19937_64 rng(31);
        for (int t = 0; t < 10; ++t) {
            const Eigen::MatrixXd A = random_hurwitz(rng, 5);
            Eigen::MatrixXd G(5, 5);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) G(i, j) = u(rng);
            const Eigen::MatrixXd Q = G.transpose() * G;
            const Eigen::MatrixXd X = solve_lyapunov(A, Q);
            CHECK((A.transpose() * X + X * A + Q).norm() <= 1e-8 * Q.norm());
            CHECK((X - X.transpose()).norm() < 1e-12 * std::max(1.0, X.norm()));
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X, Eigen::EigenvaluesOnly);
            CHECK(es.eigenvalues()(0) > -1e-10 * std::max(1.0, X.norm()));
        }
    }
    SUBCASE("non-Hurwitz input is rejected") {
        CHECK_THROWS_AS(
            solve_lyapunov(Eigen::MatrixXd::Identity(3, 3), Eigen::MatrixXd::Identity(3, 3)),
            std::runtime_error);
        Eigen::MatrixXd marginal(2, 2);
        marginal << 0, 1, -1, 0;  // purely imaginary pair
        CHECK_THROWS_AS(solve_lyapunov(marginal, Eigen::MatrixXd::Identity(2, 2)),
                        std::runtime_error);
    }
}

TEST_CASE("N=2 reference values") {
    // lambda_2 = 2b = 2: phase 0.1, voltage 0.1/1.5, total 1/6.
    const InverterParams p{1, 1, 1, 1, 0.0, 0.2};
    NetworkGraph g(2, {{0, 1, 1.0, 0.2}});
    const StateSpaceModel m = assemble_decoupled(g, p);

    const H2Report analytic = h2_norm_analytic(p, m.laplacian_spectrum);
    CHECK(analytic.phase_part == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(analytic.voltage_part == doctest::Approx(0.1 / 1.5).epsilon(1e-12));
    CHECK(analytic.total == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

    const H2Report gramian = h2_norm_gramian(m);
    CHECK(testutil::rel_err(gramian.total, analytic.total) < 1e-10);
    CHECK(testutil::rel_err(gramian.phase_part, analytic.phase_part) < 1e-10);
    CHECK(testutil::rel_err(gramian.voltage_part, analytic.voltage_part) < 1e-10);
}

TEST_CASE("gramian path matches the closed form on random decoupled instances") {
    std::mt19937_64 rng(47);
    for (int t = 0; t < 25; ++t) {
        const InverterParams p = testutil::random_params(rng);
        const NetworkGraph g = testutil::random_graph(rng, 20, p.alpha);
        const StateSpaceModel m = assemble_decoupled(g, p);
        const double analytic = h2_norm_analytic(p, m.laplacian_spectrum).total;
        const double gramian = h2_norm_gramian(m).total;
        CHECK(testutil::rel_err(gramian, analytic) <= 1e-8);
    }
}

TEST_CASE("norm decomposition") {
    std::mt19937_64 rng(53);
    const InverterParams p = testutil::random_params(rng);
    const NetworkGraph g = testutil::random_graph(rng, 15, p.alpha);
    const StateSpaceModel m = assemble_decoupled(g, p);

    SUBCASE("total = phase + voltage") {
        const H2Report r = h2_norm_gramian(m);
        CHECK(testutil::rel_err(r.phase_part + r.voltage_part, r.total) < 1e-10);
        const H2Report a = h2_norm_analytic(p, m.laplacian_spectrum);
        CHECK(a.phase_part + a.voltage_part == a.total);
        CHECK(a.phase_part == p.alpha * (g.n_nodes() - 1) / (2.0 * p.k_p));
    }
    SUBCASE("per-mode contributions sum to the total") {
        const H2Report a = h2_norm_analytic(p, m.laplacian_spectrum);
        double sum = 0.0;
        for (const auto& [lam, contrib] : a.per_mode) sum += contrib;
        CHECK(testutil::rel_err(sum, a.total) < 1e-12);
    }
    SUBCASE("alpha = 0 kills the output") {
        InverterParams p0 = p;
        p0.alpha = 0.0;
        const StateSpaceModel m0 = assemble_decoupled(g, p0);
        CHECK(h2_norm_gramian(m0).total < 1e-15);
        CHECK(h2_norm_analytic(p0, m0.laplacian_spectrum).total == 0.0);
    }
}

TEST_CASE("constant-voltage limit") {
    InverterParams p{1, 1, 1, 1e12, 0.0, 0.2};
    NetworkGraph g = complete_graph(8, 1.0, p.alpha);
    const StateSpaceModel m = assemble_decoupled(g, p);
    const H2Report r = h2_norm_analytic(p, m.laplacian_spectrum);
    CHECK(r.voltage_part < 1e-11 * r.total);
    CHECK(testutil::rel_err(r.total, p.alpha * 7 / (2.0 * p.k_p)) < 1e-10);
}

TEST_CASE("phase losses ignore the topology") {
    const InverterParams p{1, 1, 1, 1, 0.0, 0.2};
    const int n = 10;
    const StateSpaceModel a = assemble_decoupled(complete_graph(n, 1.0, p.alpha), p);
    const StateSpaceModel b = assemble_decoupled(path_graph(n, 2.0, p.alpha), p);
    const StateSpaceModel c =
        assemble_decoupled(random_connected_graph(n, 0.4, 0.5, 3.25, p.alpha, 77), p);
    const double pa = h2_norm_analytic(p, a.laplacian_spectrum).phase_part;
    const double pb = h2_norm_analytic(p, b.laplacian_spectrum).phase_part;
    const double pc = h2_norm_analytic(p, c.laplacian_spectrum).phase_part;
    CHECK(pa == pb);
    CHECK(pb == pc);
    CHECK(std::abs(pa - 0.9) < 1e-12);
}

TEST_CASE("voltage losses grow with connectivity") {
    const InverterParams p{1, 1, 1, 1, 0.1, 0.2};
    NetworkGraph base = random_connected_graph(12, 0.4, 0.5, 3.25, p.alpha, 5);
    double prev = -1.0;
    for (double scale : {1.0, 1.5, 2.0, 4.0}) {
        std::vector<Edge> edges = base.edges();
        for (Edge& e : edges) {
            e.b *= scale;
            e.g *= scale;
        }
        NetworkGraph g(12, std::move(edges));
        const StateSpaceModel m = assemble_decoupled(g, p);
        const double v = h2_norm_analytic(p, m.laplacian_spectrum).voltage_part;
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("modal gramian closed form") {
    const InverterParams p{1, 1, 1, 1, 0.0, 0.2};
    SUBCASE("X22 is independent of the mode") {
        for (double lam : {0.5, 2.0, 10.0, 500.0})
            CHECK(modal_gramian(p, lam).first == doctest::Approx(0.1).epsilon(1e-14));
    }
    SUBCASE("X33 hand value and large-lambda limit") {
        CHECK(modal_gramian(p, 2.0).second == doctest::Approx(0.1 / 1.5).epsilon(1e-13));
        CHECK(modal_gramian(p, 1e12).second ==
              doctest::Approx(p.alpha * p.tau_q / (2.0 * p.k_q)).epsilon(1e-9));
    }
    SUBCASE("matches a direct 3x3 lyapunov solve") {
        std::mt19937_64 rng(61);
        for (int t = 0; t < 10; ++t) {
            const InverterParams q = testutil::random_params(rng);
            std::uniform_real_distribution<double> u(0.2, 20.0);
            const double lam = u(rng);
            const Eigen::MatrixXd X = solve_lyapunov(modal_a(q, lam, false), modal_ctc(q, lam));
            const auto [x22, x33] = modal_gramian(q, lam);
            CHECK(testutil::rel_err(X(1, 1), x22) < 1e-10);
            CHECK(testutil::rel_err(X(2, 2), x33) < 1e-10);
        }
    }
    SUBCASE("nonpositive modes are rejected") {
        CHECK_THROWS_AS(modal_gramian(p, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(modal_gramian(p, -1.0), std::invalid_argument);
    }
}

TEST_CASE("coupled norm through two independent paths") {
    // N = 2 keeps one observable mode, so the full Gramian must agree
    // with a single coupled 3x3 modal solve.
    const InverterParams p{1, 1, 1, 1, 0.0, 0.2};
    NetworkGraph g(2, {{0, 1, 1.0, 0.2}});
    const StateSpaceModel m = assemble_coupled(g, p);
    const double by_gramian = h2_norm_gramian(m).total;

    const double lam = 2.0;
    const Eigen::MatrixXd X = solve_lyapunov(modal_a(p, lam, true), modal_ctc(p, lam));
    const double by_modal =
        X(1, 1) / (p.tau_p * p.tau_p) + X(2, 2) / (p.tau_q * p.tau_q);
    CHECK(by_gramian > 0.0);
    CHECK(testutil::rel_err(by_gramian, by_modal) < 1e-10);
}

TEST_CASE("uniform full model is the coupled model") {
    // With one global ratio, L_G = alpha L_B and the general assembly
    // collapses onto the uniform cross-coupled one; the Gramian norms
    // must agree through both code paths.
    const InverterParams p{1.2, 0.9, 0.4, 0.7, 0.1, 0.3};
    NetworkGraph g = random_connected_graph(7, 0.5, 0.5, 3.25, p.alpha, 19);
    const StateSpaceModel coupled = assemble_coupled(g, p);
    const StateSpaceModel full = assemble_full(g, PerNodeParams::uniform(p, 7));
    CHECK((full.A - coupled.A).cwiseAbs().maxCoeff() < 1e-12 * coupled.A.norm());
    const double a = h2_norm_gramian(coupled).total;
    const double b = h2_norm_gramian(full).total;
    CHECK(testutil::rel_err(a, b) < 1e-10);
}

TEST_CASE("heterogeneous gramian agrees with the impulse quadrature") {
    NetworkGraph g = path_graph(4, uniform_susceptance(0.5, 3.25, 27), 0.2);
    PerNodeParams p = PerNodeParams::uniform(InverterParams{1, 1, 0.5, 0.5, 0.0, 0.2}, 4);
    p.tau_p << 0.4, 0.6, 0.5, 0.3;
    p.k_q << 1.0, 1.5, 0.8, 1.2;
    const StateSpaceModel m = assemble_full(g, p);

    const H2Report r = h2_norm_gramian(m);
    CHECK(r.total > 0.0);
    CHECK(testutil::rel_err(r.phase_part + r.voltage_part, r.total) < 1e-10);
    // Independent route: impulse-response energies on the deflated model.
    CHECK(testutil::rel_err(impulse_energy_total(m), r.total) < 1e-6);
}

TEST_CASE("complete graph bounds") {
    const InverterParams p{1, 1, 1, 1, 0.0, 0.2};
    SUBCASE("uniform susceptances collapse the sandwich") {
        for (int n : {3, 8, 20}) {
            NetworkGraph g = complete_graph(n, 1.7, p.alpha);
            const StateSpaceModel m = assemble_decoupled(g, p);
            const double exact = h2_norm_analytic(p, m.laplacian_spectrum).total;
            const BoundsReport b = complete_graph_bounds(p, n, g);
            CHECK(b.equality_expected);
            CHECK(testutil::rel_err(b.upper, exact) < 1e-10);
            CHECK(testutil::rel_err(b.lower, exact) < 1e-10);
        }
    }
    SUBCASE("random susceptances satisfy lower <= exact <= upper") {
        for (int trial = 0; trial < 6; ++trial) {
            NetworkGraph g = complete_graph(20, uniform_susceptance(0.5, 3.25, 100 + trial), 0.2);
            const StateSpaceModel m = assemble_decoupled(g, p);
            const double exact = h2_norm_analytic(p, m.laplacian_spectrum).total;
            const BoundsReport b = complete_graph_bounds(p, 20, g);
            CHECK_FALSE(b.equality_expected);
            CHECK(b.lower <= exact * (1 + 1e-12));
            CHECK(exact <= b.upper * (1 + 1e-12));
        }
    }
    SUBCASE("both bounds approach the asymptote") {
        const int n = 1000;
        NetworkGraph g = complete_graph(n, 1.0, p.alpha);
        const BoundsReport b = complete_graph_bounds(p, n, g);
        const double asym = complete_graph_asymptote(p, n);
        CHECK(testutil::rel_err(b.upper, asym) < 2.0 / n);
        CHECK(testutil::rel_err(b.lower, asym) < 2.0 / n);
    }
    SUBCASE("non-complete graphs are rejected") {
        NetworkGraph g = path_graph(5, 1.0, 0.2);
        CHECK_THROWS_AS(complete_graph_bounds(p, 5, g), std::invalid_argument);
    }
}

TEST_CASE("complete graph asymptote") {
    // alpha/2 (N-1) (1/kP + 1/(tauQ kQ)) = 0.1 * 50 * 2 = 10 at N = 51.
    const InverterParams p{1, 1, 1, 1, 0.0, 0.2};
    CHECK(complete_graph_asymptote(p, 51) == doctest::Approx(10.0).epsilon(1e-14));
    // Per-node slope is constant in N.
    const double s1 = complete_graph_asymptote(p, 11) - complete_graph_asymptote(p, 10);
    const double s2 = complete_graph_asymptote(p, 101) - complete_graph_asymptote(p, 100);
    CHECK(s1 == doctest::Approx(s2).epsilon(1e-13));
}

TEST_CASE("path graph bound") {
    const InverterParams p{1, 1, 1, 1, 0.0, 0.2};
    SUBCASE("bound dominates the exact norm") {
        for (int n : {2, 5, 12, 30}) {
            NetworkGraph g = path_graph(n, uniform_susceptance(0.5, 3.25, 200 + n), p.alpha);
            const StateSpaceModel m = assemble_decoupled(g, p);
            const double exact = h2_norm_analytic(p, m.laplacian_spectrum).total;
            const BoundsReport b = path_graph_bound(p, n, g);
            CHECK(exact <= b.upper * (1 + 1e-12));
            CHECK(b.lower == 0.0);
        }
    }
    SUBCASE("N=2 path and complete bounds coincide") {
        NetworkGraph g = path_graph(2, 1.3, p.alpha);
        const BoundsReport pathb = path_graph_bound(p, 2, g);
        const BoundsReport compb = complete_graph_bounds(p, 2, g);
        CHECK(pathb.upper == doctest::Approx(compb.upper).epsilon(1e-14));
    }
    SUBCASE("non-path graphs are rejected") {
        NetworkGraph g = complete_graph(4, 1.0, 0.2);
        CHECK_THROWS_AS(path_graph_bound(p, 4, g), std::invalid_argument);
    }
}

TEST_CASE("mean-eigenvalue identities behind the bounds") {
    SUBCASE("complete: trace/(N-1) = N * mean b") {
        NetworkGraph g = complete_graph(9, uniform_susceptance(0.5, 3.25, 33), 0.2);
        const Eigen::MatrixXd L = build_laplacian(g, LaplacianKind::susceptance).matrix;
        double mean_b = 0.0;
        for (const Edge& e : g.edges()) mean_b += e.b;
        mean_b /= static_cast<double>(g.edges().size());
        CHECK(testutil::rel_err(L.trace() / 8.0, 9.0 * mean_b) < 1e-12);
    }
    SUBCASE("path: trace/(N-1) = 2 * mean b") {
        NetworkGraph g = path_graph(9, uniform_susceptance(0.5, 3.25, 34), 0.2);
        const Eigen::MatrixXd L = build_laplacian(g, LaplacianKind::susceptance).matrix;
        double mean_b = 0.0;
        for (const Edge& e : g.edges()) mean_b += e.b;
        mean_b /= static_cast<double>(g.edges().size());
        CHECK(testutil::rel_err(L.trace() / 8.0, 2.0 * mean_b) < 1e-12);
    }
}

TEST_CASE("analytic norm rejects disconnected spectra") {
    const InverterParams p{1, 1, 1, 1, 0.0, 0.2};
    Eigen::VectorXd eigs(3);
    eigs << 0.0, 0.0, 2.0;
    CHECK_THROWS_AS(h2_norm_analytic(p, eigs), std::invalid_argument);
    Eigen::VectorXd no_zero(2);
    no_zero << 1.0, 2.0;
    CHECK_THROWS_AS(h2_norm_analytic(p, no_zero), std::invalid_argument);
}

TEST_CASE("gramian norm rejects unstable observable subspaces") {
    const InverterParams p{1, 1, 1, 1, 0.0, 0.2};
    NetworkGraph g = complete_graph(3, 1.0, p.alpha);
    StateSpaceModel m = assemble_decoupled(g, p);
    m.A.block(6, 6, 3, 3) = Eigen::MatrixXd::Identity(3, 3);  // blow up the voltage loop
    CHECK_THROWS_AS(h2_norm_gramian(m), std::runtime_error);
}
