#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unsupported/Eigen/MatrixFunctions>

#include "gridloss/h2.hpp"
#include "gridloss/sim.hpp"
#include "test_util.hpp"

using namespace gridloss;

namespace {

const InverterParams kUnitParams{1.0, 1.0, 1.0, 1.0, 0.0, 0.2};

StateSpaceModel two_node_model() {
    NetworkGraph g(2, {{0, 1, 1.0, 0.2}});
    return assemble_decoupled(g, kUnitParams);
}

}  // namespace

TEST_CASE("equilibrium stays put without noise") {
    const StateSpaceModel m = two_node_model();
    SimConfig c;
    c.dt = 1e-3;
    c.horizon = 1.0;
    c.noise_intensity = Eigen::VectorXd::Zero(m.input_size());
    const Trajectory t = simulate(m, c);
    CHECK(t.states.cwiseAbs().maxCoeff() == 0.0);
    CHECK(t.loss.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("relaxation follows the matrix exponential") {
    NetworkGraph g = complete_graph(5, 1.0, 0.2);
    const InverterParams p{1.0, 1.0, 0.5, 0.5, 0.0, 0.2};
    const StateSpaceModel m = assemble_decoupled(g, p);

    Eigen::VectorXd psi0 = Eigen::VectorXd::Zero(m.state_size());
    psi0(0) = 0.2;
    psi0(10) = 0.05;

    SimConfig c;
    c.dt = 1e-4;
    c.horizon = 4.0;
    c.noise_intensity = Eigen::VectorXd::Zero(m.input_size());
    c.initial_state = psi0;
    const Trajectory t = simulate(m, c);

    const Eigen::VectorXd exact = (m.A * c.horizon).exp() * psi0;
    const Eigen::VectorXd got = t.states.row(t.states.rows() - 1).transpose();
    CHECK((got - exact).norm() < 2e-2 * psi0.norm());

    // The loss decays into a small tail by the end of the horizon.
    CHECK(t.loss(t.loss.size() - 1) < 1e-3 * t.loss(0));
}

TEST_CASE("same seed reproduces the trajectory bit for bit") {
    const StateSpaceModel m = two_node_model();
    SimConfig c;
    c.dt = 1e-3;
    c.horizon = 2.0;
    c.seed = 99;
    const Trajectory a = simulate(m, c);
    const Trajectory b = simulate(m, c);
    CHECK((a.states - b.states).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.loss - b.loss).cwiseAbs().maxCoeff() == 0.0);
    c.seed = 100;
    const Trajectory d = simulate(m, c);
    CHECK((a.states - d.states).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("step guard rejects coarse steps") {
    const StateSpaceModel m = two_node_model();
    SimConfig c;
    c.dt = 0.5;  // |lambda|_max = 3 for these parameters
    c.horizon = 10.0;
    CHECK_THROWS_AS(simulate(m, c), std::invalid_argument);
}

TEST_CASE("empirical estimate is consistent with the closed form") {
    const StateSpaceModel m = two_node_model();
    SimConfig c;
    c.dt = 1e-3;
    c.horizon = 2000.0;
    c.burn_in = 0.2;
    c.seed = 7;
    const auto [estimate, stderr_] = empirical_h2(m, c);
    const double want = 1.0 / 6.0;
    CHECK(stderr_ > 0.0);
    CHECK(std::abs(estimate - want) < 3.0 * stderr_);
}

TEST_CASE("zero output map estimates exactly zero") {
    NetworkGraph g(2, {{0, 1, 1.0, 0.0}});
    InverterParams p = kUnitParams;
    p.alpha = 0.0;
    const StateSpaceModel m = assemble_decoupled(g, p);
    SimConfig c;
    c.dt = 1e-3;
    c.horizon = 100.0;
    c.seed = 3;
    const auto [estimate, stderr_] = empirical_h2(m, c);
    CHECK(estimate == 0.0);
    CHECK(stderr_ == 0.0);
}

TEST_CASE("estimate scales linearly with the noise covariance") {
    const StateSpaceModel m = two_node_model();
    SimConfig c;
    c.dt = 1e-3;
    c.horizon = 200.0;
    c.seed = 11;
    const auto [e1, s1] = empirical_h2(m, c);

    // A power-of-two covariance scale propagates exactly.
    c.noise_intensity = Eigen::VectorXd::Constant(m.input_size(), 4.0);
    const auto [e4, s4] = empirical_h2(m, c);
    CHECK(e4 == 4.0 * e1);

    c.noise_intensity = Eigen::VectorXd::Constant(m.input_size(), 2.0);
    const auto [e2, s2] = empirical_h2(m, c);
    CHECK(testutil::rel_err(e2, 2.0 * e1) < 1e-12);
}

TEST_CASE("empirical estimator preconditions") {
    const StateSpaceModel m = two_node_model();
    SimConfig c;
    c.dt = 1e-3;
    c.horizon = 5.0;  // slowest observable time constant is 2 s
    CHECK_THROWS_AS(empirical_h2(m, c), std::invalid_argument);
    c.horizon = 100.0;
    c.burn_in = 0.0;
    CHECK_THROWS_AS(empirical_h2(m, c), std::invalid_argument);
}

TEST_CASE("impulse energies") {
    SUBCASE("channel sum matches the closed form on the 3-node path") {
        NetworkGraph g = path_graph(3, 1.0, 0.2);
        const StateSpaceModel m = assemble_decoupled(g, kUnitParams);
        const double analytic = h2_norm_analytic(kUnitParams, m.laplacian_spectrum).total;
        const double total = impulse_energy_total(m);
        CHECK(testutil::rel_err(total, analytic) < 1e-6);
    }
    SUBCASE("complete-graph symmetry equalizes the frequency channels") {
        NetworkGraph g = complete_graph(4, 1.0, 0.2);
        const StateSpaceModel m = assemble_decoupled(g, kUnitParams);
        const double first = impulse_energy(m, 0);
        for (int ch = 1; ch < 4; ++ch)
            CHECK(testutil::rel_err(impulse_energy(m, ch), first) < 1e-9);
    }
    SUBCASE("zero output map has zero energy") {
        NetworkGraph g(2, {{0, 1, 1.0, 0.0}});
        InverterParams p = kUnitParams;
        p.alpha = 0.0;
        const StateSpaceModel m = assemble_decoupled(g, p);
        CHECK(impulse_energy(m, 0) < 1e-15);
    }
    SUBCASE("channel index is validated") {
        const StateSpaceModel m = two_node_model();
        CHECK_THROWS_AS(impulse_energy(m, 4), std::invalid_argument);
        CHECK_THROWS_AS(impulse_energy(m, -1), std::invalid_argument);
    }
}

TEST_CASE("three-way oracle: analytic, gramian, impulse") {
    NetworkGraph g = path_graph(3, 1.0, 0.2);
    const StateSpaceModel m = assemble_decoupled(g, kUnitParams);
    const double a = h2_norm_analytic(kUnitParams, m.laplacian_spectrum).total;
    const double gr = h2_norm_gramian(m).total;
    const double im = impulse_energy_total(m);
    CHECK(testutil::rel_err(gr, a) < 1e-8);
    CHECK(testutil::rel_err(im, a) < 1e-6);
    CHECK(testutil::rel_err(im, gr) < 1e-6);
}

TEST_CASE("mean phase drift is invisible in the loss") {
    NetworkGraph g = path_graph(3, 1.0, 0.2);
    const StateSpaceModel m = assemble_decoupled(g, kUnitParams);
    SimConfig c;
    c.dt = 1e-3;
    c.horizon = 5.0;
    c.seed = 17;
    const Trajectory base = simulate(m, c);

    SimConfig shifted = c;
    shifted.initial_state = Eigen::VectorXd(m.kernel_direction());
    const Trajectory moved = simulate(m, shifted);

    const double scale = std::max(1.0, base.loss.cwiseAbs().maxCoeff());
    CHECK((base.loss - moved.loss).cwiseAbs().maxCoeff() < 1e-9 * scale);
}

TEST_CASE("loss scales quadratically with the initial state") {
    NetworkGraph g = complete_graph(4, 1.0, 0.2);
    const StateSpaceModel m = assemble_decoupled(g, kUnitParams);

    Eigen::VectorXd psi0 = Eigen::VectorXd::Zero(m.state_size());
    psi0(1) = 0.1;
    psi0(9) = -0.05;

    SimConfig c;
    c.dt = 1e-3;
    c.horizon = 2.0;
    c.noise_intensity = Eigen::VectorXd::Zero(m.input_size());
    c.initial_state = psi0;
    const Trajectory one = simulate(m, c);

    c.initial_state = Eigen::VectorXd(2.0 * psi0);  // exact power-of-two scaling
    const Trajectory two = simulate(m, c);
    CHECK((two.loss - 4.0 * one.loss).cwiseAbs().maxCoeff() == 0.0);
}
