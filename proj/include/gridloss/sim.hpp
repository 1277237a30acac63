#pragma once

#include <cstdint>
#include <optional>

#include "gridloss/dynamics.hpp"

namespace gridloss {

/// Time-stepping configuration for the stochastic simulation.
///
/// noise_intensity scales the white-noise covariance per input channel
/// (empty means unit covariance on every channel). burn_in is the
/// fraction of the horizon discarded before time averaging.
struct SimConfig {
    double dt = 1e-3;
    double horizon = 10.0;
    double burn_in = 0.2;
    std::uint64_t seed = 0;
    Eigen::VectorXd noise_intensity;
    std::optional<Eigen::VectorXd> initial_state;
};

/// One realized trajectory with the instantaneous-loss series and the
/// time-averaged loss estimate past burn-in (batch-means stderr).
struct Trajectory {
    Eigen::VectorXd times;
    Eigen::MatrixXd states;  ///< one row per step, 3N columns
    Eigen::VectorXd loss;
    double empirical_h2 = 0.0;
    double stderr_h2 = 0.0;
};

/// Euler-Maruyama recursion
///   psi_{k+1} = psi_k + dt A psi_k + sqrt(dt) B diag(sqrt(intensity)) xi_k
/// with unit-normal xi_k; deterministic for a fixed seed. The loss
/// series is |C psi_k|^2. Rejects steps violating dt |lambda|_max < 0.5.
Trajectory simulate(const StateSpaceModel& model, const SimConfig& config);

/// Streaming time average of the loss past burn-in with a 50-batch
/// batch-means standard error; a consistent estimator of the squared
/// H2 norm. Requires a stable observable subspace and a horizon of at
/// least ten times the slowest observable time constant.
std::pair<double, double> empirical_h2(const StateSpaceModel& model, const SimConfig& config);

/// Impulse-response energy of one input channel on the deflated model,
/// integral of |C exp(At) B e_c|^2 by Simpson quadrature of the matrix-
/// exponential propagated state. The sum over channels equals the
/// squared H2 norm.
double impulse_energy(const StateSpaceModel& model, int channel);

/// Sum of impulse_energy over every input channel.
double impulse_energy_total(const StateSpaceModel& model);

}  // namespace gridloss
