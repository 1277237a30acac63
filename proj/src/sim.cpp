#include "gridloss/sim.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "gridloss/h2.hpp"
#include "gridloss/spectral.hpp"

namespace gridloss {

namespace {

constexpr int kBatchCount = 50;

struct StepSetup {
    Eigen::VectorXd sqrt_intensity;  ///< per-channel amplitude scale
    long steps = 0;
};

StepSetup prepare(const StateSpaceModel& model, const SimConfig& config) {
    if (!(config.dt > 0.0)) throw std::invalid_argument("sim: dt must be > 0");
    if (!(config.horizon > 0.0)) throw std::invalid_argument("sim: horizon must be > 0");
    if (!(config.burn_in >= 0.0) || !(config.burn_in < 1.0))
        throw std::invalid_argument("sim: burn_in must lie in [0,1)");

    double max_abs = 0.0;
    for (const auto& ev : numeric_spectrum(model)) max_abs = std::max(max_abs, std::abs(ev));
    if (config.dt * max_abs >= 0.5)
        throw std::invalid_argument("sim: dt violates the explicit step guard dt*|lambda| < 0.5");

    StepSetup s;
    const int m = model.input_size();
    if (config.noise_intensity.size() == 0) {
        s.sqrt_intensity = Eigen::VectorXd::Ones(m);
    } else if (config.noise_intensity.size() == m) {
        if (config.noise_intensity.minCoeff() < 0.0)
            throw std::invalid_argument("sim: noise intensity must be >= 0");
        s.sqrt_intensity = config.noise_intensity.cwiseSqrt();
    } else {
        throw std::invalid_argument("sim: noise intensity must have one entry per input channel");
    }
    s.steps = std::lround(config.horizon / config.dt);
    if (s.steps < 1) throw std::invalid_argument("sim: horizon shorter than one step");
    return s;
}

Eigen::VectorXd initial_state(const StateSpaceModel& model, const SimConfig& config) {
    if (!config.initial_state) return Eigen::VectorXd::Zero(model.state_size());
    if (config.initial_state->size() != model.state_size())
        throw std::invalid_argument("sim: initial state dimension mismatch");
    return *config.initial_state;
}

/// Mean of batch means plus the batch-means standard error over the
/// samples past burn-in. Trailing samples that do not fill a batch are
/// dropped so all batches weigh equally.
std::pair<double, double> batch_means(const Eigen::VectorXd& samples) {
    const long n = samples.size();
    const long batch = n / kBatchCount;
    if (batch < 1) throw std::invalid_argument("sim: too few post-burn-in samples for 50 batches");
    Eigen::VectorXd means(kBatchCount);
    for (int b = 0; b < kBatchCount; ++b)
        means(b) = samples.segment(static_cast<long>(b) * batch, batch).mean();
    const double mean = means.mean();
    const double var = (means.array() - mean).square().sum() / (kBatchCount - 1);
    return {mean, std::sqrt(var / kBatchCount)};
}

}  // namespace

Trajectory simulate(const StateSpaceModel& model, const SimConfig& config) {
    const StepSetup setup = prepare(model, config);
    const long steps = setup.steps;
    const int s = model.state_size();
    const int m = model.input_size();

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sqrt_dt = std::sqrt(config.dt);

    Trajectory traj;
    traj.times.resize(steps + 1);
    traj.states.resize(steps + 1, s);
    traj.loss.resize(steps + 1);

    Eigen::VectorXd psi = initial_state(model, config);
    Eigen::VectorXd xi(m);
    for (long k = 0; k <= steps; ++k) {
        traj.times(k) = static_cast<double>(k) * config.dt;
        traj.states.row(k) = psi.transpose();
        traj.loss(k) = (model.C * psi).squaredNorm();
        if (k == steps) break;
        for (int c = 0; c < m; ++c) xi(c) = normal(rng) * setup.sqrt_intensity(c);
        psi += config.dt * (model.A * psi) + sqrt_dt * (model.B * xi);
    }

    const long first = std::lround(config.burn_in * static_cast<double>(steps));
    const long post = steps + 1 - first;
    if (post >= kBatchCount) {
        const auto [mean, err] = batch_means(traj.loss.segment(first, post));
        traj.empirical_h2 = mean;
        traj.stderr_h2 = err;
    } else {
        traj.empirical_h2 = std::numeric_limits<double>::quiet_NaN();
        traj.stderr_h2 = std::numeric_limits<double>::quiet_NaN();
    }
    return traj;
}

std::pair<double, double> empirical_h2(const StateSpaceModel& model, const SimConfig& config) {
    if (!(config.burn_in > 0.0)) throw std::invalid_argument("empirical_h2: burn_in must be > 0");
    const SpectrumReport cert = certify_stability(model);
    if (!cert.stable_observable)
        throw std::invalid_argument("empirical_h2: observable subspace is not stable");
    const double slowest = 1.0 / std::abs(cert.spectral_abscissa_observable);
    if (config.horizon < 10.0 * slowest)
        throw std::invalid_argument(
            "empirical_h2: horizon must cover 10x the slowest observable time constant");

    const StepSetup setup = prepare(model, config);
    const long steps = setup.steps;
    const int m = model.input_size();

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double sqrt_dt = std::sqrt(config.dt);

    const long first = std::lround(config.burn_in * static_cast<double>(steps));
    Eigen::VectorXd post_loss(steps + 1 - first);

    Eigen::VectorXd psi = initial_state(model, config);
    Eigen::VectorXd xi(m);
    for (long k = 0; k <= steps; ++k) {
        if (k >= first) post_loss(k - first) = (model.C * psi).squaredNorm();
        if (k == steps) break;
        for (int c = 0; c < m; ++c) xi(c) = normal(rng) * setup.sqrt_intensity(c);
        psi += config.dt * (model.A * psi) + sqrt_dt * (model.B * xi);
    }
    return batch_means(post_loss);
}

namespace {

/// Simpson quadrature of |C exp(At) B e_c|^2 for every channel at once;
/// the states are stepped by a fixed exp(A h) and the integrand decays
/// like exp(2*abscissa*t).
Eigen::VectorXd impulse_energies(const DeflatedModel& d) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(d.A, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("impulse_energy: eigensolve failed");
    double abscissa = -std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        abscissa = std::max(abscissa, es.eigenvalues()(i).real());
        max_abs = std::max(max_abs, std::abs(es.eigenvalues()(i)));
    }
    if (!(abscissa < 0.0))
        throw std::invalid_argument("impulse_energy: observable subspace is not stable");

    // Horizon from the slowest decay, step from the fastest mode: at
    // least 20 samples per 1/|lambda|_max keeps the Simpson error well
    // below 1e-8 relative.
    const double T = 20.0 / std::abs(abscissa);
    const double min_points = std::max(4000.0, std::min(20.0 * T * max_abs, 2e6));
    const long n = std::lround(std::ceil(min_points / 2.0)) * 2;
    const double h = T / static_cast<double>(n);
    const Eigen::MatrixXd E = (d.A * h).exp();

    Eigen::MatrixXd X = d.B;
    Eigen::VectorXd sum = (d.C * X).colwise().squaredNorm().transpose();  // f(0), weight 1
    for (long k = 1; k < n; ++k) {
        X = E * X;
        sum += ((k % 2 == 1) ? 4.0 : 2.0) * (d.C * X).colwise().squaredNorm().transpose();
    }
    X = E * X;
    sum += (d.C * X).colwise().squaredNorm().transpose();
    return sum * h / 3.0;
}

}  // namespace

double impulse_energy(const StateSpaceModel& model, int channel) {
    if (channel < 0 || channel >= model.input_size())
        throw std::invalid_argument("impulse_energy: channel out of range");
    return impulse_energies(deflate_zero_mode(model))(channel);
}

double impulse_energy_total(const StateSpaceModel& model) {
    return impulse_energies(deflate_zero_mode(model)).sum();
}

}  // namespace gridloss
