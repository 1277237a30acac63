#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridloss/coupled.hpp"
#include "gridloss/h2.hpp"
#include "gridloss/sim.hpp"
#include "gridloss/spectral.hpp"

namespace gridloss {

enum class Topology { complete, line };

/// Spectrum, H2 and (when the topology matches) bound reports for one
/// network. Requires the graph's shunts to be uniform and to agree
/// with params.shunt_b, since the uniform models assume a common c_Q.
struct AnalyzeResult {
    SpectrumReport spectrum;
    H2Report analytic;
    H2Report gramian;
    std::optional<BoundsReport> bounds;
    std::string bounds_kind;  ///< "complete", "path" or ""
};
AnalyzeResult run_analyze(const NetworkGraph& graph, const InverterParams& params);

/// One row of the size sweep. lower/asymptote are only present for the
/// complete topology.
struct ScalingRow {
    int n = 0;
    double h2_exact = 0.0;
    double upper = 0.0;
    std::optional<double> lower;
    std::optional<double> asymptote;
};

/// H2 norms and bounds over n in [n_lo, n_hi] with per-row susceptances
/// drawn uniformly from [b_lo, b_hi] (a constant when b_lo == b_hi).
/// Each row derives its own generator from (seed, n), so results do not
/// depend on evaluation order.
std::vector<ScalingRow> run_scaling_sweep(Topology topology, int n_lo, int n_hi,
                                          const InverterParams& params, double b_lo, double b_hi,
                                          std::uint64_t seed);

struct TransientConfig {
    int n = 5;
    InverterParams params{1.0, 1.0, 0.5, 0.5, 0.0, 0.2};
    double b = 1.0;           ///< uniform line susceptance for both topologies
    double dt = 1e-3;
    double horizon = 12.0;
    double delta_kick = 0.2;  ///< initial phase deviation at node 1 [rad]
    double v_kick = 0.05;     ///< initial voltage deviation at node 1 [p.u.]
    double noise = 0.0;       ///< white-noise intensity (0 = pure relaxation)
    std::uint64_t seed = 0;
};

/// One topology's transient: the trajectory, the time after which the
/// loss stays below 5% of its initial value, and the time-integrated
/// loss (trapezoid).
struct TransientSeries {
    Trajectory trajectory;
    double envelope_time_5pct = 0.0;
    double cumulative_loss = 0.0;
};

/// Matched complete/line relaxation from the same initial disturbance.
struct TransientResult {
    TransientSeries complete;
    TransientSeries line;
};
TransientResult run_transient(const TransientConfig& config);

/// One row of the alpha sweep; gamma entries are empty when the coupled
/// model is unstable at that alpha, series when it does not converge.
struct AlphaRow {
    double alpha = 0.0;
    std::optional<double> gamma_complete;
    std::optional<double> gamma_line;
    std::optional<double> gamma_series;
};

/// Relative coupling error for both topologies at uniform susceptance b
/// over the given ratios, plus the complete-graph series prediction.
std::vector<AlphaRow> run_alpha_sweep(int n, const InverterParams& params,
                                      const std::vector<double>& alphas, double b);

/// Evenly spaced values lo..hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);

}  // namespace gridloss
