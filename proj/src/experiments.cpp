#include "gridloss/experiments.hpp"

#include <cmath>
#include <stdexcept>

namespace gridloss {

namespace {

NetworkGraph make_topology(Topology t, int n, const std::function<double()>& b, double alpha) {
    return t == Topology::complete ? complete_graph(n, b, alpha) : path_graph(n, b, alpha);
}

std::uint64_t row_seed(std::uint64_t seed, int n) {
    // splitmix64 of (seed xor row key); decorrelates rows of a sweep.
    std::uint64_t z = seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(n + 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

AnalyzeResult run_analyze(const NetworkGraph& graph, const InverterParams& params) {
    params.validate();
    if (!is_connected(graph)) throw std::invalid_argument("analyze: graph is not connected");
    for (int i = 0; i < graph.n_nodes(); ++i)
        if (std::abs(graph.shunt_b()(i) - params.shunt_b) >
            1e-12 * std::max(1.0, std::abs(params.shunt_b)))
            throw std::invalid_argument(
                "analyze: per-node shunts must be uniform and equal to params.shunt_b");

    const StateSpaceModel model = assemble_decoupled(graph, params);
    AnalyzeResult r;
    r.spectrum = certify_stability(model);
    r.analytic = h2_norm_analytic(params, model.laplacian_spectrum);
    r.gramian = h2_norm_gramian(model);
    if (graph.n_nodes() >= 2 && graph.is_complete()) {
        r.bounds = complete_graph_bounds(params, graph.n_nodes(), graph);
        r.bounds_kind = "complete";
    } else if (graph.is_path()) {
        r.bounds = path_graph_bound(params, graph.n_nodes(), graph);
        r.bounds_kind = "path";
    }
    return r;
}

std::vector<ScalingRow> run_scaling_sweep(Topology topology, int n_lo, int n_hi,
                                          const InverterParams& params, double b_lo, double b_hi,
                                          std::uint64_t seed) {
    params.validate();
    if (n_lo < 2 || n_hi < n_lo) throw std::invalid_argument("scaling sweep: bad n range");
    if (!(b_lo > 0.0) || !(b_hi >= b_lo))
        throw std::invalid_argument("scaling sweep: need 0 < b_lo <= b_hi");

    std::vector<ScalingRow> rows;
    rows.reserve(n_hi - n_lo + 1);
    for (int n = n_lo; n <= n_hi; ++n) {
        const auto gen = (b_lo == b_hi) ? constant_susceptance(b_lo)
                                        : uniform_susceptance(b_lo, b_hi, row_seed(seed, n));
        const NetworkGraph graph = make_topology(topology, n, gen, params.alpha);
        const Eigen::MatrixXd L = build_laplacian(graph, LaplacianKind::susceptance).matrix;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);

        ScalingRow row;
        row.n = n;
        row.h2_exact = h2_norm_analytic(params, es.eigenvalues()).total;
        if (topology == Topology::complete) {
            const BoundsReport b = complete_graph_bounds(params, n, graph);
            row.upper = b.upper;
            row.lower = b.lower;
            row.asymptote = complete_graph_asymptote(params, n);
        } else {
            row.upper = path_graph_bound(params, n, graph).upper;
        }
        rows.push_back(row);
    }
    return rows;
}

namespace {

TransientSeries transient_for(const NetworkGraph& graph, const TransientConfig& c) {
    const StateSpaceModel model = assemble_decoupled(graph, c.params);

    Eigen::VectorXd psi0 = Eigen::VectorXd::Zero(model.state_size());
    psi0(0) = c.delta_kick;
    psi0(2 * c.n) = c.v_kick;

    SimConfig sim;
    sim.dt = c.dt;
    sim.horizon = c.horizon;
    sim.burn_in = 0.0;
    sim.seed = c.seed;
    sim.initial_state = psi0;
    if (c.noise > 0.0)
        sim.noise_intensity = Eigen::VectorXd::Constant(model.input_size(), c.noise);
    else
        sim.noise_intensity = Eigen::VectorXd::Zero(model.input_size());

    TransientSeries out;
    out.trajectory = simulate(model, sim);

    const Eigen::VectorXd& loss = out.trajectory.loss;
    const double threshold = 0.05 * loss(0);
    Eigen::Index last = 0;
    for (Eigen::Index k = 0; k < loss.size(); ++k)
        if (loss(k) > threshold) last = k;
    out.envelope_time_5pct = out.trajectory.times(last);

    double cum = 0.0;
    for (Eigen::Index k = 0; k + 1 < loss.size(); ++k) cum += 0.5 * (loss(k) + loss(k + 1)) * c.dt;
    out.cumulative_loss = cum;
    return out;
}

}  // namespace

TransientResult run_transient(const TransientConfig& config) {
    config.params.validate();
    if (config.n < 2) throw std::invalid_argument("transient: n must be >= 2");
    if (!(config.b > 0.0)) throw std::invalid_argument("transient: b must be > 0");
    const auto b = constant_susceptance(config.b);
    TransientResult r;
    r.complete = transient_for(complete_graph(config.n, b, config.params.alpha), config);
    r.line = transient_for(path_graph(config.n, b, config.params.alpha), config);
    return r;
}

std::vector<AlphaRow> run_alpha_sweep(int n, const InverterParams& params,
                                      const std::vector<double>& alphas, double b) {
    params.validate();
    if (n < 2) throw std::invalid_argument("alpha sweep: n must be >= 2");
    if (!(b > 0.0)) throw std::invalid_argument("alpha sweep: b must be > 0");

    std::vector<AlphaRow> rows;
    rows.reserve(alphas.size());
    for (double alpha : alphas) {
        AlphaRow row;
        row.alpha = alpha;
        const NetworkGraph complete = complete_graph(n, b, alpha > 0 ? alpha : 0.5);
        const NetworkGraph line = path_graph(n, b, alpha > 0 ? alpha : 0.5);
        try {
            row.gamma_complete = gamma(complete, params, alpha);
        } catch (const std::runtime_error&) {
            // coupled model unstable at this alpha; leave the cell empty
        }
        try {
            row.gamma_line = gamma(line, params, alpha);
        } catch (const std::runtime_error&) {
        }
        try {
            row.gamma_series = gamma_series_complete(params, alpha);
        } catch (const std::invalid_argument&) {
            // series does not converge at this alpha
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw std::invalid_argument("linspace: count must be >= 1");
    std::vector<double> v;
    v.reserve(count);
    if (count == 1) {
        v.push_back(lo);
        return v;
    }
    for (int i = 0; i < count; ++i)
        v.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    return v;
}

}  // namespace gridloss
