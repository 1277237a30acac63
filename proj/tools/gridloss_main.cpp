// Command-line front end: reproduces the size sweeps, transient
// comparisons and alpha sweeps as machine-readable CSV tables, plus a
// one-off analysis command for network files.

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gridloss/experiments.hpp"
#include "gridloss/io.hpp"

namespace {

using namespace gridloss;
using nlohmann::json;

struct ParamFlags {
    double kp = 1.0, kq = 1.0, taup = 1.0, tauq = 1.0;
    double alpha = 0.2;
    double shunt_b = 0.0;
    double cq = 1.0;
    bool cq_set = false;
    bool shunt_set = false;

    InverterParams build() const {
        if (cq_set && shunt_set)
            throw std::invalid_argument("--cq and --shunt-b are mutually exclusive");
        if (cq_set) return InverterParams::with_c_q(kp, kq, taup, tauq, cq, alpha);
        InverterParams p{kp, kq, taup, tauq, shunt_b, alpha};
        p.validate();
        return p;
    }
};

void add_param_flags(CLI::App* cmd, ParamFlags& f) {
    cmd->add_option("--kp", f.kp, "frequency droop gain");
    cmd->add_option("--kq", f.kq, "voltage droop gain");
    cmd->add_option("--taup", f.taup, "active-power filter time constant [s]");
    cmd->add_option("--tauq", f.tauq, "reactive-power filter time constant [s]");
    cmd->add_option("--alpha", f.alpha, "resistance-to-reactance ratio g/b");
    auto* cq = cmd->add_option("--cq", f.cq, "voltage-loop constant c_Q (sets the shunt)");
    auto* sb = cmd->add_option("--shunt-b", f.shunt_b, "uniform shunt susceptance");
    cq->excludes(sb);
    cmd->parse_complete_callback([&f, cq, sb] {
        f.cq_set = cq->count() > 0;
        f.shunt_set = sb->count() > 0;
    });
}

std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t flag_value) {
    if (seed_opt->count() > 0) return flag_value;
    if (const char* env = std::getenv("GRIDLOSS_SEED")) return std::strtoull(env, nullptr, 10);
    return flag_value;
}

std::pair<int, int> parse_n_range(const std::string& s) {
    int lo = 0, hi = 0;
    char colon = 0;
    std::istringstream in(s);
    if (!(in >> lo >> colon >> hi) || colon != ':')
        throw std::invalid_argument("--n-range must be LO:HI");
    return {lo, hi};
}

std::vector<double> parse_alpha_range(const std::string& s) {
    double lo = 0, hi = 0;
    int count = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    if (!(in >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':')
        throw std::invalid_argument("--alpha-range must be LO:HI:COUNT");
    return linspace(lo, hi, count);
}

json report_to_json(const H2Report& r) {
    json j{{"method", r.method},
           {"total", r.total},
           {"phase_part", r.phase_part},
           {"voltage_part", r.voltage_part}};
    if (!r.per_mode.empty()) {
        json modes = json::array();
        for (const auto& [lam, contrib] : r.per_mode)
            modes.push_back({{"lambda_b", lam}, {"contribution", contrib}});
        j["per_mode"] = std::move(modes);
    }
    return j;
}

int cmd_analyze(const std::string& network_path, const ParamFlags& flags, bool params_from_flags,
                const std::string& out_path, const std::string& dump_path) {
    NetworkFile file = load_network(network_path);
    InverterParams params{};
    if (file.params && !params_from_flags) {
        params = *file.params;
    } else {
        ParamFlags f = flags;
        f.alpha = file.alpha;
        // Adopt the file's uniform shunt when the flags did not set one.
        if (!f.cq_set && !f.shunt_set && file.graph.n_nodes() > 0) {
            const Eigen::VectorXd& sb = file.graph.shunt_b();
            if ((sb.array() == sb(0)).all()) {
                f.shunt_b = sb(0);
                f.shunt_set = true;
            }
        }
        params = f.build();
    }

    const AnalyzeResult r = run_analyze(file.graph, params);
    if (!dump_path.empty()) write_model_dump(dump_path, assemble_decoupled(file.graph, params));

    json out;
    out["version"] = kVersion;
    out["network"] = {{"file", network_path},
                      {"n_nodes", file.graph.n_nodes()},
                      {"n_edges", file.graph.edges().size()},
                      {"alpha", params.alpha}};
    out["params"] = {{"kp", params.k_p},     {"kq", params.k_q},   {"taup", params.tau_p},
                     {"tauq", params.tau_q}, {"cq", params.c_q()}, {"shunt_b", params.shunt_b}};
    json lap = json::array();
    for (Eigen::Index i = 0; i < r.spectrum.laplacian_eigenvalues.size(); ++i)
        lap.push_back(r.spectrum.laplacian_eigenvalues(i));
    json sys = json::array();
    for (const auto& ev : r.spectrum.system_eigenvalues) sys.push_back({ev.real(), ev.imag()});
    out["spectrum"] = {{"laplacian_eigenvalues", std::move(lap)},
                       {"system_eigenvalues", std::move(sys)},
                       {"stable_observable", r.spectrum.stable_observable},
                       {"spectral_abscissa_observable", r.spectrum.spectral_abscissa_observable},
                       {"degenerate_zero", r.spectrum.degenerate_zero}};
    out["h2"] = {{"analytic", report_to_json(r.analytic)}, {"gramian", report_to_json(r.gramian)}};
    if (r.bounds) {
        out["bounds"] = {{"kind", r.bounds_kind},
                         {"lower", r.bounds->lower},
                         {"upper", r.bounds->upper},
                         {"mean_susceptance", r.bounds->mean_susceptance},
                         {"min_susceptance", r.bounds->min_susceptance},
                         {"equality_expected", r.bounds->equality_expected}};
    }

    if (out_path.empty()) {
        std::cout << out.dump(2) << "\n";
    } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        f << out.dump(2) << "\n";
    }
    return 0;
}

int cmd_scaling_sweep(Topology topology, std::pair<int, int> n_range, const InverterParams& params,
                      double b_lo, double b_hi, std::uint64_t seed, const std::string& out) {
    const auto rows =
        run_scaling_sweep(topology, n_range.first, n_range.second, params, b_lo, b_hi, seed);

    const std::string topo_name = topology == Topology::complete ? "complete" : "line";
    std::ostringstream echo;
    echo << "cmd=scaling-sweep topology=" << topo_name << " n=" << n_range.first << ":"
         << n_range.second << " kp=" << params.k_p << " kq=" << params.k_q
         << " taup=" << params.tau_p << " tauq=" << params.tau_q << " cq=" << params.c_q()
         << " alpha=" << params.alpha << " b=" << b_lo << ":" << b_hi << " seed=" << seed;

    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const ScalingRow& r : rows) {
        cells.push_back({std::to_string(r.n), csv_number(r.h2_exact), csv_number(r.upper),
                         r.lower ? csv_number(*r.lower) : "",
                         r.asymptote ? csv_number(*r.asymptote) : ""});
    }
    write_csv(out, echo.str(), {"N", "h2_exact", "h2_bound_upper", "h2_bound_lower", "h2_asymptote"},
              cells);
    write_sidecar(out, "scaling-sweep",
                  {{"topology", topo_name},
                   {"n_range", std::to_string(n_range.first) + ":" + std::to_string(n_range.second)},
                   {"kp", csv_number(params.k_p)},
                   {"kq", csv_number(params.k_q)},
                   {"taup", csv_number(params.tau_p)},
                   {"tauq", csv_number(params.tau_q)},
                   {"cq", csv_number(params.c_q())},
                   {"alpha", csv_number(params.alpha)},
                   {"b_range", csv_number(b_lo) + ":" + csv_number(b_hi)},
                   {"seed", std::to_string(seed)}});
    return 0;
}

int cmd_transient(const TransientConfig& config, const std::string& out) {
    const TransientResult r = run_transient(config);

    std::ostringstream echo;
    echo << "cmd=transient n=" << config.n << " kp=" << config.params.k_p
         << " kq=" << config.params.k_q << " taup=" << config.params.tau_p
         << " tauq=" << config.params.tau_q << " cq=" << config.params.c_q()
         << " alpha=" << config.params.alpha << " b=" << config.b << " dt=" << config.dt
         << " horizon=" << config.horizon << " delta_kick=" << config.delta_kick
         << " v_kick=" << config.v_kick << " noise=" << config.noise << " seed=" << config.seed;

    std::vector<std::vector<std::string>> cells;
    const Eigen::VectorXd& lc = r.complete.trajectory.loss;
    const Eigen::VectorXd& ll = r.line.trajectory.loss;
    double cum_c = 0.0, cum_l = 0.0;
    for (Eigen::Index k = 0; k < lc.size(); ++k) {
        if (k > 0) {
            cum_c += 0.5 * (lc(k - 1) + lc(k)) * config.dt;
            cum_l += 0.5 * (ll(k - 1) + ll(k)) * config.dt;
        }
        cells.push_back({csv_number(r.complete.trajectory.times(k)), csv_number(lc(k)),
                         csv_number(cum_c), csv_number(ll(k)), csv_number(cum_l)});
    }
    write_csv(out, echo.str(),
              {"t", "loss_complete", "cumloss_complete", "loss_line", "cumloss_line"}, cells);

    // Full per-topology state trajectories next to the comparison table.
    std::filesystem::path base(out);
    std::filesystem::path stem = base.parent_path() / base.stem();
    write_trajectory_csv(stem.string() + "_complete.csv", r.complete.trajectory, config.n,
                         echo.str() + " topology=complete");
    write_trajectory_csv(stem.string() + "_line.csv", r.line.trajectory, config.n,
                         echo.str() + " topology=line");

    write_sidecar(out, "transient",
                  {{"n", std::to_string(config.n)},
                   {"envelope_time_5pct_complete", csv_number(r.complete.envelope_time_5pct)},
                   {"envelope_time_5pct_line", csv_number(r.line.envelope_time_5pct)},
                   {"cumulative_loss_complete", csv_number(r.complete.cumulative_loss)},
                   {"cumulative_loss_line", csv_number(r.line.cumulative_loss)},
                   {"seed", std::to_string(config.seed)}});
    return 0;
}

int cmd_alpha_sweep(int n, const InverterParams& params, const std::vector<double>& alphas,
                    double b, const std::string& out) {
    const auto rows = run_alpha_sweep(n, params, alphas, b);

    std::ostringstream echo;
    echo << "cmd=alpha-sweep n=" << n << " kp=" << params.k_p << " kq=" << params.k_q
         << " taup=" << params.tau_p << " tauq=" << params.tau_q << " cq=" << params.c_q()
         << " b=" << b << " alphas=" << alphas.front() << ":" << alphas.back() << ":"
         << alphas.size();

    std::vector<std::vector<std::string>> cells;
    int skipped = 0;
    for (const AlphaRow& r : rows) {
        if (!r.gamma_complete && !r.gamma_line) ++skipped;
        cells.push_back({csv_number(r.alpha),
                         r.gamma_complete ? csv_number(*r.gamma_complete) : "",
                         r.gamma_line ? csv_number(*r.gamma_line) : "",
                         r.gamma_series ? csv_number(*r.gamma_series) : ""});
    }
    write_csv(out, echo.str(), {"alpha", "gamma_complete", "gamma_line", "gamma_series"}, cells);
    write_sidecar(out, "alpha-sweep",
                  {{"n", std::to_string(n)},
                   {"b", csv_number(b)},
                   {"alphas", std::to_string(alphas.size())},
                   {"rows_unstable", std::to_string(skipped)}});
    if (skipped > 0)
        std::cerr << "alpha-sweep: " << skipped << " row(s) outside the coupled stability margin\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transient power-loss analysis for droop-controlled inverter networks"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "spectrum, H2 norms and bounds for a network file");
    std::string network_path, analyze_out, analyze_dump;
    ParamFlags analyze_flags;
    analyze->add_option("network", network_path, "network JSON file")->required();
    analyze->add_option("--out", analyze_out, "output JSON path (stdout when omitted)");
    analyze->add_option("--dump-model", analyze_dump, "write the assembled state-space matrices");
    add_param_flags(analyze, analyze_flags);
    bool params_from_flags = false;
    analyze->add_flag("--params-from-flags", params_from_flags,
                      "ignore the file's params block and use the flags");

    // scaling-sweep
    auto* sweep = app.add_subcommand("scaling-sweep", "H2 norm and bounds versus network size");
    std::string sweep_topology = "complete", sweep_nrange = "2:100", sweep_out;
    double sweep_blo = 0.5, sweep_bhi = 3.25;
    std::uint64_t sweep_seed = 1;
    ParamFlags sweep_flags;
    sweep_flags.tauq = 1.0;
    bool sweep_defaults = false;
    sweep->add_option("--topology", sweep_topology, "complete or line")
        ->check(CLI::IsMember({"complete", "line"}));
    sweep->add_option("--n-range", sweep_nrange, "node counts LO:HI (default 2:100)");
    sweep->add_option("--b-min", sweep_blo, "susceptance range lower end");
    sweep->add_option("--b-max", sweep_bhi, "susceptance range upper end");
    auto* sweep_seed_opt = sweep->add_option("--seed", sweep_seed, "susceptance draw seed");
    sweep->add_option("--out", sweep_out, "output CSV path");
    sweep->add_flag("--defaults", sweep_defaults, "run with the built-in defaults");
    add_param_flags(sweep, sweep_flags);

    // transient
    auto* transient = app.add_subcommand("transient",
                                         "matched complete/line relaxation from one disturbance");
    TransientConfig tconfig;
    std::string transient_out;
    ParamFlags transient_flags;
    transient_flags.taup = 0.5;
    transient_flags.tauq = 0.5;
    std::uint64_t transient_seed = 0;
    bool transient_defaults = false;
    transient->add_option("--n", tconfig.n, "number of inverters (default 5)");
    transient->add_option("--b", tconfig.b, "uniform line susceptance");
    transient->add_option("--dt", tconfig.dt, "time step [s]");
    transient->add_option("--horizon", tconfig.horizon, "simulated time [s]");
    transient->add_option("--delta-kick", tconfig.delta_kick, "initial phase deviation at node 1");
    transient->add_option("--v-kick", tconfig.v_kick, "initial voltage deviation at node 1");
    transient->add_option("--noise", tconfig.noise, "white-noise intensity (default 0)");
    auto* transient_seed_opt = transient->add_option("--seed", transient_seed, "noise seed");
    transient->add_option("--out", transient_out, "output CSV path");
    transient->add_flag("--defaults", transient_defaults, "run with the built-in defaults");
    add_param_flags(transient, transient_flags);

    // alpha-sweep
    auto* alpha = app.add_subcommand("alpha-sweep",
                                     "coupling error gamma versus the resistance ratio");
    int alpha_n = 50;
    double alpha_b = 5.0;
    std::string alpha_range = "0.01:0.5:25", alpha_out;
    ParamFlags alpha_flags;
    alpha_flags.kq = 2.0;
    alpha_flags.taup = 0.5;
    alpha_flags.tauq = 0.5;
    bool alpha_defaults = false;
    alpha->add_option("--n", alpha_n, "number of inverters (default 50)");
    alpha->add_option("--b", alpha_b, "uniform line susceptance (default 5 = 1/0.2)");
    alpha->add_option("--alpha-range", alpha_range, "ratios LO:HI:COUNT");
    alpha->add_option("--out", alpha_out, "output CSV path");
    alpha->add_flag("--defaults", alpha_defaults, "run with the built-in defaults");
    add_param_flags(alpha, alpha_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // flag misuse is a validation error
    }

    try {
        if (analyze->parsed())
            return cmd_analyze(network_path, analyze_flags,
                               params_from_flags || analyze_flags.cq_set || analyze_flags.shunt_set,
                               analyze_out, analyze_dump);
        if (sweep->parsed()) {
            const Topology topo =
                sweep_topology == "complete" ? Topology::complete : Topology::line;
            if (sweep_out.empty()) sweep_out = "scaling_" + sweep_topology + ".csv";
            return cmd_scaling_sweep(topo, parse_n_range(sweep_nrange), sweep_flags.build(),
                                     sweep_blo, sweep_bhi, resolve_seed(sweep_seed_opt, sweep_seed),
                                     sweep_out);
        }
        if (transient->parsed()) {
            tconfig.params = transient_flags.build();
            tconfig.seed = resolve_seed(transient_seed_opt, transient_seed);
            if (transient_out.empty()) transient_out = "transient.csv";
            return cmd_transient(tconfig, transient_out);
        }
        if (alpha->parsed()) {
            if (alpha_out.empty()) alpha_out = "alpha_sweep.csv";
            return cmd_alpha_sweep(alpha_n, alpha_flags.build(), parse_alpha_range(alpha_range),
                                   alpha_b, alpha_out);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
