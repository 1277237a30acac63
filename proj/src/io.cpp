#include "gridloss/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gridloss {

namespace {

using nlohmann::json;

InverterParams params_from_json(const json& j, double alpha) {
    InverterParams p;
    p.alpha = alpha;
    p.k_p = j.at("kp").get<double>();
    p.k_q = j.at("kq").get<double>();
    p.tau_p = j.at("taup").get<double>();
    p.tau_q = j.at("tauq").get<double>();
    if (j.contains("cq") && j.contains("shunt_b"))
        throw std::invalid_argument("network file: params may set either cq or shunt_b, not both");
    if (j.contains("cq"))
        p.shunt_b = (j.at("cq").get<double>() - 1.0) / (2.0 * p.k_q);
    else if (j.contains("shunt_b"))
        p.shunt_b = j.at("shunt_b").get<double>();
    p.validate();
    return p;
}

}  // namespace

NetworkFile parse_network(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("network file: JSON parse error: ") + e.what());
    }

    const int n = j.at("n_nodes").get<int>();
    const double alpha = j.at("alpha").get<double>();
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("network file: alpha must lie in (0,1)");

    std::vector<Edge> edges;
    for (const auto& row : j.at("edges")) {
        if (!row.is_array() || row.size() != 3)
            throw std::invalid_argument("network file: each edge must be [i, k, b]");
        const int i = row[0].get<int>();
        const int k = row[1].get<int>();
        const double b = row[2].get<double>();
        if (i < 1 || k < 1)
            throw std::invalid_argument("network file: node indices are 1-based");
        edges.push_back({i - 1, k - 1, b, alpha * b});
    }

    Eigen::VectorXd shunt = Eigen::VectorXd::Zero(n);
    if (j.contains("shunt_b")) {
        const auto& sb = j.at("shunt_b");
        if (static_cast<int>(sb.size()) != n)
            throw std::invalid_argument("network file: shunt_b must list one value per node");
        for (int i = 0; i < n; ++i) shunt(i) = sb[i].get<double>();
    }

    NetworkFile out{NetworkGraph(n, std::move(edges), std::move(shunt)), alpha, std::nullopt};
    if (j.contains("params")) out.params = params_from_json(j.at("params"), alpha);
    return out;
}

NetworkFile load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("network file: cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_network(buf.str());
}

void save_network(const std::filesystem::path& path, const NetworkGraph& graph, double alpha,
                  const std::optional<InverterParams>& params) {
    json j;
    j["n_nodes"] = graph.n_nodes();
    j["alpha"] = alpha;
    json edges = json::array();
    for (const Edge& e : graph.edges()) edges.push_back({e.i + 1, e.k + 1, e.b});
    j["edges"] = std::move(edges);
    json shunt = json::array();
    for (int i = 0; i < graph.n_nodes(); ++i) shunt.push_back(graph.shunt_b()(i));
    j["shunt_b"] = std::move(shunt);
    if (params) {
        j["params"] = {{"kp", params->k_p},
                       {"kq", params->k_q},
                       {"taup", params->tau_p},
                       {"tauq", params->tau_q},
                       {"shunt_b", params->shunt_b}};
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("network file: cannot write " + path.string());
    out << j.dump(2) << "\n";
}

std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::string& config_echo,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_csv: cannot write " + path.string());
    out << "# " << config_echo << " version=" << kVersion << "\n";
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != columns.size()) throw std::runtime_error("write_csv: ragged row");
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
        out << "\n";
    }
}

void write_sidecar(const std::filesystem::path& csv_path, const std::string& command,
                   const std::vector<std::pair<std::string, std::string>>& entries) {
    std::filesystem::path p = csv_path;
    p += ".meta";
    std::ofstream out(p);
    if (!out) throw std::runtime_error("write_sidecar: cannot write " + p.string());
    out << "command = " << command << "\n";
    out << "version = " << kVersion << "\n";
    for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, int n_nodes,
                          const std::string& config_echo) {
    std::vector<std::string> columns;
    columns.emplace_back("t");
    for (const char* block : {"delta_", "omega_", "V_"})
        for (int i = 1; i <= n_nodes; ++i) columns.push_back(block + std::to_string(i));
    columns.emplace_back("loss");

    std::vector<std::vector<std::string>> rows;
    rows.reserve(traj.times.size());
    for (Eigen::Index k = 0; k < traj.times.size(); ++k) {
        std::vector<std::string> row;
        row.reserve(columns.size());
        row.push_back(csv_number(traj.times(k)));
        for (Eigen::Index c = 0; c < traj.states.cols(); ++c)
            row.push_back(csv_number(traj.states(k, c)));
        row.push_back(csv_number(traj.loss(k)));
        rows.push_back(std::move(row));
    }
    write_csv(path, config_echo, columns, rows);
}

void write_gamma_curve_csv(const std::filesystem::path& path, const GammaCurve& curve,
                           const std::string& config_echo) {
    if (curve.alphas.size() != curve.gammas.size() ||
        (!curve.series.empty() && curve.series.size() != curve.alphas.size()))
        throw std::invalid_argument("write_gamma_curve_csv: ragged curve");
    std::vector<std::vector<std::string>> rows;
    rows.reserve(curve.alphas.size());
    for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
        std::string series, ratio;
        if (!curve.series.empty()) {
            series = csv_number(curve.series[i]);
            if (curve.series[i] != 0.0) ratio = csv_number(curve.gammas[i] / curve.series[i]);
        }
        rows.push_back({csv_number(curve.alphas[i]), csv_number(curve.gammas[i]), series, ratio});
    }
    write_csv(path, config_echo, {"alpha", "gamma_measured", "gamma_series", "ratio"}, rows);
}

void write_model_dump(const std::filesystem::path& path, const StateSpaceModel& model) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_model_dump: cannot write " + path.string());
    const char* kind = model.kind == ModelKind::full        ? "full"
                       : model.kind == ModelKind::decoupled ? "decoupled"
                                                            : "coupled";
    out << "# state-space dump, version " << kVersion << "\n";
    out << "kind " << kind << "\n";
    out << "n_nodes " << model.n_nodes << "\n";
    out << "state_blocks delta omega V\n";
    out << "input_blocks w_omega w_V\n";
    const auto dump = [&out](const char* name, const Eigen::MatrixXd& M) {
        out << "matrix " << name << " " << M.rows() << " " << M.cols() << "\n";
        for (Eigen::Index r = 0; r < M.rows(); ++r) {
            for (Eigen::Index c = 0; c < M.cols(); ++c)
                out << (c ? " " : "") << csv_number(M(r, c));
            out << "\n";
        }
    };
    dump("A", model.A);
    dump("B", model.B);
    dump("C", model.C);
}

}  // namespace gridloss
