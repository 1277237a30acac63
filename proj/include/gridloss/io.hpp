#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gridloss/coupled.hpp"
#include "gridloss/dynamics.hpp"
#include "gridloss/sim.hpp"

namespace gridloss {

inline constexpr const char* kVersion = "0.1.0";

/// Parsed network file: the graph, its uniform ratio, and inverter
/// parameters when the file carries a params block.
struct NetworkFile {
    NetworkGraph graph;
    double alpha = 0.0;
    std::optional<InverterParams> params;
};

/// JSON network format with 1-based node indices:
///   {"n_nodes": N, "alpha": a, "edges": [[i,k,b],...],
///    "shunt_b": [...], "params": {"kp":..,"kq":..,"taup":..,"tauq":..,
///                                 "shunt_b":.. | "cq":..}}
/// shunt_b and params are optional. Conductances are alpha*b. Every
/// graph invariant is validated on load.
NetworkFile load_network(const std::filesystem::path& path);
NetworkFile parse_network(const std::string& text);
void save_network(const std::filesystem::path& path, const NetworkGraph& graph, double alpha,
                  const std::optional<InverterParams>& params = std::nullopt);

/// One CSV cell per column; empty cells stay empty. Numbers are
/// rendered with %.12g so reruns are byte-identical.
std::string csv_number(double v);

/// Writes a CSV with a leading '#' comment line (config echo + version)
/// and a header row, then the data rows.
void write_csv(const std::filesystem::path& path, const std::string& config_echo,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

/// Sidecar text file (key = value lines) describing a run.
void write_sidecar(const std::filesystem::path& csv_path, const std::string& command,
                   const std::vector<std::pair<std::string, std::string>>& entries);

/// Trajectory export: t, delta_1..N, omega_1..N, V_1..N, loss.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj, int n_nodes,
                          const std::string& config_echo);

/// Gamma-curve export: alpha, gamma_measured, gamma_series, ratio.
/// Series cells (and the ratio) stay empty where no prediction applies.
void write_gamma_curve_csv(const std::filesystem::path& path, const GammaCurve& curve,
                           const std::string& config_echo);

/// Dense text dump of the model matrices with block labels, for
/// cross-checks against external tools.
void write_model_dump(const std::filesystem::path& path, const StateSpaceModel& model);

}  // namespace gridloss
