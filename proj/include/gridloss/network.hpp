#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace gridloss {

/// One network line between nodes i and k (0-based, i < k) with
/// susceptance b > 0 and conductance g >= 0, both in p.u.
struct Edge {
    int i = 0;
    int k = 0;
    double b = 0.0;
    double g = 0.0;
};

/// Immutable weighted network graph of a Kron-reduced inverter grid.
///
/// Nodes are inverter buses; edges carry line admittance y = g - jb.
/// Shunt susceptances are stored per node (shunt conductances are fixed
/// to zero: shunts are purely inductive). External file indices are
/// 1-based, in-memory indices are 0-based.
class NetworkGraph {
  public:
    NetworkGraph(int n_nodes, std::vector<Edge> edges, Eigen::VectorXd shunt_b);

    /// Convenience: all shunts zero.
    NetworkGraph(int n_nodes, std::vector<Edge> edges);

    int n_nodes() const { return n_nodes_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Eigen::VectorXd& shunt_b() const { return shunt_b_; }

    /// The common ratio alpha = g/b if every edge has the same one
    /// (within rel_tol), otherwise nullopt.
    std::optional<double> uniform_alpha(double rel_tol = 1e-12) const;

    bool is_complete() const;
    /// True if the edges form a simple chain (after relabeling).
    bool is_path() const;

  private:
    int n_nodes_;
    std::vector<Edge> edges_;
    Eigen::VectorXd shunt_b_;
};

enum class LaplacianKind { susceptance, conductance };

/// Weighted graph Laplacian of either the susceptance (L_B) or the
/// conductance (L_G) subgraph. Shunts are not part of the Laplacian.
struct WeightedLaplacian {
    Eigen::MatrixXd matrix;
    LaplacianKind kind;
};

WeightedLaplacian build_laplacian(const NetworkGraph& graph, LaplacianKind kind);

/// Susceptance generators for the topology builders.
std::function<double()> constant_susceptance(double b);
std::function<double()> uniform_susceptance(double lo, double hi, std::uint64_t seed);

/// Complete graph on n nodes; every pair is connected, g = alpha * b.
NetworkGraph complete_graph(int n, const std::function<double()>& susceptance, double alpha);
NetworkGraph complete_graph(int n, double b, double alpha);

/// Chain 1-2-...-n with n-1 edges, g = alpha * b.
NetworkGraph path_graph(int n, const std::function<double()>& susceptance, double alpha);
NetworkGraph path_graph(int n, double b, double alpha);

/// Erdos-Renyi draw made connected by stitching components together.
/// Deterministic for a fixed seed.
NetworkGraph random_connected_graph(int n, double edge_prob, double b_lo, double b_hi,
                                    double alpha, std::uint64_t seed);

/// Connectivity test: lambda_2(L_B) > 1e-9 * lambda_max. A single node
/// counts as connected.
bool is_connected(const NetworkGraph& graph);

/// Complex bus admittance matrix Y = L_G - j(L_B + diag(shunt_b)).
Eigen::MatrixXcd admittance_matrix(const NetworkGraph& graph);

/// Kron reduction: eliminate all nodes not in `boundary` through the
/// Schur complement of the interior admittance block and reinterpret
/// the result as a NetworkGraph on the boundary nodes.
///
/// Rejects reductions that produce negative conductances or complex
/// shunt row sums with a nonzero real part, since those cannot be
/// represented as a valid graph.
NetworkGraph kron_reduce(const Eigen::MatrixXcd& admittance, const std::vector<int>& boundary);

/// Exact nonlinear power injections (P, Q) at every node for absolute
/// phase angles delta (rad) and voltage magnitudes V (p.u.).
std::pair<Eigen::VectorXd, Eigen::VectorXd> power_injections(const NetworkGraph& graph,
                                                             const Eigen::VectorXd& delta,
                                                             const Eigen::VectorXd& V);

/// Linearized injections around the flat operating point (delta_ik = 0,
/// V = 1): dP = L_B d_delta - L_G d_V, dQ = (L_B + 2 diag(shunt)) d_V + L_G d_delta.
std::pair<Eigen::VectorXd, Eigen::VectorXd> linearized_injections(const NetworkGraph& graph,
                                                                  const Eigen::VectorXd& d_delta,
                                                                  const Eigen::VectorXd& d_V);

}  // namespace gridloss
