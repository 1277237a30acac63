#include "gridloss/network.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace gridloss {

namespace {

constexpr double kConnectivityRelTol = 1e-9;

void validate(int n_nodes, const std::vector<Edge>& edges, const Eigen::VectorXd& shunt_b) {
    if (n_nodes < 1) throw std::invalid_argument("NetworkGraph: n_nodes must be positive");
    if (shunt_b.size() != n_nodes)
        throw std::invalid_argument("NetworkGraph: shunt_b size mismatch");
    std::set<std::pair<int, int>> seen;
    for (const Edge& e : edges) {
        if (e.i < 0 || e.k < 0 || e.i >= n_nodes || e.k >= n_nodes)
            throw std::invalid_argument("NetworkGraph: edge endpoint out of range");
        if (e.i == e.k) throw std::invalid_argument("NetworkGraph: self-loop");
        if (e.i > e.k) throw std::invalid_argument("NetworkGraph: edges must satisfy i < k");
        if (!seen.insert({e.i, e.k}).second)
            throw std::invalid_argument("NetworkGraph: duplicate edge (" +
                                        std::to_string(e.i + 1) + "," + std::to_string(e.k + 1) +
                                        ")");
        if (!(e.b > 0.0)) throw std::invalid_argument("NetworkGraph: susceptance must be > 0");
        if (!(e.g >= 0.0)) throw std::invalid_argument("NetworkGraph: conductance must be >= 0");
    }
}

}  // namespace

NetworkGraph::NetworkGraph(int n_nodes, std::vector<Edge> edges, Eigen::VectorXd shunt_b)
    : n_nodes_(n_nodes), edges_(std::move(edges)), shunt_b_(std::move(shunt_b)) {
    validate(n_nodes_, edges_, shunt_b_);
}

NetworkGraph::NetworkGraph(int n_nodes, std::vector<Edge> edges)
    : NetworkGraph(n_nodes, std::move(edges), Eigen::VectorXd::Zero(n_nodes)) {}

std::optional<double> NetworkGraph::uniform_alpha(double rel_tol) const {
    if (edges_.empty()) return std::nullopt;
    const double alpha = edges_.front().g / edges_.front().b;
    for (const Edge& e : edges_) {
        if (std::abs(e.g / e.b - alpha) > rel_tol * std::max(1.0, std::abs(alpha)))
            return std::nullopt;
    }
    return alpha;
}

bool NetworkGraph::is_complete() const {
    const std::size_t want = static_cast<std::size_t>(n_nodes_) *
                             static_cast<std::size_t>(n_nodes_ - 1) / 2;
    return edges_.size() == want;  // no duplicates by construction
}

bool NetworkGraph::is_path() const {
    if (edges_.size() != static_cast<std::size_t>(n_nodes_ - 1)) return false;
    std::vector<int> degree(n_nodes_, 0);
    for (const Edge& e : edges_) {
        ++degree[e.i];
        ++degree[e.k];
    }
    int leaves = 0;
    for (int d : degree) {
        if (d == 0 || d > 2) return false;
        if (d == 1) ++leaves;
    }
    return leaves == 2 && is_connected(*this);
}

WeightedLaplacian build_laplacian(const NetworkGraph& graph, LaplacianKind kind) {
    const int n = graph.n_nodes();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : graph.edges()) {
        const double w = (kind == LaplacianKind::susceptance) ? e.b : e.g;
        L(e.i, e.i) += w;
        L(e.k, e.k) += w;
        L(e.i, e.k) -= w;
        L(e.k, e.i) -= w;
    }
    return {std::move(L), kind};
}

std::function<double()> constant_susceptance(double b) {
    if (!(b > 0.0)) throw std::invalid_argument("constant_susceptance: b must be > 0");
    return [b] { return b; };
}

std::function<double()> uniform_susceptance(double lo, double hi, std::uint64_t seed) {
    if (!(lo > 0.0) || !(hi >= lo))
        throw std::invalid_argument("uniform_susceptance: need 0 < lo <= hi");
    auto rng = std::make_shared<std::mt19937_64>(seed);
    return [rng, lo, hi] {
        std::uniform_real_distribution<double> dist(lo, hi);
        return dist(*rng);
    };
}

namespace {

void check_topology_args(int n, double alpha) {
    if (n < 2) throw std::invalid_argument("graph builder: n must be >= 2");
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("graph builder: alpha must lie in (0,1)");
}

}  // namespace

NetworkGraph complete_graph(int n, const std::function<double()>& susceptance, double alpha) {
    check_topology_args(n, alpha);
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k) {
            const double b = susceptance();
            edges.push_back({i, k, b, alpha * b});
        }
    return NetworkGraph(n, std::move(edges));
}

NetworkGraph complete_graph(int n, double b, double alpha) {
    return complete_graph(n, constant_susceptance(b), alpha);
}

NetworkGraph path_graph(int n, const std::function<double()>& susceptance, double alpha) {
    check_topology_args(n, alpha);
    std::vector<Edge> edges;
    edges.reserve(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
        const double b = susceptance();
        edges.push_back({i, i + 1, b, alpha * b});
    }
    return NetworkGraph(n, std::move(edges));
}

NetworkGraph path_graph(int n, double b, double alpha) {
    return path_graph(n, constant_susceptance(b), alpha);
}

NetworkGraph random_connected_graph(int n, double edge_prob, double b_lo, double b_hi,
                                    double alpha, std::uint64_t seed) {
    check_topology_args(n, alpha);
    if (!(edge_prob > 0.0) || !(edge_prob <= 1.0))
        throw std::invalid_argument("random_connected_graph: edge_prob must lie in (0,1]");
    if (!(b_lo > 0.0) || !(b_hi >= b_lo))
        throw std::invalid_argument("random_connected_graph: need 0 < b_lo <= b_hi");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_real_distribution<double> weight(b_lo, b_hi);

    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int k = i + 1; k < n; ++k)
            if (coin(rng) < edge_prob) {
                const double b = weight(rng);
                edges.push_back({i, k, b, alpha * b});
            }

    // Stitch components with extra spanning edges (union-find).
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const Edge& e : edges) parent[find(e.i)] = find(e.k);
    int root = find(0);
    for (int v = 1; v < n; ++v) {
        if (find(v) != root) {
            const double b = weight(rng);
            int i = std::min(root, v), k = std::max(root, v);
            edges.push_back({i, k, b, alpha * b});
            parent[find(v)] = root;
            root = find(root);
        }
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.i, a.k) < std::tie(b.i, b.k); });
    NetworkGraph graph(n, std::move(edges));
    if (!is_connected(graph))
        throw std::runtime_error("random_connected_graph: connectivity stitching failed");
    return graph;
}

bool is_connected(const NetworkGraph& graph) {
    if (graph.n_nodes() == 1) return true;
    const Eigen::MatrixXd L = build_laplacian(graph, LaplacianKind::susceptance).matrix;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();  // ascending
    return ev(1) > kConnectivityRelTol * ev(ev.size() - 1);
}

Eigen::MatrixXcd admittance_matrix(const NetworkGraph& graph) {
    const int n = graph.n_nodes();
    const std::complex<double> j(0.0, 1.0);
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
    for (const Edge& e : graph.edges()) {
        const std::complex<double> y = e.g - j * e.b;
        Y(e.i, e.i) += y;
        Y(e.k, e.k) += y;
        Y(e.i, e.k) -= y;
        Y(e.k, e.i) -= y;
    }
    for (int i = 0; i < n; ++i) Y(i, i) += -j * graph.shunt_b()(i);
    return Y;
}

NetworkGraph kron_reduce(const Eigen::MatrixXcd& admittance, const std::vector<int>& boundary) {
    const int n = static_cast<int>(admittance.rows());
    if (admittance.cols() != n) throw std::invalid_argument("kron_reduce: matrix must be square");
    if ((admittance - admittance.transpose()).cwiseAbs().maxCoeff() >
        1e-9 * std::max(1.0, admittance.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("kron_reduce: admittance must be symmetric");

    std::vector<bool> keep(n, false);
    for (int v : boundary) {
        if (v < 0 || v >= n) throw std::invalid_argument("kron_reduce: boundary node out of range");
        if (keep[v]) throw std::invalid_argument("kron_reduce: duplicate boundary node");
        keep[v] = true;
    }
    std::vector<int> bnd, interior;
    for (int v = 0; v < n; ++v) (keep[v] ? bnd : interior).push_back(v);
    if (bnd.empty()) throw std::invalid_argument("kron_reduce: boundary must be nonempty");

    const int nb = static_cast<int>(bnd.size());
    const int ni = static_cast<int>(interior.size());
    Eigen::MatrixXcd Ybb(nb, nb), Ybi(nb, ni), Yii(ni, ni);
    for (int r = 0; r < nb; ++r) {
        for (int c = 0; c < nb; ++c) Ybb(r, c) = admittance(bnd[r], bnd[c]);
        for (int c = 0; c < ni; ++c) Ybi(r, c) = admittance(bnd[r], interior[c]);
    }
    for (int r = 0; r < ni; ++r)
        for (int c = 0; c < ni; ++c) Yii(r, c) = admittance(interior[r], interior[c]);

    Eigen::MatrixXcd Yred;
    if (ni == 0) {
        Yred = Ybb;
    } else {
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(Yii);
        if (!lu.isInvertible())
            throw std::invalid_argument("kron_reduce: interior admittance block is singular");
        Yred = Ybb - Ybi * lu.solve(Ybi.transpose());
    }

    const double scale = std::max(1.0, Yred.cwiseAbs().maxCoeff());
    const double tol = 1e-9 * scale;

    std::vector<Edge> edges;
    for (int i = 0; i < nb; ++i)
        for (int k = i + 1; k < nb; ++k) {
            const std::complex<double> y = -Yred(i, k);  // edge admittance g - jb
            double g = y.real(), b = -y.imag();
            if (std::abs(g) < tol) g = 0.0;
            if (std::abs(b) < tol) b = 0.0;
            if (g == 0.0 && b == 0.0) continue;
            if (g < 0.0)
                throw std::invalid_argument("kron_reduce: reduction produced a negative conductance");
            if (b <= 0.0)
                throw std::invalid_argument("kron_reduce: reduction produced a non-positive susceptance");
            edges.push_back({i, k, b, g});
        }

    Eigen::VectorXd shunt(nb);
    for (int i = 0; i < nb; ++i) {
        const std::complex<double> row_sum = Yred.row(i).sum();  // g_shunt - j*b_shunt
        if (std::abs(row_sum.real()) > tol)
            throw std::invalid_argument(
                "kron_reduce: reduced shunt has a nonzero conductance; cannot map back to an inductive shunt");
        double b = -row_sum.imag();
        if (std::abs(b) < tol) b = 0.0;
        shunt(i) = b;
    }
    return NetworkGraph(nb, std::move(edges), std::move(shunt));
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> power_injections(const NetworkGraph& graph,
                                                             const Eigen::VectorXd& delta,
                                                             const Eigen::VectorXd& V) {
    const int n = graph.n_nodes();
    if (delta.size() != n || V.size() != n)
        throw std::invalid_argument("power_injections: state dimension mismatch");

    // g_ii = sum of incident conductances (shunt conductance is zero),
    // b_ii = shunt + sum of incident susceptances.
    Eigen::VectorXd g_diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd b_diag = graph.shunt_b();
    for (const Edge& e : graph.edges()) {
        g_diag(e.i) += e.g;
        g_diag(e.k) += e.g;
        b_diag(e.i) += e.b;
        b_diag(e.k) += e.b;
    }

    Eigen::VectorXd P(n), Q(n);
    for (int i = 0; i < n; ++i) {
        P(i) = -g_diag(i) * V(i) * V(i);
        Q(i) = b_diag(i) * V(i) * V(i);
    }
    for (const Edge& e : graph.edges()) {
        const double dik = delta(e.i) - delta(e.k);
        const double c = std::cos(dik), s = std::sin(dik);
        const double vv = V(e.i) * V(e.k);
        P(e.i) += vv * (e.g * c + e.b * s);
        P(e.k) += vv * (e.g * c - e.b * s);  // cos is even, sin odd
        Q(e.i) += vv * (e.g * s - e.b * c);
        Q(e.k) += vv * (-e.g * s - e.b * c);
    }
    return {std::move(P), std::move(Q)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> linearized_injections(const NetworkGraph& graph,
                                                                  const Eigen::VectorXd& d_delta,
                                                                  const Eigen::VectorXd& d_V) {
    const int n = graph.n_nodes();
    if (d_delta.size() != n || d_V.size() != n)
        throw std::invalid_argument("linearized_injections: state dimension mismatch");
    const Eigen::MatrixXd LB = build_laplacian(graph, LaplacianKind::susceptance).matrix;
    const Eigen::MatrixXd LG = build_laplacian(graph, LaplacianKind::conductance).matrix;
    Eigen::VectorXd dP = LB * d_delta - LG * d_V;
    Eigen::VectorXd dQ = (LB * d_V + 2.0 * graph.shunt_b().cwiseProduct(d_V)) + LG * d_delta;
    return {std::move(dP), std::move(dQ)};
}

}  // namespace gridloss
