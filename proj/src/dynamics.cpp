#include "gridloss/dynamics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridloss {

void InverterParams::validate() const {
    if (!(k_p > 0.0) || !(k_q > 0.0)) throw std::invalid_argument("params: droop gains must be > 0");
    if (!(tau_p > 0.0) || !(tau_q > 0.0))
        throw std::invalid_argument("params: filter time constants must be > 0");
    if (!(c_q() > 0.0))
        throw std::invalid_argument("params: c_Q = 1 + 2 k_Q shunt_b must be > 0");
    if (!(alpha >= 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("params: alpha must lie in [0,1)");
}

InverterParams InverterParams::with_c_q(double k_p, double k_q, double tau_p, double tau_q,
                                        double c_q, double alpha) {
    InverterParams p{k_p, k_q, tau_p, tau_q, (c_q - 1.0) / (2.0 * k_q), alpha};
    p.validate();
    return p;
}

Eigen::VectorXd PerNodeParams::c_q() const {
    return Eigen::VectorXd::Ones(k_q.size()) + 2.0 * k_q.cwiseProduct(shunt_b);
}

void PerNodeParams::validate() const {
    const auto n = k_p.size();
    if (k_q.size() != n || tau_p.size() != n || tau_q.size() != n || shunt_b.size() != n)
        throw std::invalid_argument("per-node params: vector length mismatch");
    if (n == 0) throw std::invalid_argument("per-node params: empty");
    if (k_p.minCoeff() <= 0.0 || k_q.minCoeff() <= 0.0)
        throw std::invalid_argument("per-node params: droop gains must be > 0");
    if (tau_p.minCoeff() <= 0.0 || tau_q.minCoeff() <= 0.0)
        throw std::invalid_argument("per-node params: filter time constants must be > 0");
    if (c_q().minCoeff() <= 0.0)
        throw std::invalid_argument("per-node params: c_Q must be > 0 at every node");
}

PerNodeParams PerNodeParams::uniform(const InverterParams& p, int n) {
    p.validate();
    PerNodeParams out;
    out.k_p = Eigen::VectorXd::Constant(n, p.k_p);
    out.k_q = Eigen::VectorXd::Constant(n, p.k_q);
    out.tau_p = Eigen::VectorXd::Constant(n, p.tau_p);
    out.tau_q = Eigen::VectorXd::Constant(n, p.tau_q);
    out.shunt_b = Eigen::VectorXd::Constant(n, p.shunt_b);
    return out;
}

Eigen::VectorXd StateSpaceModel::kernel_direction() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(state_size());
    e.head(n_nodes).setOnes();
    return e;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigensolve failed");
    Eigen::VectorXd ev = es.eigenvalues();
    const double scale = std::max(1.0, std::abs(ev(ev.size() - 1)));
    const double tol = 1e-12 * scale;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -tol) throw std::invalid_argument("psd_sqrt: matrix is not PSD");
        // Clamp roundoff-sized eigenvalues so kernel directions map to zero.
        ev(i) = (ev(i) < tol) ? 0.0 : std::sqrt(ev(i));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

namespace {

Eigen::VectorXd laplacian_eigenvalues(const Eigen::MatrixXd& L) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

void require_connected(const NetworkGraph& graph, const char* who) {
    if (!is_connected(graph))
        throw std::invalid_argument(std::string(who) + ": graph is not connected");
}

/// Shared assembly for the uniform-parameter models; `couple` switches
/// the alpha*L_B cross-coupling blocks on.
StateSpaceModel assemble_uniform(const NetworkGraph& graph, const InverterParams& p, bool couple) {
    p.validate();
    require_connected(graph, couple ? "assemble_coupled" : "assemble_decoupled");
    const int n = graph.n_nodes();
    const Eigen::MatrixXd LB = build_laplacian(graph, LaplacianKind::susceptance).matrix;
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

    StateSpaceModel m;
    m.n_nodes = n;
    m.alpha = p.alpha;
    m.kind = couple ? ModelKind::coupled : ModelKind::decoupled;
    m.laplacian_spectrum = laplacian_eigenvalues(LB);

    m.A = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    m.A.block(0, n, n, n) = I;
    m.A.block(n, 0, n, n) = -(p.k_p / p.tau_p) * LB;
    m.A.block(n, n, n, n) = -(1.0 / p.tau_p) * I;
    m.A.block(2 * n, 2 * n, n, n) = -(p.c_q() / p.tau_q) * I - (p.k_q / p.tau_q) * LB;
    if (couple) {
        m.A.block(n, 2 * n, n, n) = (p.k_p / p.tau_p) * p.alpha * LB;
        m.A.block(2 * n, 0, n, n) = -(p.k_q / p.tau_q) * p.alpha * LB;
    }

    m.B = Eigen::MatrixXd::Zero(3 * n, 2 * n);
    m.B.block(n, 0, n, n) = (1.0 / p.tau_p) * I;
    m.B.block(2 * n, n, n, n) = (1.0 / p.tau_q) * I;

    const Eigen::MatrixXd root = std::sqrt(p.alpha) * psd_sqrt(LB);
    m.C = Eigen::MatrixXd::Zero(2 * n, 3 * n);
    m.C.block(0, 0, n, n) = root;
    m.C.block(n, 2 * n, n, n) = root;
    return m;
}

}  // namespace

StateSpaceModel assemble_full(const NetworkGraph& graph, const PerNodeParams& params) {
    params.validate();
    require_connected(graph, "assemble_full");
    const int n = graph.n_nodes();
    if (params.k_p.size() != n)
        throw std::invalid_argument("assemble_full: params sized for a different node count");

    const Eigen::MatrixXd LB = build_laplacian(graph, LaplacianKind::susceptance).matrix;
    const Eigen::MatrixXd LG = build_laplacian(graph, LaplacianKind::conductance).matrix;
    const Eigen::VectorXd inv_tp = params.tau_p.cwiseInverse();
    const Eigen::VectorXd inv_tq = params.tau_q.cwiseInverse();
    const Eigen::VectorXd kp_tp = params.k_p.cwiseProduct(inv_tp);
    const Eigen::VectorXd kq_tq = params.k_q.cwiseProduct(inv_tq);

    StateSpaceModel m;
    m.n_nodes = n;
    m.kind = ModelKind::full;
    m.alpha = graph.uniform_alpha().value_or(std::numeric_limits<double>::quiet_NaN());
    m.laplacian_spectrum = laplacian_eigenvalues(LB);

    m.A = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    m.A.block(0, n, n, n) = Eigen::MatrixXd::Identity(n, n);
    m.A.block(n, 0, n, n) = -(kp_tp.asDiagonal() * LB);
    m.A.block(n, n, n, n) = (-inv_tp).asDiagonal();
    m.A.block(n, 2 * n, n, n) = kp_tp.asDiagonal() * LG;
    m.A.block(2 * n, 0, n, n) = -(kq_tq.asDiagonal() * LG);
    m.A.block(2 * n, 2 * n, n, n) =
        Eigen::MatrixXd((-params.c_q().cwiseProduct(inv_tq)).asDiagonal()) -
        kq_tq.asDiagonal() * LB;

    m.B = Eigen::MatrixXd::Zero(3 * n, 2 * n);
    m.B.block(n, 0, n, n) = inv_tp.asDiagonal();
    m.B.block(2 * n, n, n, n) = inv_tq.asDiagonal();

    const Eigen::MatrixXd root = psd_sqrt(LG);
    m.C = Eigen::MatrixXd::Zero(2 * n, 3 * n);
    m.C.block(0, 0, n, n) = root;
    m.C.block(n, 2 * n, n, n) = root;
    return m;
}

StateSpaceModel assemble_decoupled(const NetworkGraph& graph, const InverterParams& params) {
    return assemble_uniform(graph, params, false);
}

StateSpaceModel assemble_coupled(const NetworkGraph& graph, const InverterParams& params) {
    return assemble_uniform(graph, params, true);
}

double instantaneous_loss(const NetworkGraph& graph, const Eigen::VectorXd& delta,
                          const Eigen::VectorXd& V) {
    if (delta.size() != graph.n_nodes() || V.size() != graph.n_nodes())
        throw std::invalid_argument("instantaneous_loss: state dimension mismatch");
    double loss = 0.0;
    for (const Edge& e : graph.edges()) {
        const double dv = V(e.i) - V(e.k);
        const double dd = delta(e.i) - delta(e.k);
        loss += e.g * (dv * dv + dd * dd);
    }
    return loss;
}

}  // namespace gridloss
