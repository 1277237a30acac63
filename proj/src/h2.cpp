#include "gridloss/h2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridloss {

namespace {

constexpr double kResidualRelTol = 1e-8;
constexpr double kConnectivityRelTol = 1e-9;

}  // namespace

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || Q.rows() != n || Q.cols() != n)
        throw std::invalid_argument("solve_lyapunov: dimension mismatch");

    // A' X + X A = -Q  with  A = U T U^H  becomes  T^H Y + Y T = -U^H Q U,
    // solvable column by column by forward substitution since T^H + T_kk I
    // is lower triangular with diagonal conj(lambda_i) + lambda_k.
    Eigen::ComplexSchur<Eigen::MatrixXd> schur(A);
    if (schur.info() != Eigen::Success)
        throw std::runtime_error("solve_lyapunov: Schur decomposition failed");
    const Eigen::MatrixXcd& T = schur.matrixT();
    const Eigen::MatrixXcd& U = schur.matrixU();

    const double spectral_tol = 1e-12 * std::max(1.0, A.norm());
    for (Eigen::Index i = 0; i < n; ++i)
        if (T(i, i).real() >= -spectral_tol)
            throw std::runtime_error("solve_lyapunov: A is not Hurwitz");

    const Eigen::MatrixXcd Qt = U.adjoint() * Q * U;
    Eigen::MatrixXcd Y(n, n);
    const Eigen::MatrixXcd Th = T.adjoint();  // lower triangular
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::VectorXcd rhs = -Qt.col(k);
        for (Eigen::Index i = 0; i < k; ++i) rhs -= T(i, k) * Y.col(i);
        // Forward substitution on (T^H + T_kk I) y = rhs.
        const std::complex<double> shift = T(k, k);
        Eigen::VectorXcd y(n);
        for (Eigen::Index r = 0; r < n; ++r) {
            std::complex<double> acc = rhs(r);
            for (Eigen::Index c = 0; c < r; ++c) acc -= Th(r, c) * y(c);
            y(r) = acc / (Th(r, r) + shift);
        }
        Y.col(k) = y;
    }

    Eigen::MatrixXd X = (U * Y * U.adjoint()).real();
    X = 0.5 * (X + X.transpose()).eval();

    const double q_norm = std::max(Q.norm(), 1e-300);
    const double residual = (A.transpose() * X + X * A + Q).norm();
    if (residual > kResidualRelTol * q_norm)
        throw std::runtime_error("solve_lyapunov: residual check failed (A likely not Hurwitz)");
    return X;
}

DeflatedModel deflate_zero_mode(const StateSpaceModel& model) {
    const int n = model.n_nodes;
    if (n < 2) throw std::invalid_argument("deflate_zero_mode: need at least two nodes");
    const int s = model.state_size();

    // Orthonormal basis of the complement of ones via a Householder QR
    // of the ones vector; columns 2..N of Q span 1-perp.
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, 1);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ones);
    Eigen::MatrixXd Qfull = qr.householderQ();
    const Eigen::MatrixXd P = Qfull.rightCols(n - 1);

    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(s, s - 1);  // state restriction
    S.block(0, 0, n, n - 1) = P;
    S.block(n, n - 1, 2 * n, 2 * n).setIdentity();

    DeflatedModel d;
    d.A = S.transpose() * model.A * S;
    d.B = S.transpose() * model.B;
    d.C = model.C * S;
    d.C_phase = model.C.topRows(n) * S;
    return d;
}

H2Report h2_norm_gramian(const StateSpaceModel& model) {
    const DeflatedModel d = deflate_zero_mode(model);
    Eigen::MatrixXd X, Xp;
    try {
        X = solve_lyapunov(d.A, d.C.transpose() * d.C);
        Xp = solve_lyapunov(d.A, d.C_phase.transpose() * d.C_phase);
    } catch (const std::runtime_error&) {
        throw std::runtime_error("h2_norm_gramian: observable subspace is not stable");
    }
    H2Report r;
    r.method = "gramian";
    r.total = (d.B.transpose() * X * d.B).trace();
    r.phase_part = (d.B.transpose() * Xp * d.B).trace();
    r.voltage_part = r.total - r.phase_part;
    return r;
}

H2Report h2_norm_analytic(const InverterParams& params, const Eigen::VectorXd& laplacian_eigs) {
    params.validate();
    const Eigen::Index n = laplacian_eigs.size();
    if (n < 1) throw std::invalid_argument("h2_norm_analytic: empty spectrum");
    Eigen::VectorXd eigs = laplacian_eigs;
    std::sort(eigs.data(), eigs.data() + n);
    const double scale = std::max(1.0, std::abs(eigs(n - 1)));
    if (std::abs(eigs(0)) > kConnectivityRelTol * scale)
        throw std::invalid_argument("h2_norm_analytic: lambda_1 = 0 must be supplied");
    if (n > 1 && eigs(1) <= kConnectivityRelTol * scale)
        throw std::invalid_argument("h2_norm_analytic: spectrum belongs to a disconnected graph");

    const double cq = params.c_q();
    H2Report r;
    r.method = "analytic";
    r.phase_part = params.alpha * static_cast<double>(n - 1) / (2.0 * params.k_p);
    r.voltage_part = 0.0;
    r.per_mode.reserve(n - 1);
    const double phase_per_mode = params.alpha / (2.0 * params.k_p);
    for (Eigen::Index i = 1; i < n; ++i) {
        const double lam = eigs(i);
        const double v = (params.alpha / (2.0 * params.tau_q)) / (cq / lam + params.k_q);
        r.voltage_part += v;
        r.per_mode.emplace_back(lam, phase_per_mode + v);
    }
    r.total = r.phase_part + r.voltage_part;
    return r;
}

std::pair<double, double> modal_gramian(const InverterParams& params, double lambda_b) {
    params.validate();
    if (!(lambda_b > 0.0)) throw std::invalid_argument("modal_gramian: lambda must be > 0");
    const double x22 = params.alpha * params.tau_p * params.tau_p / (2.0 * params.k_p);
    const double x33 =
        (params.alpha * params.tau_q / 2.0) / (params.c_q() / lambda_b + params.k_q);
    return {x22, x33};
}

namespace {

struct EdgeStats {
    double mean = 0.0;
    double min = 0.0;
    bool all_equal = false;
};

EdgeStats susceptance_stats(const NetworkGraph& graph) {
    EdgeStats s;
    s.min = std::numeric_limits<double>::infinity();
    double max = 0.0;
    for (const Edge& e : graph.edges()) {
        s.mean += e.b;
        s.min = std::min(s.min, e.b);
        max = std::max(max, e.b);
    }
    s.mean /= static_cast<double>(graph.edges().size());
    s.all_equal = (max - s.min) <= 1e-12 * max;
    return s;
}

double jensen_bound(const InverterParams& p, int n, double mean_eig) {
    return (p.alpha / 2.0) * (n - 1) *
           (1.0 / p.k_p + 1.0 / (p.tau_q * (p.c_q() / mean_eig + p.k_q)));
}

}  // namespace

BoundsReport complete_graph_bounds(const InverterParams& params, int n,
                                   const NetworkGraph& graph) {
    params.validate();
    if (graph.n_nodes() != n)
        throw std::invalid_argument("complete_graph_bounds: node count mismatch");
    if (!graph.is_complete())
        throw std::invalid_argument("complete_graph_bounds: graph is not complete");
    const EdgeStats s = susceptance_stats(graph);
    BoundsReport r;
    r.mean_susceptance = s.mean;
    r.min_susceptance = s.min;
    r.equality_expected = s.all_equal;
    r.upper = jensen_bound(params, n, n * s.mean);
    r.lower = jensen_bound(params, n, n * s.min);
    return r;
}

double complete_graph_asymptote(const InverterParams& params, int n) {
    params.validate();
    return (params.alpha / 2.0) * (n - 1) * (1.0 / params.k_p + 1.0 / (params.tau_q * params.k_q));
}

BoundsReport path_graph_bound(const InverterParams& params, int n, const NetworkGraph& graph) {
    params.validate();
    if (graph.n_nodes() != n) throw std::invalid_argument("path_graph_bound: node count mismatch");
    if (!graph.is_path()) throw std::invalid_argument("path_graph_bound: graph is not a path");
    const EdgeStats s = susceptance_stats(graph);
    BoundsReport r;
    r.mean_susceptance = s.mean;
    r.min_susceptance = s.min;
    r.equality_expected = false;
    r.upper = jensen_bound(params, n, 2.0 * s.mean);
    r.lower = 0.0;
    return r;
}

}  // namespace gridloss
