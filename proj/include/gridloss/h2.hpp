#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gridloss/dynamics.hpp"

namespace gridloss {

/// Squared H2 norm of a loss-output model, split into the phase and
/// voltage contributions. per_mode holds (lambda_n^B, contribution)
/// pairs for the observable modes when the computation is modal.
struct H2Report {
    double total = 0.0;
    double phase_part = 0.0;
    double voltage_part = 0.0;
    std::vector<std::pair<double, double>> per_mode;
    std::string method;  ///< "analytic", "gramian" or "modal"
};

/// Upper/lower bounds on the squared H2 norm from the graph topology.
struct BoundsReport {
    double lower = 0.0;
    double upper = 0.0;
    double mean_susceptance = 0.0;
    double min_susceptance = 0.0;
    bool equality_expected = false;
};

/// Dense Lyapunov solve A'X + XA = -Q via complex Schur reduction
/// (Bartels-Stewart). Requires Hurwitz A and PSD Q; the result is
/// symmetrized and checked against ||A'X + XA + Q||_F <= 1e-8 ||Q||_F.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q);

/// Model with the structural zero mode removed: the delta block is
/// restricted to an orthonormal basis of the complement of the
/// all-ones vector (3N-1 states). The transfer function, and hence the
/// H2 norm, is unchanged because the removed coordinate is unobservable
/// and feeds nothing else.
struct DeflatedModel {
    Eigen::MatrixXd A, B, C;
    Eigen::MatrixXd C_phase;  ///< rows of C measuring the phase differences only
};
DeflatedModel deflate_zero_mode(const StateSpaceModel& model);

/// Squared H2 norm from the observability Gramian of the deflated
/// model: trace(B' X B). Works for any assembled model whose
/// observable subspace is stable.
H2Report h2_norm_gramian(const StateSpaceModel& model);

/// Closed-form squared H2 norm of the uniform decoupled model:
///   alpha (N-1) / (2 k_P)  +  (alpha / (2 tau_Q)) sum_n 1/(c_Q/lambda_n + k_Q).
H2Report h2_norm_analytic(const InverterParams& params, const Eigen::VectorXd& laplacian_eigs);

/// Per-mode Gramian entries of the decoupled modal subsystem:
///   X22 = alpha tau_P^2 / (2 k_P),
///   X33 = (alpha tau_Q / 2) / (c_Q/lambda + k_Q).
/// The mode's norm contribution is X22/tau_P^2 + X33/tau_Q^2.
std::pair<double, double> modal_gramian(const InverterParams& params, double lambda_b);

/// Complete-graph bounds: Jensen upper bound with the mean susceptance,
/// lower bound with the minimum susceptance; equal iff all edge
/// susceptances coincide.
BoundsReport complete_graph_bounds(const InverterParams& params, int n, const NetworkGraph& graph);

/// Large-N complete-graph value (alpha/2)(N-1)(1/k_P + 1/(tau_Q k_Q)).
double complete_graph_asymptote(const InverterParams& params, int n);

/// Path-graph upper bound using the mean nonzero eigenvalue 2*b_mean;
/// no lower bound is stated for paths, so lower is reported as 0.
BoundsReport path_graph_bound(const InverterParams& params, int n, const NetworkGraph& graph);

}  // namespace gridloss
