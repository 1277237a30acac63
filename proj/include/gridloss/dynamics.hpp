#pragma once

#include <Eigen/Dense>

#include "gridloss/network.hpp"

namespace gridloss {

/// Uniform droop-control settings shared by every inverter.
///
/// alpha is the network resistance-to-reactance ratio g/b used by the
/// uniform-assumption models; shunt_b is the common shunt susceptance.
/// The derived voltage-loop constant c_Q = 1 + 2 k_Q shunt_b must be
/// positive (the voltage-loop stability condition).
struct InverterParams {
    double k_p = 1.0;    ///< frequency droop gain
    double k_q = 1.0;    ///< voltage droop gain
    double tau_p = 1.0;  ///< active-power filter time constant [s]
    double tau_q = 1.0;  ///< reactive-power filter time constant [s]
    double shunt_b = 0.0;
    double alpha = 0.2;

    double c_q() const { return 1.0 + 2.0 * k_q * shunt_b; }
    void validate() const;

    /// Same parameters with shunt_b chosen so that c_Q equals the given value.
    static InverterParams with_c_q(double k_p, double k_q, double tau_p, double tau_q,
                                   double c_q, double alpha);
};

/// Per-node parameters for the heterogeneous model.
struct PerNodeParams {
    Eigen::VectorXd k_p, k_q, tau_p, tau_q, shunt_b;

    Eigen::VectorXd c_q() const;
    void validate() const;
    static PerNodeParams uniform(const InverterParams& p, int n);
};

enum class ModelKind { full, decoupled, coupled };

/// LTI model x_dot = A x + B w, y = C x over the stacked state
/// (delta_1..delta_N, omega_1..omega_N, V_1..V_N) with disturbance
/// channels (w_omega_1..N, w_V_1..N). y'y is the instantaneous
/// resistive power loss.
struct StateSpaceModel {
    Eigen::MatrixXd A;  ///< 3N x 3N
    Eigen::MatrixXd B;  ///< 3N x 2N, zero top block
    Eigen::MatrixXd C;  ///< 2N x 3N, zero omega block
    int n_nodes = 0;
    double alpha = 0.0;                  ///< ratio used in the output map (NaN if non-uniform)
    Eigen::VectorXd laplacian_spectrum;  ///< eigenvalues of L_B, ascending
    ModelKind kind = ModelKind::full;

    int state_size() const { return 3 * n_nodes; }
    int input_size() const { return 2 * n_nodes; }
    int output_size() const { return 2 * n_nodes; }

    /// Uniform phase shift direction (delta = 1, omega = V = 0); lies in
    /// the kernel of both A and C.
    Eigen::VectorXd kernel_direction() const;
};

/// Unique PSD square root via eigendecomposition. Slightly negative
/// eigenvalues from roundoff are clamped to zero; anything below
/// -1e-12 * max(1, lambda_max) is an error.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M);

/// Full heterogeneous model: cross-coupled frequency/voltage dynamics
/// with the network's actual L_B and L_G, loss output through L_G^(1/2).
StateSpaceModel assemble_full(const NetworkGraph& graph, const PerNodeParams& params);

/// Uniform-parameter model with decoupled frequency and voltage loops
/// (L_G dropped from the dynamics); output through sqrt(alpha) L_B^(1/2).
StateSpaceModel assemble_decoupled(const NetworkGraph& graph, const InverterParams& params);

/// Uniform-parameter model retaining the alpha*L_B cross-couplings.
StateSpaceModel assemble_coupled(const NetworkGraph& graph, const InverterParams& params);

/// Instantaneous resistive loss sum_{ik} g_ik [(V_i-V_k)^2 + (d_i-d_k)^2],
/// evaluated edge-wise so that uniform shifts cancel exactly.
double instantaneous_loss(const NetworkGraph& graph, const Eigen::VectorXd& delta,
                          const Eigen::VectorXd& V);

}  // namespace gridloss
