#pragma once

#include <complex>
#include <vector>

#include "gridloss/dynamics.hpp"

namespace gridloss {

/// Eigenvalue analysis of an assembled model.
struct SpectrumReport {
    Eigen::VectorXd laplacian_eigenvalues;               ///< L_B spectrum, ascending
    std::vector<std::complex<double>> system_eigenvalues;  ///< sorted by real part
    bool stable_observable = false;
    double spectral_abscissa_observable = 0.0;  ///< max Re over non-kernel eigenvalues
    bool degenerate_zero = false;               ///< more than one eigenvalue at zero
};

/// Closed-form spectrum of the uniform decoupled model over the given
/// L_B eigenvalues (lambda_1 = 0 included). For each positive mode the
/// phase pair is -(1/(2 tau_P)) (1 +- sqrt(1 - 4 k_P tau_P lambda)) and
/// the voltage eigenvalue is -(c_Q + k_Q lambda)/tau_Q; the zero mode
/// contributes {0, -1/tau_P, -c_Q/tau_Q}. Returns 3N values.
std::vector<std::complex<double>> analytic_spectrum(const InverterParams& params,
                                                    const Eigen::VectorXd& laplacian_eigs);

/// Dense nonsymmetric eigensolve of A, sorted by (Re, Im).
std::vector<std::complex<double>> numeric_spectrum(const StateSpaceModel& model);

/// Multiset comparison by greedy nearest-neighbor pairing.
bool spectra_match(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b,
                   double abs_tol);

/// Numeric stability certificate: stable_observable is true iff exactly
/// one eigenvalue sits at zero (the structural phase-drift mode) and
/// every other eigenvalue has real part below -tol, with
/// tol = 1e-9 * ||A||_F.
SpectrumReport certify_stability(const StateSpaceModel& model);

}  // namespace gridloss
