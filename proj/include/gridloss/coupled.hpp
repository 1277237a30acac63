#pragma once

#include <optional>
#include <vector>

#include "gridloss/h2.hpp"

namespace gridloss {

/// Sampled relative-error curve gamma(alpha) with the matching series
/// prediction where one applies (empty otherwise).
struct GammaCurve {
    std::vector<double> alphas;
    std::vector<double> gammas;
    std::vector<double> series;
};

/// Relative error of the squared H2 norm between the cross-coupled and
/// the decoupled model at ratio alpha: (||H^a||^2 - ||H||^2) / ||H||^2.
/// The coupled norm comes from the Gramian path, the decoupled norm
/// from the closed form. Throws if the coupled model is unstable at
/// this alpha. gamma(0) is 0 by definition (identical systems).
double gamma(const NetworkGraph& graph, const InverterParams& params, double alpha);

/// Large-N complete-graph series for gamma: partial sum of
/// x^1 + x^2 + ... with x = (k_P tau_Q / k_Q) alpha^2; nullopt terms
/// gives the geometric closed form x/(1-x). Requires x < 1.
double gamma_series_complete(const InverterParams& params, double alpha,
                             std::optional<int> terms = std::nullopt);

/// Series coefficients c_k for the large-N complete graph: c_1 is the
/// asymptotic norm divided by alpha; for k >= 2,
/// c_k = (N-1) (k_P + k_Q tau_Q) / (2 k_Q^2) * (k_P tau_Q / k_Q)^(k-2).
double coupled_coefficient_complete(const InverterParams& params, int n, int k);

/// Least-squares slope of log(gamma) vs log(alpha) over the samples
/// with positive gamma; expected near 2 for small alpha.
double fit_alpha_exponent(const GammaCurve& curve);

}  // namespace gridloss
