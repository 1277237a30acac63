#include "gridloss/coupled.hpp"

#include <cmath>
#include <stdexcept>

#include "gridloss/spectral.hpp"

namespace gridloss {

double gamma(const NetworkGraph& graph, const InverterParams& params, double alpha) {
    if (!(alpha >= 0.0) || !(alpha < 1.0))
        throw std::invalid_argument("gamma: alpha must lie in [0,1)");
    if (alpha == 0.0) return 0.0;  // coupling and output both vanish

    InverterParams p = params;
    p.alpha = alpha;
    const StateSpaceModel coupled = assemble_coupled(graph, p);
    if (!certify_stability(coupled).stable_observable)
        throw std::runtime_error("gamma: coupled model is unstable at this alpha");

    const double coupled_norm = h2_norm_gramian(coupled).total;
    const double decoupled_norm = h2_norm_analytic(p, coupled.laplacian_spectrum).total;
    return (coupled_norm - decoupled_norm) / decoupled_norm;
}

double gamma_series_complete(const InverterParams& params, double alpha,
                             std::optional<int> terms) {
    params.validate();
    if (!(alpha >= 0.0)) throw std::invalid_argument("gamma_series_complete: alpha must be >= 0");
    const double x = (params.k_p * params.tau_q / params.k_q) * alpha * alpha;
    if (!(x < 1.0))
        throw std::invalid_argument(
            "gamma_series_complete: convergence requires (k_P tau_Q / k_Q) alpha^2 < 1");
    if (!terms) return x / (1.0 - x);
    if (*terms < 0) throw std::invalid_argument("gamma_series_complete: terms must be >= 0");
    double sum = 0.0, pow = 1.0;
    for (int k = 1; k <= *terms; ++k) {
        pow *= x;
        sum += pow;
    }
    return sum;
}

double coupled_coefficient_complete(const InverterParams& params, int n, int k) {
    params.validate();
    if (k < 1) throw std::invalid_argument("coupled_coefficient_complete: k must be >= 1");
    if (n < 2) throw std::invalid_argument("coupled_coefficient_complete: n must be >= 2");
    if (k == 1) return complete_graph_asymptote(params, n) / params.alpha;
    const double ratio = params.k_p * params.tau_q / params.k_q;
    return (n - 1) * (params.k_p + params.k_q * params.tau_q) / (2.0 * params.k_q * params.k_q) *
           std::pow(ratio, k - 2);
}

double fit_alpha_exponent(const GammaCurve& curve) {
    if (curve.alphas.size() != curve.gammas.size())
        throw std::invalid_argument("fit_alpha_exponent: curve size mismatch");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
        if (curve.gammas[i] > 0.0 && curve.alphas[i] > 0.0) {
            lx.push_back(std::log(curve.alphas[i]));
            ly.push_back(std::log(curve.gammas[i]));
        }
    }
    if (lx.size() < 3)
        throw std::invalid_argument("fit_alpha_exponent: need at least 3 positive samples");
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom <= 0.0) throw std::invalid_argument("fit_alpha_exponent: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

}  // namespace gridloss
