#include "gridloss/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridloss {

namespace {

void sort_by_real(std::vector<std::complex<double>>& v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
}

}  // namespace

std::vector<std::complex<double>> analytic_spectrum(const InverterParams& params,
                                                    const Eigen::VectorXd& laplacian_eigs) {
    params.validate();
    const Eigen::Index n = laplacian_eigs.size();
    if (n < 1) throw std::invalid_argument("analytic_spectrum: empty spectrum");
    Eigen::VectorXd eigs = laplacian_eigs;
    std::sort(eigs.data(), eigs.data() + n);
    const double scale = std::max(1.0, std::abs(eigs(n - 1)));
    if (std::abs(eigs(0)) > 1e-9 * scale)
        throw std::invalid_argument("analytic_spectrum: lambda_1 = 0 must be supplied");

    const double cq = params.c_q();
    std::vector<std::complex<double>> out;
    out.reserve(3 * static_cast<std::size_t>(n));
    // Zero mode: pure drift plus the filtered frequency/voltage averages.
    out.emplace_back(0.0, 0.0);
    out.emplace_back(-1.0 / params.tau_p, 0.0);
    out.emplace_back(-cq / params.tau_q, 0.0);
    for (Eigen::Index i = 1; i < n; ++i) {
        const double lam = eigs(i);
        const std::complex<double> root =
            std::sqrt(std::complex<double>(1.0 - 4.0 * params.k_p * params.tau_p * lam, 0.0));
        out.push_back(-(1.0 + root) / (2.0 * params.tau_p));
        out.push_back(-(1.0 - root) / (2.0 * params.tau_p));
        out.emplace_back(-(cq + params.k_q * lam) / params.tau_q, 0.0);
    }
    sort_by_real(out);
    return out;
}

std::vector<std::complex<double>> numeric_spectrum(const StateSpaceModel& model) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(model.A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("numeric_spectrum: eigensolve failed");
    std::vector<std::complex<double>> out(es.eigenvalues().data(),
                                          es.eigenvalues().data() + es.eigenvalues().size());
    sort_by_real(out);
    return out;
}

bool spectra_match(std::vector<std::complex<double>> a, std::vector<std::complex<double>> b,
                   double abs_tol) {
    if (a.size() != b.size()) return false;
    std::vector<bool> used(b.size(), false);
    for (const auto& x : a) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = b.size();
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (used[i]) continue;
            const double d = std::abs(x - b[i]);
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        if (best_i == b.size() || best > abs_tol) return false;
        used[best_i] = true;
    }
    return true;
}

SpectrumReport certify_stability(const StateSpaceModel& model) {
    SpectrumReport report;
    report.laplacian_eigenvalues = model.laplacian_spectrum;
    report.system_eigenvalues = numeric_spectrum(model);

    const double tol = 1e-9 * model.A.norm();
    int zeros = 0;
    double abscissa = -std::numeric_limits<double>::infinity();
    for (const auto& ev : report.system_eigenvalues) {
        if (std::abs(ev) < tol) {
            ++zeros;
            continue;
        }
        abscissa = std::max(abscissa, ev.real());
    }
    report.degenerate_zero = zeros > 1;
    report.spectral_abscissa_observable = abscissa;
    report.stable_observable = zeros == 1 && abscissa < -tol;
    return report;
}

}  // namespace gridloss
