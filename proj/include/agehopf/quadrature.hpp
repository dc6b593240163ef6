#pragma once

#include <complex>
#include <vector>

namespace agehopf {

/// Settings for the composite Gauss-Legendre rules used against kernels.
/// Panels never straddle a kernel breakpoint; oscillatory integrands get
/// extra panels so that every wavelength keeps several nodes.
struct QuadratureConfig {
    int panels_per_interval = 4;
    int nodes_per_panel = 16;
    double max_panel_length = 0.5;
    double quad_tol = 1e-11;
    double tail_tol = 1e-12;
};

/// Gauss-Legendre nodes on [-1, 1], computed once per order and cached.
const std::vector<double>& gauss_legendre_nodes(int n);
const std::vector<double>& gauss_legendre_weights(int n);

/// Panel edges covering [lo, hi], split at the given interior breakpoints
/// and refined so no panel exceeds max_len (and each breakpoint interval
/// holds at least min_per_interval panels).
std::vector<double> build_panels(double lo, double hi,
                                 const std::vector<double>& interior_breaks,
                                 double max_len, int min_per_interval);

/// Panel length cap keeping ~6 nodes per wavelength of e^{-lambda l}.
double oscillation_panel_cap(const QuadratureConfig& cfg,
                             std::complex<double> lambda);

/// Composite Gauss-Legendre over precomputed panel edges.
template <typename F>
auto integrate_panels(F&& f, const std::vector<double>& edges, int nodes)
    -> decltype(f(0.0)) {
    using R = decltype(f(0.0));
    const auto& xs = gauss_legendre_nodes(nodes);
    const auto& ws = gauss_legendre_weights(nodes);
    R total{};
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p], b = edges[p + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        R acc{};
        for (int i = 0; i < nodes; ++i) acc += ws[i] * f(mid + half * xs[i]);
        total += half * acc;
    }
    return total;
}

/// Closed form of int_A^inf l^p e^{-z l} dl for integer p >= 0, Re z > 0.
std::complex<double> exp_poly_tail(std::complex<double> z, double a, int p);

}  // namespace agehopf
