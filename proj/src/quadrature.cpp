#include "agehopf/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace agehopf {

namespace {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Newton iteration on Legendre polynomials (standard "gauleg").
GaussRule compute_gauss_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[n - 1 - i] = rule.weights[i];
    }
    return rule;
}

const GaussRule& cached_rule(int n) {
    if (n < 1 || n > 128) throw std::invalid_argument("gauss rule order out of range");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_rule(n)).first;
    return it->second;
}

}  // namespace

const std::vector<double>& gauss_legendre_nodes(int n) { return cached_rule(n).nodes; }

const std::vector<double>& gauss_legendre_weights(int n) { return cached_rule(n).weights; }

std::vector<double> build_panels(double lo, double hi,
                                 const std::vector<double>& interior_breaks,
                                 double max_len, int min_per_interval) {
    std::vector<double> knots{lo};
    for (double b : interior_breaks)
        if (b > lo + 1e-14 && b < hi - 1e-14) knots.push_back(b);
    knots.push_back(hi);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                knots.end());

    std::vector<double> edges;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const double a = knots[i], b = knots[i + 1];
        const double len = b - a;
        int n = std::max(min_per_interval, static_cast<int>(std::ceil(len / max_len)));
        for (int j = 0; j < n; ++j) edges.push_back(a + len * j / n);
    }
    edges.push_back(hi);
    return edges;
}

double oscillation_panel_cap(const QuadratureConfig& cfg, std::complex<double> lambda) {
    const double mod = std::abs(lambda);
    double cap = cfg.max_panel_length;
    if (mod > 1e-12) cap = std::min(cap, cfg.nodes_per_panel * M_PI / (6.0 * mod));
    return cap;
}

std::complex<double> exp_poly_tail(std::complex<double> z, double a, int p) {
    if (z.real() <= 0.0) throw std::domain_error("exp_poly_tail requires Re z > 0");
    // int_a^inf l^p e^{-zl} dl = e^{-za} sum_{j=0}^p (p!/j!) a^j z^{j-p-1}
    const std::complex<double> zinv = 1.0 / z;
    if (a == 0.0) {
        double fact = 1.0;
        for (int j = 2; j <= p; ++j) fact *= j;
        return fact * std::pow(zinv, p + 1);
    }
    std::complex<double> term = std::pow(a, p) * zinv;  // j = p
    std::complex<double> sum = term;
    for (int j = p; j >= 1; --j) {
        term *= static_cast<double>(j) * zinv / a;  // advance to j - 1
        sum += term;
    }
    return std::exp(-z * a) * sum;
}

}  // namespace agehopf
