#include "agehopf/fourier.hpp"

#include <cmath>
#include <stdexcept>

namespace agehopf {

std::complex<double> FourierState::mode(int n) const {
    if (n == 0) return {mean, 0.0};
    const int a = std::abs(n);
    if (a > order()) return {0.0, 0.0};
    return n > 0 ? modes[a - 1] : std::conj(modes[a - 1]);
}

double FourierState::eval(double t) const {
    double value = mean;
    for (int n = 1; n <= order(); ++n)
        value += 2.0 * (modes[n - 1] * std::exp(std::complex<double>(0.0, n * t))).real();
    return value;
}

std::vector<double> FourierState::grid_values(int m) const {
    if (m <= 0) m = std::max(4 * order(), 4);
    std::vector<double> out(m);
    for (int j = 0; j < m; ++j) {
        const std::complex<double> w = std::exp(std::complex<double>(0.0, 2.0 * M_PI * j / m));
        std::complex<double> wn = 1.0;
        double value = mean;
        for (int n = 1; n <= order(); ++n) {
            wn *= w;
            value += 2.0 * (modes[n - 1] * wn).real();
        }
        out[j] = value;
    }
    return out;
}

FourierState FourierState::from_grid(const std::vector<double>& values, int order) {
    const int m = static_cast<int>(values.size());
    if (m < 2 * order + 1)
        throw std::invalid_argument("FourierState::from_grid: grid too coarse for the order");
    FourierState x(order);
    double mean = 0.0;
    for (double v : values) mean += v;
    x.mean = mean / m;
    std::vector<std::complex<double>> acc(order, {0.0, 0.0});
    for (int j = 0; j < m; ++j) {
        const std::complex<double> w = std::exp(std::complex<double>(0.0, -2.0 * M_PI * j / m));
        std::complex<double> wn = 1.0;
        for (int n = 1; n <= order; ++n) {
            wn *= w;
            acc[n - 1] += values[j] * wn;
        }
    }
    for (int n = 1; n <= order; ++n) x.modes[n - 1] = acc[n - 1] / static_cast<double>(m);
    return x;
}

double FourierState::max_abs_coeff() const {
    double m = std::abs(mean);
    for (const auto& c : modes) m = std::max(m, std::abs(c));
    return m;
}

double FourierState::grid_sup_norm() const {
    double m = 0.0;
    for (double v : grid_values()) m = std::max(m, std::abs(v));
    return m;
}

FourierState FourierState::projected_x2() const {
    FourierState x = *this;
    if (x.order() >= 1) x.modes[0] = 0.0;
    return x;
}

FourierState& FourierState::operator+=(const FourierState& rhs) {
    if (rhs.order() > order()) modes.resize(rhs.order(), {0.0, 0.0});
    mean += rhs.mean;
    for (int n = 1; n <= rhs.order(); ++n) modes[n - 1] += rhs.modes[n - 1];
    return *this;
}

FourierState& FourierState::operator*=(double s) {
    mean *= s;
    for (auto& c : modes) c *= s;
    return *this;
}

FourierState operator+(FourierState lhs, const FourierState& rhs) { return lhs += rhs; }

FourierState operator*(double s, FourierState x) { return x *= s; }

FourierState cosine_state(int order, double phase) {
    FourierState x(std::max(order, 1));
    // cos(t + phase) = Re(e^{i phase} e^{i t}); c_1 = e^{i phase} / 2
    x.modes[0] = 0.5 * std::exp(std::complex<double>(0.0, phase));
    return x;
}

}  // namespace agehopf
