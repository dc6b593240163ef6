#pragma once

#include <complex>
#include <vector>

namespace agehopf {

/// Real 2*pi-periodic function as mean + N complex modes with the real
/// signal convention c_{-n} = conj(c_n):
///   x(t) = mean + sum_{n=1}^N 2 Re( c_n e^{i n t} ).
struct FourierState {
    double mean = 0.0;
    std::vector<std::complex<double>> modes;  // modes[n-1] = c_n

    FourierState() = default;
    explicit FourierState(int order) : modes(order, {0.0, 0.0}) {}

    int order() const { return static_cast<int>(modes.size()); }
    std::complex<double> mode(int n) const;  // c_n for |n| <= order, c_0 = mean

    double eval(double t) const;
    /// Values at the m equispaced points t_j = 2 pi j / m (m defaults to 4N).
    std::vector<double> grid_values(int m = 0) const;
    static FourierState from_grid(const std::vector<double>& values, int order);

    double max_abs_coeff() const;
    double grid_sup_norm() const;  // sup over the 4N-point grid

    /// Mode-1 projection: integral_0^{2pi} x(t) e^{-i t} dt / (2 pi) = c_1.
    bool in_x2(double tol = 1e-12) const { return order() < 1 || std::abs(modes[0]) <= tol; }
    FourierState projected_x2() const;

    FourierState& operator+=(const FourierState& rhs);
    FourierState& operator*=(double s);
};

FourierState operator+(FourierState lhs, const FourierState& rhs);
FourierState operator*(double s, FourierState x);

/// u1(t) = cos(t + phase) as a FourierState of the given order.
FourierState cosine_state(int order, double phase = 0.0);

}  // namespace agehopf
