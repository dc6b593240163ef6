#pragma once

#include <string>
#include <vector>

namespace agehopf {

enum class NonlinearityFamily { Ricker, BevertonHolt, Polynomial };

/// Birth-limitation function f(nu, w) with the closed-form partials the
/// bifurcation machinery needs.  Built-ins:
///   ricker:         f = nu w e^{-w}
///   beverton_holt:  f = nu w / (1 + w)
///   polynomial:     f = nu * sum_k c_k w^k
struct Nonlinearity {
    NonlinearityFamily family = NonlinearityFamily::Ricker;
    std::vector<double> coefficients;  // polynomial only

    static Nonlinearity ricker() { return {NonlinearityFamily::Ricker, {}}; }
    static Nonlinearity beverton_holt() { return {NonlinearityFamily::BevertonHolt, {}}; }
    static Nonlinearity polynomial(std::vector<double> coeffs);

    double f(double nu, double w) const;
    double df_dw(double nu, double w) const;
    double d2f_dw2(double nu, double w) const;
    double d2f_dnu_dw(double nu, double w) const;
    double df_dnu(double nu, double w) const;

    std::string id() const;
};

}  // namespace agehopf
