#include "agehopf/nonlinearity.hpp"

#include <cmath>
#include <stdexcept>

namespace agehopf {

namespace {

double poly_eval(const std::vector<double>& c, double w, int deriv) {
    double value = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= deriv; --k) {
        double coef = c[k];
        for (int j = 0; j < deriv; ++j) coef *= (k - j);
        value = value * w + coef;
    }
    return value;
}

}  // namespace

Nonlinearity Nonlinearity::polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("polynomial nonlinearity: empty coefficients");
    return {NonlinearityFamily::Polynomial, std::move(coeffs)};
}

double Nonlinearity::f(double nu, double w) const {
    switch (family) {
        case NonlinearityFamily::Ricker: return nu * w * std::exp(-w);
        case NonlinearityFamily::BevertonHolt: return nu * w / (1.0 + w);
        case NonlinearityFamily::Polynomial: return nu * poly_eval(coefficients, w, 0);
    }
    return 0.0;
}

double Nonlinearity::df_dw(double nu, double w) const {
    switch (family) {
        case NonlinearityFamily::Ricker: return nu * std::exp(-w) * (1.0 - w);
        case NonlinearityFamily::BevertonHolt: {
            const double d = 1.0 + w;
            return nu / (d * d);
        }
        case NonlinearityFamily::Polynomial: return nu * poly_eval(coefficients, w, 1);
    }
    return 0.0;
}

double Nonlinearity::d2f_dw2(double nu, double w) const {
    switch (family) {
        case NonlinearityFamily::Ricker: return nu * std::exp(-w) * (w - 2.0);
        case NonlinearityFamily::BevertonHolt: {
            const double d = 1.0 + w;
            return -2.0 * nu / (d * d * d);
        }
        case NonlinearityFamily::Polynomial: return nu * poly_eval(coefficients, w, 2);
    }
    return 0.0;
}

double Nonlinearity::d2f_dnu_dw(double nu, double w) const {
    (void)nu;
    switch (family) {
        case NonlinearityFamily::Ricker: return std::exp(-w) * (1.0 - w);
        case NonlinearityFamily::BevertonHolt: {
            const double d = 1.0 + w;
            return 1.0 / (d * d);
        }
        case NonlinearityFamily::Polynomial: return poly_eval(coefficients, w, 1);
    }
    return 0.0;
}

double Nonlinearity::df_dnu(double nu, double w) const {
    (void)nu;
    switch (family) {
        case NonlinearityFamily::Ricker: return w * std::exp(-w);
        case NonlinearityFamily::BevertonHolt: return w / (1.0 + w);
        case NonlinearityFamily::Polynomial: return poly_eval(coefficients, w, 0);
    }
    return 0.0;
}

std::string Nonlinearity::id() const {
    switch (family) {
        case NonlinearityFamily::Ricker: return "ricker";
        case NonlinearityFamily::BevertonHolt: return "beverton_holt";
        case NonlinearityFamily::Polynomial: {
            std::string s = "poly(";
            for (std::size_t i = 0; i < coefficients.size(); ++i) {
                if (i) s += ",";
                s += std::to_string(coefficients[i]);
            }
            return s + ")";
        }
    }
    return "?";
}

}  // namespace agehopf
