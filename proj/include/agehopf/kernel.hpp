#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "agehopf/quadrature.hpp"

namespace agehopf {

enum class KernelFamily { Gamma, PiecewiseConstant };

enum class NormalizationMode { ScaleB0, SolveM, AssertNormalized };

/// Fertility kernel b(a) together with a constant mortality m.  The
/// survival-weighted kernel chi(a) = b(a) e^{-m a} and tau(a) = a chi(a)
/// drive everything downstream.  Immutable after construction; all
/// operations are pure.
///
/// Families:
///   Gamma:              b(a) = scale * a^{shape-1} * e^{-rate a}, shape >= 1 integer
///   PiecewiseConstant:  b(a) = levels[i] on [breakpoints[i], breakpoints[i+1]),
///                       zero outside; right continuous.  Tabulated kernels are
///                       interpreted this way (no interpolation), keeping the
///                       tau measure exact.
class BirthKernel {
  public:
    static BirthKernel gamma(int shape, double rate, double scale, double mortality,
                             QuadratureConfig quad = {});
    static BirthKernel piecewise_constant(std::vector<double> breakpoints,
                                          std::vector<double> levels, double mortality,
                                          QuadratureConfig quad = {});
    /// Sampled values + breakpoints, read as piecewise constant.
    static BirthKernel table(std::vector<double> breakpoints, std::vector<double> values,
                             double mortality, QuadratureConfig quad = {});

    KernelFamily family() const { return family_; }
    double mortality() const { return mortality_; }
    /// Truncation age: analytic tail of int (1+l) chi beyond it is < tail_tol
    /// (compact-support kernels use their support end).
    double a_max() const { return a_max_; }
    int gamma_shape() const { return shape_; }
    double gamma_rate() const { return rate_; }
    double gamma_scale() const { return scale_; }
    /// rate + mortality; decay constant of chi for the gamma family.
    double gamma_decay() const { return rate_ + mortality_; }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& levels() const { return levels_; }
    const QuadratureConfig& quad() const { return quad_; }

    double birth(double a) const;       // b(a), right continuous
    double birth_left(double a) const;  // limit of b from below
    double chi(double a) const;         // b(a) e^{-m a}
    double chi_left(double a) const;
    double tau(double a) const;         // a chi(a)
    double tau_left(double a) const;

    /// Ages in (0, a_max] where b (hence chi and tau) jumps.
    std::vector<double> jump_ages() const;

    /// Kernel with ages multiplied by `factor` (chi_new(l) = chi(l/factor)/factor);
    /// preserves normalization.  Used to rescale the Hopf frequency to 1.
    BirthKernel scaled_ages(double factor) const;
    BirthKernel with_mortality(double m) const;
    BirthKernel with_birth_scaled(double factor) const;

    std::string id() const;

  private:
    BirthKernel() = default;
    void recompute_a_max();

    KernelFamily family_ = KernelFamily::Gamma;
    int shape_ = 1;
    double rate_ = 1.0;
    double scale_ = 1.0;
    std::vector<double> breakpoints_;
    std::vector<double> levels_;
    double mortality_ = 0.0;
    double a_max_ = 0.0;
    QuadratureConfig quad_;
};

/// chi(a) with the domain check from the contract (a >= 0).
double chi_eval(const BirthKernel& kernel, double a);

/// int_0^inf chi, by panel quadrature plus the analytic gamma tail.
double chi_integral(const BirthKernel& kernel);

/// int_0^inf l^k chi(l) e^{-lambda l} dl for Re lambda > -m, k in {0,1,2}.
std::complex<double> laplace_chi_moment(const BirthKernel& kernel,
                                        std::complex<double> lambda, int k);
std::complex<double> laplace_chi(const BirthKernel& kernel, std::complex<double> lambda);

/// Rescale (or re-solve the mortality of) the kernel so int chi = 1.
BirthKernel normalize(const BirthKernel& kernel, NormalizationMode mode);

/// Analytic bound on int_{a}^inf (1+l) chi(l) dl (exact for gamma, zero
/// beyond the support for compact kernels).
double chi_weighted_tail(const BirthKernel& kernel, double a);

/// The signed Borel measure of tau(a) = a chi(a): atoms at the kernel's
/// jump ages plus an absolutely continuous part tau'(a) per smooth piece.
class TauMeasure {
  public:
    explicit TauMeasure(const BirthKernel& kernel);

    const std::vector<double>& jump_ages() const { return jump_ages_; }
    const std::vector<double>& jump_masses() const { return jump_masses_; }
    const BirthKernel& kernel() const { return kernel_; }

    /// tau'(a) inside a smooth piece (one-sided from the right).
    double density(double a) const;

    /// mu_tau((a, b]) = tau(b) - tau(a), right-continuous convention.
    double measure_of(double a, double b) const;

    /// |mu_tau|((0, inf)), exact via monotone splitting of tau.
    double total_variation() const;
    /// |mu_tau|((0, a]).
    double variation_upto(double a) const;

    /// int_{(0, a_max]} g dmu_tau = sum_j g(a_j) jump_j + sum int g tau'.
    double integrate(const std::function<double(double)>& g) const;
    /// Same over (lo, hi].
    double integrate(const std::function<double(double)>& g, double lo, double hi) const;

    /// int_0^inf e^{-i theta l} dmu_tau(l), with the analytic gamma tail.
    std::complex<double> fourier(double theta) const;

  private:
    double variation_between(double lo, double hi) const;  // a.c. part only

    BirthKernel kernel_;
    std::vector<double> jump_ages_;
    std::vector<double> jump_masses_;
};

/// int g dmu_tau over (0, a_max], matching the integration-by-parts identity
/// G(b)tau(b) - G(a)tau(a) - int G' tau.
double measure_integral(const TauMeasure& tm, const std::function<double(double)>& g);

double total_variation(const TauMeasure& tm);

}  // namespace agehopf
