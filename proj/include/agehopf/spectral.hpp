#pragma once

#include <complex>
#include <vector>

#include "agehopf/kernel.hpp"
#include "agehopf/nonlinearity.hpp"

namespace agehopf {

/// Tolerances for root finding and certification.  Defaults match the
/// project-wide conventions; everything is overridable from a scenario.
struct SpectralTolerances {
    double root_tol = 1e-10;
    double res_tol = 1e-6;
    double simp_tol = 1e-8;
    double trans_tol = 1e-12;
    double eq_tol = 1e-12;
};

/// A constant solution w = f(nu, w) with its implicit-differentiation data.
struct Equilibrium {
    double nu = 0.0;
    double w = 0.0;      // boundary birth value  \bar w_nu
    double slope = 0.0;  // d \bar w_nu / d nu
    double gain = 0.0;   // p(nu) = f_w(nu, \bar w_nu)
};

Equilibrium solve_equilibrium(const Nonlinearity& nl, double nu, double guess,
                              double eq_tol = 1e-12, int max_iter = 50);

/// Characteristic function Delta(nu, lambda) = 1 - p(nu) * chi_hat(lambda).
std::complex<double> delta(const BirthKernel& kernel, const Equilibrium& eq,
                           std::complex<double> lambda);
std::complex<double> delta(const BirthKernel& kernel, const Nonlinearity& nl, double nu,
                           std::complex<double> lambda, double eq_guess = 1.0);

struct DeltaPartials {
    std::complex<double> dlambda;  // p(nu) * int l chi e^{-lambda l} dl
    std::complex<double> dnu;      // -[f_nuw + f_ww * slope] * chi_hat(lambda)
};

DeltaPartials delta_partials(const BirthKernel& kernel, const Nonlinearity& nl,
                             const Equilibrium& eq, std::complex<double> lambda);
DeltaPartials delta_partials(const BirthKernel& kernel, const Nonlinearity& nl, double nu,
                             std::complex<double> lambda, double eq_guess = 1.0);

struct HopfCandidate {
    double nu = 0.0;
    double omega = 0.0;
};

struct HopfSearchOptions {
    int nu_points = 48;
    int omega_points = 48;
    double eq_guess = 1.0;
    double omega_min = 1e-3;  // excludes steady-state (omega = 0) crossings
    double dedup_tol = 1e-6;
    int max_newton = 50;
    SpectralTolerances tol{};
};

/// Scan the (nu, omega) rectangle for sign structure of (Re Delta, Im Delta)
/// on the imaginary axis and polish each flagged cell with a 2-d Newton.
/// Empty result means no candidate, not an error.
std::vector<HopfCandidate> find_hopf(const BirthKernel& kernel, const Nonlinearity& nl,
                                     double nu_lo, double nu_hi, double omega_lo, double omega_hi,
                                     const HopfSearchOptions& opts = {});

/// Numerical record of the four bifurcation conditions at a candidate.
struct HopfCertificate {
    double nu0 = 0.0;
    double omega0 = 0.0;
    double residual = 0.0;             // |Delta(nu0, i omega0)|
    double nonresonance_margin = 0.0;  // min_{k != 1, k <= K_max} |Delta(nu0, k i omega0)|
    int nonresonance_argmin = 0;
    std::complex<double> dlambda{};    // simplicity value  d/dlambda Delta
    double dlambda_abs = 0.0;
    double transversality = 0.0;       // Re( dnu Delta * conj(dlambda Delta) )
    double re_dlambda_dnu = 0.0;       // Re( -dnu Delta / dlambda Delta )
    bool ok_root = false;
    bool ok_nonresonance = false;
    bool ok_simplicity = false;
    bool ok_transversality = false;
    bool certified = false;
    int k_max = 0;
    SpectralTolerances tol{};
};

HopfCertificate certify_hopf(const BirthKernel& kernel, const Nonlinearity& nl,
                             const HopfCandidate& candidate, int k_max = 20,
                             const SpectralTolerances& tol = {}, double eq_guess = 1.0);

struct EigenBranchSample {
    double nu = 0.0;
    double alpha = 0.0;
    double omega = 0.0;
};

struct EigenBranch {
    std::vector<EigenBranchSample> samples;  // ascending in nu
    bool truncated_low = false;
    bool truncated_high = false;
};

struct ContinuationOptions {
    double root_tol = 1e-10;
    int max_newton = 30;
    double eq_guess = 1.0;
};

/// Predictor-corrector continuation of Delta(nu, lambda(nu)) = 0 from a
/// certified root at (nu0, i omega0) across [nu_lo, nu_hi] with the given step.
EigenBranch continue_eigenbranch(const BirthKernel& kernel, const Nonlinearity& nl, double nu0,
                                 double omega0, double nu_lo, double nu_hi, double step,
                                 const ContinuationOptions& opts = {});

/// Walk the branch from (nu0, i omega0) straight to nu_target and return the
/// polished root there.
EigenBranchSample eigenbranch_at(const BirthKernel& kernel, const Nonlinearity& nl, double nu0,
                                 double omega0, double nu_target, int steps = 32,
                                 const ContinuationOptions& opts = {});

}  // namespace agehopf
