#pragma once

#include <vector>

#include "agehopf/fourier.hpp"
#include "agehopf/kernel.hpp"
#include "agehopf/nonlinearity.hpp"
#include "agehopf/spectral.hpp"

namespace agehopf {

/// G(omega, x)(t) = int_0^inf chi(l) x(t - omega l) dl; diagonal in Fourier
/// space, mode n multiplies by chi_hat(i n omega).
FourierState eval_G(const BirthKernel& kernel, double omega, const FourierState& x);

/// True omega-derivative of G.  Computed from the tau measure: mode n
/// multiplies by -(1/omega) int e^{-i n omega l} dmu_tau(l), which equals
/// d/domega chi_hat(i n omega).
FourierState eval_dG_domega(const BirthKernel& kernel, double omega, const FourierState& x);
FourierState eval_dG_domega(const TauMeasure& tm, double omega, const FourierState& x);

/// F(omega, nu, x) = x - f(nu, G(omega, x)), evaluated pseudo-spectrally on
/// a 4N grid.
FourierState eval_F(const BirthKernel& kernel, const Nonlinearity& nl, double omega, double nu,
                    const FourierState& x);

/// Apply x -> x - f_w(nu, wbar) G(omega, x): the linearization of F at the
/// equilibrium.  Exposed so its diagonal symbol can be cross-checked against
/// the characteristic function.
FourierState apply_linearized_F(const BirthKernel& kernel, const Equilibrium& eq, double omega,
                                const FourierState& x);

/// Diagonal symbol of the linearization on mode n, extracted by operator
/// application to the cos/sin basis pair (cross-mode leakage is checked).
std::complex<double> linearized_mode_symbol(const BirthKernel& kernel, const Equilibrium& eq,
                                            double omega, int n);

/// min over 0 <= n <= N, n != 1 of |1 - p(nu0) chi_hat(i n omega0)|:
/// the Fourier-side invertibility margin of I - K on X2.
double fourier_symbol_margin(const BirthKernel& kernel, const Nonlinearity& nl, double nu0,
                             double omega0, int order, double eq_guess = 1.0);

/// One point of the bifurcating branch in rescaled time (omega = 1 at onset).
struct BranchPoint {
    double s = 0.0;
    double omega = 1.0;  // rescaled; physical angular frequency is omega * omega0
    double nu = 0.0;
    FourierState z;      // X2 component of the orbit shape
    double residual = 0.0;
    bool extrapolated = false;  // beyond the small-amplitude trust region s_max
};

struct PeriodicSolveOptions {
    int order = 32;            // Fourier truncation N
    double branch_tol = 1e-10;
    int max_newton = 40;
    double fd_step = 1e-7;     // relative forward-difference step for the Jacobian
    double s_max = 0.1;
    double u1_phase = 0.0;     // replaces u1 = cos by cos(. + phase)
    double eq_guess = 1.0;
    int max_order = 256;       // cap for automatic truncation doubling
};

/// Newton solve of h(s, omega, nu, z) = 0 with
///   h = s^{-1} F(omega, nu, wbar_nu + s (u1 + z))        for s != 0
///   h = dF/dx (omega, nu, wbar_nu) (u1 + z)              for s  = 0
/// on the rescaled kernel.  The unknowns are (omega, nu) plus the X2 modes
/// of z; the ansatz itself carries the phase condition.
BranchPoint solve_h_zero(const BirthKernel& scaled_kernel, const Nonlinearity& nl, double s,
                         const BranchPoint& seed, const PeriodicSolveOptions& opts = {});

struct PeriodicBranch {
    double nu0 = 0.0;
    double omega0 = 0.0;  // physical frequency at onset
    std::vector<BranchPoint> points;
    bool truncated = false;  // first failed s stops the walk
    int order_used = 0;
};

/// Trace the branch over the increasing amplitude grid, seeding each solve
/// from the previous point.  The kernel is rescaled internally so the onset
/// frequency is 1; reported periods convert back through omega0.
PeriodicBranch continue_periodic_branch(const BirthKernel& kernel, const Nonlinearity& nl,
                                        const HopfCertificate& cert,
                                        const std::vector<double>& s_grid,
                                        const PeriodicSolveOptions& opts = {});

/// Orbit x(s) = wbar_{nu(s)} + s (u1 + z(s)) as a FourierState.
FourierState orbit_state(const BranchPoint& point, const Nonlinearity& nl,
                         double eq_guess = 1.0, double u1_phase = 0.0);

double physical_period(const PeriodicBranch& branch, const BranchPoint& point);

}  // namespace agehopf
