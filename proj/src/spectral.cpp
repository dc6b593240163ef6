#include "agehopf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "agehopf/errors.hpp"

namespace agehopf {

Equilibrium solve_equilibrium(const Nonlinearity& nl, double nu, double guess, double eq_tol,
                              int max_iter) {
    double w = guess;
    bool converged = false;
    for (int it = 0; it < max_iter; ++it) {
        const double r = w - nl.f(nu, w);
        if (std::abs(r) < eq_tol * std::max(1.0, std::abs(w))) {
            converged = true;
            break;
        }
        const double dr = 1.0 - nl.df_dw(nu, w);
        if (std::abs(dr) < 1e-14 || !std::isfinite(dr))
            throw NoConvergence("solve_equilibrium: Newton hit a singular derivative");
        w -= r / dr;
        if (!std::isfinite(w)) throw NoConvergence("solve_equilibrium: Newton diverged");
    }
    if (!converged) throw NoConvergence("solve_equilibrium: no convergence in max_iter");
    Equilibrium eq;
    eq.nu = nu;
    eq.w = w;
    eq.gain = nl.df_dw(nu, w);
    const double denom = 1.0 - eq.gain;
    if (std::abs(denom) < 1e-12)
        throw FoldPoint("solve_equilibrium: 1 - f_w = 0 at the root (fold point)");
    eq.slope = nl.df_dnu(nu, w) / denom;
    return eq;
}

std::complex<double> delta(const BirthKernel& kernel, const Equilibrium& eq,
                           std::complex<double> lambda) {
    return 1.0 - eq.gain * laplace_chi(kernel, lambda);
}

std::complex<double> delta(const BirthKernel& kernel, const Nonlinearity& nl, double nu,
                           std::complex<double> lambda, double eq_guess) {
    return delta(kernel, solve_equilibrium(nl, nu, eq_guess), lambda);
}

DeltaPartials delta_partials(const BirthKernel& kernel, const Nonlinearity& nl,
                             const Equilibrium& eq, std::complex<double> lambda) {
    DeltaPartials out;
    out.dlambda = eq.gain * laplace_chi_moment(kernel, lambda, 1);
    const double gain_slope =
        nl.d2f_dnu_dw(eq.nu, eq.w) + nl.d2f_dw2(eq.nu, eq.w) * eq.slope;
    out.dnu = -gain_slope * laplace_chi(kernel, lambda);
    return out;
}

DeltaPartials delta_partials(const BirthKernel& kernel, const Nonlinearity& nl, double nu,
                             std::complex<double> lambda, double eq_guess) {
    return delta_partials(kernel, nl, solve_equilibrium(nl, nu, eq_guess), lambda);
}

namespace {

struct PolishedRoot {
    double nu = 0.0;
    double omega = 0.0;
    double residual = 0.0;
    bool ok = false;
};

// 2-d Newton on (Re Delta, Im Delta)(nu, i omega) = 0 with analytic Jacobian.
PolishedRoot polish_root(const BirthKernel& kernel, const Nonlinearity& nl, double nu,
                         double omega, double eq_guess, const HopfSearchOptions& opts) {
    PolishedRoot out;
    double w_guess = eq_guess;
    for (int it = 0; it < opts.max_newton; ++it) {
        Equilibrium eq;
        try {
            eq = solve_equilibrium(nl, nu, w_guess, opts.tol.eq_tol);
        } catch (const NumericError&) {
            return out;
        }
        w_guess = eq.w;
        const std::complex<double> lambda(0.0, omega);
        std::complex<double> d;
        DeltaPartials parts;
        try {
            d = delta(kernel, eq, lambda);
            parts = delta_partials(kernel, nl, eq, lambda);
        } catch (const std::domain_error&) {
            return out;
        }
        out.nu = nu;
        out.omega = omega;
        out.residual = std::abs(d);
        if (out.residual < 1e-13) break;
        // dDelta = dnu * dnu + (i * dlambda) * domega
        const double a11 = parts.dnu.real(), a12 = -parts.dlambda.imag();
        const double a21 = parts.dnu.imag(), a22 = parts.dlambda.real();
        const double det = a11 * a22 - a12 * a21;
        if (std::abs(det) < 1e-300 || !std::isfinite(det)) return out;
        const double dnu = (-d.real() * a22 + d.imag() * a12) / det;
        const double domega = (-a11 * d.imag() + a21 * d.real()) / det;
        nu += dnu;
        omega += domega;
        if (!std::isfinite(nu) || !std::isfinite(omega) || omega <= 0.0) return out;
        if (std::abs(dnu) < 1e-15 * std::max(1.0, std::abs(nu)) &&
            std::abs(domega) < 1e-15 * std::max(1.0, std::abs(omega))) {
            out.nu = nu;
            out.omega = omega;
            try {
                out.residual = std::abs(delta(kernel, nl, nu, {0.0, omega}, w_guess));
            } catch (const NumericError&) {
                return out;
            }
            break;
        }
    }
    out.ok = out.residual < opts.tol.root_tol && out.omega >= opts.omega_min;
    return out;
}

bool straddles_zero(double a, double b, double c, double d) {
    const double lo = std::min(std::min(a, b), std::min(c, d));
    const double hi = std::max(std::max(a, b), std::max(c, d));
    return lo <= 0.0 && hi >= 0.0;
}

}  // namespace

std::vector<HopfCandidate> find_hopf(const BirthKernel& kernel, const Nonlinearity& nl,
                                     double nu_lo, double nu_hi, double omega_lo, double omega_hi,
                                     const HopfSearchOptions& opts) {
    if (!(nu_lo < nu_hi) || !(omega_lo < omega_hi))
        throw std::invalid_argument("find_hopf: empty search rectangle");
    if (omega_lo < opts.omega_min)
        throw std::domain_error("find_hopf: omega range must stay above omega_min");

    const int n_nu = std::max(2, opts.nu_points);
    const int n_om = std::max(2, opts.omega_points);
    std::vector<double> nus(n_nu), omegas(n_om);
    for (int i = 0; i < n_nu; ++i) nus[i] = nu_lo + (nu_hi - nu_lo) * i / (n_nu - 1);
    for (int j = 0; j < n_om; ++j) omegas[j] = omega_lo + (omega_hi - omega_lo) * j / (n_om - 1);

    // Equilibrium branch continued across the nu row; rows where the Newton
    // fails are excluded from cell detection (the interval I is whatever the
    // user supplied, so failures are reported by omission, not thrown).
    std::vector<Equilibrium> eqs(n_nu);
    std::vector<char> valid(n_nu, 0);
    double guess = opts.eq_guess;
    for (int i = 0; i < n_nu; ++i) {
        try {
            eqs[i] = solve_equilibrium(nl, nus[i], guess, opts.tol.eq_tol);
            guess = eqs[i].w;
            valid[i] = 1;
        } catch (const NumericError&) {
            valid[i] = 0;
        }
    }

    std::vector<std::vector<std::complex<double>>> grid(n_nu);
    for (int i = 0; i < n_nu; ++i) {
        grid[i].resize(n_om);
        if (!valid[i]) continue;
        for (int j = 0; j < n_om; ++j)
            grid[i][j] = delta(kernel, eqs[i], {0.0, omegas[j]});
    }

    std::vector<HopfCandidate> found;
    for (int i = 0; i + 1 < n_nu; ++i) {
        if (!valid[i] || !valid[i + 1]) continue;
        for (int j = 0; j + 1 < n_om; ++j) {
            const auto z00 = grid[i][j], z10 = grid[i + 1][j];
            const auto z01 = grid[i][j + 1], z11 = grid[i + 1][j + 1];
            if (!straddles_zero(z00.real(), z10.real(), z01.real(), z11.real())) continue;
            if (!straddles_zero(z00.imag(), z10.imag(), z01.imag(), z11.imag())) continue;
            const double nu_seed = 0.5 * (nus[i] + nus[i + 1]);
            const double om_seed = 0.5 * (omegas[j] + omegas[j + 1]);
            const auto root = polish_root(kernel, nl, nu_seed, om_seed, eqs[i].w, opts);
            if (!root.ok) continue;
            const double margin_nu = (nu_hi - nu_lo) / (n_nu - 1);
            const double margin_om = (omega_hi - omega_lo) / (n_om - 1);
            if (root.nu < nu_lo - margin_nu || root.nu > nu_hi + margin_nu) continue;
            if (root.omega < std::max(opts.omega_min, omega_lo - margin_om) ||
                root.omega > omega_hi + margin_om)
                continue;
            found.push_back({root.nu, root.omega});
        }
    }

    std::sort(found.begin(), found.end(), [](const HopfCandidate& a, const HopfCandidate& b) {
        return a.nu != b.nu ? a.nu < b.nu : a.omega < b.omega;
    });
    std::vector<HopfCandidate> unique;
    for (const auto& c : found) {
        bool dup = false;
        for (const auto& u : unique)
            if (std::abs(c.nu - u.nu) <= opts.dedup_tol * std::max(1.0, std::abs(u.nu)) &&
                std::abs(c.omega - u.omega) <= opts.dedup_tol * std::max(1.0, std::abs(u.omega)))
                dup = true;
        if (!dup) unique.push_back(c);
    }
    return unique;
}

HopfCertificate certify_hopf(const BirthKernel& kernel, const Nonlinearity& nl,
                             const HopfCandidate& candidate, int k_max,
                             const SpectralTolerances& tol, double eq_guess) {
    HopfCertificate cert;
    cert.nu0 = candidate.nu;
    cert.omega0 = candidate.omega;
    cert.k_max = k_max;
    cert.tol = tol;

    const Equilibrium eq = solve_equilibrium(nl, candidate.nu, eq_guess, tol.eq_tol);
    const std::complex<double> i_omega(0.0, candidate.omega);

    cert.residual = std::abs(delta(kernel, eq, i_omega));
    cert.ok_root = cert.residual < tol.root_tol;

    cert.nonresonance_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= k_max; ++k) {
        if (k == 1) continue;
        const double m = std::abs(delta(kernel, eq, {0.0, k * candidate.omega}));
        if (m < cert.nonresonance_margin) {
            cert.nonresonance_margin = m;
            cert.nonresonance_argmin = k;
        }
    }
    cert.ok_nonresonance = cert.nonresonance_margin > tol.res_tol;

    const DeltaPartials parts = delta_partials(kernel, nl, eq, i_omega);
    cert.dlambda = parts.dlambda;
    cert.dlambda_abs = std::abs(parts.dlambda);
    cert.ok_simplicity = cert.dlambda_abs > tol.simp_tol;

    cert.transversality = (parts.dnu * std::conj(parts.dlambda)).real();
    cert.ok_transversality = std::abs(cert.transversality) > tol.trans_tol;
    cert.re_dlambda_dnu =
        cert.dlambda_abs > 0.0 ? (-parts.dnu / parts.dlambda).real() : 0.0;

    cert.certified =
        cert.ok_root && cert.ok_nonresonance && cert.ok_simplicity && cert.ok_transversality;
    return cert;
}

namespace {

struct BranchState {
    double nu;
    std::complex<double> lambda;
    double w_guess;
};

// Corrector: complex Newton on lambda at fixed nu.
bool correct_root(const BirthKernel& kernel, const Nonlinearity& nl, BranchState& st,
                  const ContinuationOptions& opts) {
    Equilibrium eq;
    try {
        eq = solve_equilibrium(nl, st.nu, st.w_guess);
    } catch (const NumericError&) {
        return false;
    }
    st.w_guess = eq.w;
    for (int it = 0; it < opts.max_newton; ++it) {
        std::complex<double> d;
        try {
            d = delta(kernel, eq, st.lambda);
        } catch (const std::domain_error&) {
            return false;
        }
        if (std::abs(d) < opts.root_tol * 1e-2 || (it > 0 && std::abs(d) < opts.root_tol)) return true;
        const auto parts = delta_partials(kernel, nl, eq, st.lambda);
        if (std::abs(parts.dlambda) < 1e-300) return false;
        st.lambda -= d / parts.dlambda;
        if (!std::isfinite(st.lambda.real()) || !std::isfinite(st.lambda.imag())) return false;
    }
    try {
        return std::abs(delta(kernel, eq, st.lambda)) < opts.root_tol;
    } catch (const std::domain_error&) {
        return false;
    }
}

bool advance_to(const BirthKernel& kernel, const Nonlinearity& nl, BranchState& st,
                double nu_next, const ContinuationOptions& opts) {
    Equilibrium eq;
    try {
        eq = solve_equilibrium(nl, st.nu, st.w_guess);
    } catch (const NumericError&) {
        return false;
    }
    const auto parts = delta_partials(kernel, nl, eq, st.lambda);
    if (std::abs(parts.dlambda) < 1e-300) return false;
    const std::complex<double> slope = -parts.dnu / parts.dlambda;
    st.lambda += slope * (nu_next - st.nu);
    st.nu = nu_next;
    if (!correct_root(kernel, nl, st, opts)) return false;
    return st.lambda.imag() > 0.0;
}

}  // namespace

EigenBranch continue_eigenbranch(const BirthKernel& kernel, const Nonlinearity& nl, double nu0,
                                 double omega0, double nu_lo, double nu_hi, double step,
                                 const ContinuationOptions& opts) {
    if (!(step > 0.0)) throw std::invalid_argument("continue_eigenbranch: step must be positive");
    if (!(nu_lo <= nu0 && nu0 <= nu_hi))
        throw std::invalid_argument("continue_eigenbranch: nu0 must lie in [nu_lo, nu_hi]");

    EigenBranch branch;
    BranchState anchor{nu0, {0.0, omega0}, opts.eq_guess};
    if (!correct_root(kernel, nl, anchor, opts))
        throw NoConvergence("continue_eigenbranch: anchor point is not a root");

    auto sweep = [&](double target, bool& truncated) {
        std::vector<EigenBranchSample> out;
        BranchState st = anchor;
        const int n = std::max(1, static_cast<int>(std::ceil(std::abs(target - nu0) / step)));
        for (int i = 1; i <= n; ++i) {
            const double nu_next = nu0 + (target - nu0) * i / n;
            if (!advance_to(kernel, nl, st, nu_next, opts)) {
                truncated = true;
                break;
            }
            out.push_back({st.nu, st.lambda.real(), st.lambda.imag()});
        }
        return out;
    };

    auto down = sweep(nu_lo, branch.truncated_low);
    auto up = sweep(nu_hi, branch.truncated_high);

    branch.samples.reserve(down.size() + up.size() + 1);
    for (auto it = down.rbegin(); it != down.rend(); ++it) branch.samples.push_back(*it);
    branch.samples.push_back({anchor.nu, anchor.lambda.real(), anchor.lambda.imag()});
    for (const auto& s : up) branch.samples.push_back(s);
    return branch;
}

EigenBranchSample eigenbranch_at(const BirthKernel& kernel, const Nonlinearity& nl, double nu0,
                                 double omega0, double nu_target, int steps,
                                 const ContinuationOptions& opts) {
    BranchState st{nu0, {0.0, omega0}, opts.eq_guess};
    if (!correct_root(kernel, nl, st, opts))
        throw NoConvergence("eigenbranch_at: anchor point is not a root");
    for (int i = 1; i <= steps; ++i) {
        const double nu_next = nu0 + (nu_target - nu0) * i / steps;
        if (!advance_to(kernel, nl, st, nu_next, opts))
            throw NoConvergence("eigenbranch_at: corrector failed before reaching target");
    }
    return {st.nu, st.lambda.real(), st.lambda.imag()};
}

}  // namespace agehopf
