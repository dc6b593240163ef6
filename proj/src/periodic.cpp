#include "agehopf/periodic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <limits>

#include "agehopf/errors.hpp"

namespace agehopf {

namespace {

// chi_hat(i n omega) for n = 0..N, shared across modes of one application.
std::vector<std::complex<double>> symbol_table(const BirthKernel& kernel, double omega, int order) {
    std::vector<std::complex<double>> sym(order + 1);
    for (int n = 0; n <= order; ++n)
        sym[n] = laplace_chi(kernel, {0.0, n * omega});
    return sym;
}

FourierState apply_symbol(const std::vector<std::complex<double>>& sym, const FourierState& x) {
    FourierState y(x.order());
    y.mean = x.mean * sym[0].real();
    for (int n = 1; n <= x.order(); ++n) y.modes[n - 1] = x.modes[n - 1] * sym[n];
    return y;
}

}  // namespace

FourierState eval_G(const BirthKernel& kernel, double omega, const FourierState& x) {
    return apply_symbol(symbol_table(kernel, omega, x.order()), x);
}

FourierState eval_dG_domega(const TauMeasure& tm, double omega, const FourierState& x) {
    if (omega == 0.0) throw std::domain_error("eval_dG_domega: omega must be nonzero");
    FourierState y(x.order());
    y.mean = 0.0;  // mu_tau has zero total mass
    for (int n = 1; n <= x.order(); ++n)
        y.modes[n - 1] = x.modes[n - 1] * (-tm.fourier(n * omega) / omega);
    return y;
}

FourierState eval_dG_domega(const BirthKernel& kernel, double omega, const FourierState& x) {
    return eval_dG_domega(TauMeasure(kernel), omega, x);
}

FourierState eval_F(const BirthKernel& kernel, const Nonlinearity& nl, double omega, double nu,
                    const FourierState& x) {
    if (!(omega > 0.0)) throw std::domain_error("eval_F: omega must be positive");
    const FourierState gx = eval_G(kernel, omega, x);
    const int m = std::max(4 * x.order(), 4);
    const auto xv = x.grid_values(m);
    const auto gv = gx.grid_values(m);
    std::vector<double> fv(m);
    for (int j = 0; j < m; ++j) fv[j] = xv[j] - nl.f(nu, gv[j]);
    return FourierState::from_grid(fv, x.order());
}

FourierState apply_linearized_F(const BirthKernel& kernel, const Equilibrium& eq, double omega,
                                const FourierState& x) {
    FourierState y = eval_G(kernel, omega, x);
    y *= -eq.gain;
    y += x;
    return y;
}

std::complex<double> linearized_mode_symbol(const BirthKernel& kernel, const Equilibrium& eq,
                                            double omega, int n) {
    const int order = std::max(n, 1);
    FourierState xc(order), xs(order);
    if (n == 0) {
        xc.mean = 1.0;
        const FourierState y = apply_linearized_F(kernel, eq, omega, xc);
        return {y.mean, 0.0};
    }
    xc.modes[n - 1] = {0.5, 0.0};   // cos(n t)
    xs.modes[n - 1] = {0.0, -0.5};  // sin(n t)
    const FourierState yc = apply_linearized_F(kernel, eq, omega, xc);
    const FourierState ys = apply_linearized_F(kernel, eq, omega, xs);
    // Diagonality check: everything must stay in mode n.
    for (int k = 0; k <= order; ++k) {
        if (k == n) continue;
        if (std::abs(yc.mode(k)) > 1e-12 || std::abs(ys.mode(k)) > 1e-12)
            throw NumericError("linearized_mode_symbol: operator is not mode-diagonal");
    }
    const std::complex<double> sc = yc.modes[n - 1] / xc.modes[n - 1];
    const std::complex<double> ss = ys.modes[n - 1] / xs.modes[n - 1];
    if (std::abs(sc - ss) > 1e-10 * std::max(1.0, std::abs(sc)))
        throw NumericError("linearized_mode_symbol: cos/sin routes disagree");
    return 0.5 * (sc + ss);
}

double fourier_symbol_margin(const BirthKernel& kernel, const Nonlinearity& nl, double nu0,
                             double omega0, int order, double eq_guess) {
    const Equilibrium eq = solve_equilibrium(nl, nu0, eq_guess);
    double margin = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= order; ++n) {
        if (n == 1) continue;
        margin = std::min(margin, std::abs(1.0 - eq.gain * laplace_chi(kernel, {0.0, n * omega0})));
    }
    return margin;
}

// ---------------------------------------------------------------------------
// Lyapunov-Schmidt solve in truncated Fourier space
// ---------------------------------------------------------------------------

namespace {

// Unknown packing: [omega, nu, z_mean, Re z_2, Im z_2, ..., Re z_N, Im z_N].
// Residual packing: [h_mean, Re h_1, Im h_1, ..., Re h_N, Im h_N].
// Both have length 2N + 1; the critical-mode residual pairs with (omega, nu).
class HProblem {
  public:
    HProblem(const BirthKernel& kernel, const Nonlinearity& nl, const PeriodicSolveOptions& opts)
        : kernel_(kernel), nl_(nl), opts_(opts), u1_(cosine_state(opts.order, opts.u1_phase)) {}

    int order() const { return opts_.order; }
    int dim() const { return 2 * opts_.order + 1; }

    FourierState unpack_z(const Eigen::VectorXd& u) const {
        FourierState z(opts_.order);
        z.mean = u[2];
        for (int n = 2; n <= opts_.order; ++n)
            z.modes[n - 1] = {u[2 * n - 1], u[2 * n]};
        return z;
    }

    static Eigen::VectorXd pack(double omega, double nu, const FourierState& z) {
        const int order = z.order();
        Eigen::VectorXd u(2 * order + 1);
        u[0] = omega;
        u[1] = nu;
        u[2] = z.mean;
        for (int n = 2; n <= order; ++n) {
            u[2 * n - 1] = z.modes[n - 1].real();
            u[2 * n] = z.modes[n - 1].imag();
        }
        return u;
    }

    Eigen::VectorXd residual(double s, const Eigen::VectorXd& u) const {
        return pack_residual(eval_h(s, u));
    }

    Eigen::VectorXd pack_residual(const FourierState& h) const {
        Eigen::VectorXd r(dim());
        r[0] = h.mean;
        for (int n = 1; n <= opts_.order; ++n) {
            r[2 * n - 1] = h.modes[n - 1].real();
            r[2 * n] = h.modes[n - 1].imag();
        }
        return r;
    }

    FourierState eval_h(double s, const Eigen::VectorXd& u) const {
        const double omega = u[0];
        const double nu = u[1];
        const FourierState z = unpack_z(u);
        const Equilibrium eq = equilibrium_at(nu);
        const auto& sym = symbols_for(omega);
        if (s == 0.0) {
            FourierState x = u1_;
            x += z;
            FourierState y = apply_symbol(sym, x);
            y *= -eq.gain;
            y += x;
            return y;
        }
        FourierState x = u1_;
        x += z;
        x *= s;
        x.mean += eq.w;
        const FourierState gx = apply_symbol(sym, x);
        const int m = std::max(4 * x.order(), 4);
        const auto xv = x.grid_values(m);
        const auto gv = gx.grid_values(m);
        std::vector<double> fv(m);
        for (int j = 0; j < m; ++j) fv[j] = (xv[j] - nl_.f(nu, gv[j])) / s;
        return FourierState::from_grid(fv, x.order());
    }

    // Symbol table cache: the forward-difference Jacobian perturbs omega in
    // a single column, so consecutive evaluations mostly share one omega.
    const std::vector<std::complex<double>>& symbols_for(double omega) const {
        if (!sym_valid_ || omega != sym_omega_) {
            sym_ = symbol_table(kernel_, omega, opts_.order);
            sym_omega_ = omega;
            sym_valid_ = true;
        }
        return sym_;
    }

    Equilibrium equilibrium_at(double nu) const {
        Equilibrium eq = solve_equilibrium(nl_, nu, eq_guess_);
        eq_guess_ = eq.w;
        return eq;
    }

    double eq_guess() const { return eq_guess_; }
    void set_eq_guess(double g) { eq_guess_ = g; }

  private:
    const BirthKernel& kernel_;
    const Nonlinearity& nl_;
    PeriodicSolveOptions opts_;
    FourierState u1_;
    mutable double eq_guess_ = 1.0;
    mutable std::vector<std::complex<double>> sym_;
    mutable double sym_omega_ = 0.0;
    mutable bool sym_valid_ = false;
};

}  // namespace

BranchPoint solve_h_zero(const BirthKernel& scaled_kernel, const Nonlinearity& nl, double s,
                         const BranchPoint& seed, const PeriodicSolveOptions& opts) {
    HProblem problem(scaled_kernel, nl, opts);
    problem.set_eq_guess(opts.eq_guess);

    FourierState z = seed.z;
    z.modes.resize(opts.order, {0.0, 0.0});
    if (opts.order >= 1) z.modes[0] = 0.0;  // X2 seed by construction
    Eigen::VectorXd u = HProblem::pack(seed.omega, seed.nu, z);

    FourierState h = problem.eval_h(s, u);
    Eigen::VectorXd r = problem.pack_residual(h);
    double rsup = h.grid_sup_norm();
    const int n = problem.dim();

    for (int iter = 0; iter < opts.max_newton && rsup >= 0.5 * opts.branch_tol; ++iter) {
        Eigen::MatrixXd jac(n, n);
        for (int j = n - 1; j >= 0; --j) {  // omega column last: one symbol rebuild
            const double step = opts.fd_step * std::max(1.0, std::abs(u[j]));
            Eigen::VectorXd up = u;
            up[j] += step;
            jac.col(j) = (problem.residual(s, up) - r) / step;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        if (!lu.isInvertible())
            throw DegenerateBifurcation(
                "solve_h_zero: singular Jacobian (critical-mode solvability determinant vanishes)");
        const Eigen::VectorXd du = lu.solve(-r);
        u += du;
        h = problem.eval_h(s, u);
        r = problem.pack_residual(h);
        const double prev = rsup;
        rsup = h.grid_sup_norm();
        if (!std::isfinite(rsup)) throw NoConvergence("solve_h_zero: Newton diverged");
        if (rsup >= 0.5 * opts.branch_tol && rsup > 0.9 * prev && iter > 2) break;  // stagnation
    }

    BranchPoint point;
    point.s = s;
    point.omega = u[0];
    point.nu = u[1];
    point.z = problem.unpack_z(u);
    point.residual = rsup;
    point.extrapolated = std::abs(s) > opts.s_max;
    if (point.residual >= opts.branch_tol) {
        char msg[96];
        std::snprintf(msg, sizeof msg, "solve_h_zero: step refused (residual %.3e)", rsup);
        throw NoConvergence(msg);
    }
    return point;
}

PeriodicBranch continue_periodic_branch(const BirthKernel& kernel, const Nonlinearity& nl,
                                        const HopfCertificate& cert,
                                        const std::vector<double>& s_grid,
                                        const PeriodicSolveOptions& opts) {
    if (!cert.certified)
        throw std::invalid_argument("continue_periodic_branch: certificate is not certified");
    for (std::size_t i = 0; i + 1 < s_grid.size(); ++i)
        if (!(s_grid[i] < s_grid[i + 1]))
            throw std::invalid_argument("continue_periodic_branch: s_grid must be increasing");

    PeriodicBranch branch;
    branch.nu0 = cert.nu0;
    branch.omega0 = cert.omega0;

    PeriodicSolveOptions local = opts;
    BirthKernel scaled = kernel.scaled_ages(cert.omega0);

    for (bool retry = true; retry;) {
        retry = false;
        branch.points.clear();
        branch.truncated = false;
        branch.order_used = local.order;

        BranchPoint seed;
        seed.omega = 1.0;
        seed.nu = cert.nu0;
        seed.z = FourierState(local.order);
        local.eq_guess = opts.eq_guess;

        for (double s : s_grid) {
            BranchPoint point;
            try {
                point = solve_h_zero(scaled, nl, s, seed, local);
            } catch (const NumericError&) {
                branch.truncated = true;
                break;
            }
            // Spectral-accuracy guard: double the truncation if the top
            // retained mode is no longer negligible.  The floor keeps
            // Newton-tolerance noise in the top modes from triggering it.
            const double largest = std::max({point.z.max_abs_coeff(), 0.5, 1e-300});
            const double top = point.z.order() >= 1 ? std::abs(point.z.modes.back()) : 0.0;
            if (top > std::max(1e-10 * largest, 10.0 * local.branch_tol) &&
                2 * local.order <= local.max_order) {
                local.order *= 2;
                retry = true;
                break;
            }
            branch.points.push_back(point);
            seed = point;
        }
    }
    return branch;
}

FourierState orbit_state(const BranchPoint& point, const Nonlinearity& nl, double eq_guess,
                         double u1_phase) {
    const Equilibrium eq = solve_equilibrium(nl, point.nu, eq_guess);
    FourierState x = cosine_state(std::max(point.z.order(), 1), u1_phase);
    x += point.z;
    x *= point.s;
    x.mean += eq.w;
    return x;
}

double physical_period(const PeriodicBranch& branch, const BranchPoint& point) {
    return 2.0 * M_PI / (point.omega * branch.omega0);
}

}  // namespace agehopf
