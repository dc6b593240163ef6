#include "agehopf/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "agehopf/errors.hpp"

namespace agehopf {

InitialAgeDensity InitialAgeDensity::equilibrium(double wbar, double mortality) {
    if (wbar < 0.0) throw std::invalid_argument("initial density: wbar must be nonnegative");
    InitialAgeDensity d;
    d.fn_ = [wbar, mortality](double a) { return wbar * std::exp(-mortality * a); };
    return d;
}

InitialAgeDensity InitialAgeDensity::equilibrium_cosine(double wbar, double mortality, double eps,
                                                        double theta) {
    if (wbar < 0.0) throw std::invalid_argument("initial density: wbar must be nonnegative");
    if (std::abs(eps) > 1.0)
        throw std::invalid_argument("initial density: |eps| <= 1 keeps psi nonnegative");
    InitialAgeDensity d;
    d.fn_ = [wbar, mortality, eps, theta](double a) {
        return wbar * std::exp(-mortality * a) * (1.0 + eps * std::cos(theta * a));
    };
    return d;
}

InitialAgeDensity InitialAgeDensity::equilibrium_bump(double wbar, double mortality,
                                                      std::vector<double> edges,
                                                      std::vector<double> factors) {
    if (edges.size() != factors.size() + 1)
        throw std::invalid_argument("initial density: edges must have factors.size()+1 entries");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        if (!(edges[i] < edges[i + 1]))
            throw std::invalid_argument("initial density: edges must be increasing");
    for (double f : factors)
        if (f < -1.0) throw std::invalid_argument("initial density: factors must be >= -1");
    InitialAgeDensity d;
    d.fn_ = [wbar, mortality, edges = std::move(edges),
             factors = std::move(factors)](double a) {
        double bump = 0.0;
        if (a >= edges.front() && a < edges.back()) {
            const auto it = std::upper_bound(edges.begin(), edges.end(), a);
            bump = factors[static_cast<std::size_t>(it - edges.begin()) - 1];
        }
        return wbar * std::exp(-mortality * a) * (1.0 + bump);
    };
    return d;
}

InitialAgeDensity InitialAgeDensity::scaled_exponential(double kappa, double mortality) {
    if (kappa < 0.0) throw std::invalid_argument("initial density: kappa must be nonnegative");
    InitialAgeDensity d;
    d.fn_ = [kappa, mortality](double a) { return kappa * std::exp(-mortality * a); };
    return d;
}

InitialAgeDensity InitialAgeDensity::table(std::vector<double> breakpoints,
                                           std::vector<double> values) {
    if (breakpoints.size() != values.size() + 1)
        throw std::invalid_argument("initial density: breakpoints must have values.size()+1 entries");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw std::invalid_argument("initial density: breakpoints must be increasing");
    for (double v : values)
        if (v < 0.0) throw std::invalid_argument("initial density: values must be nonnegative");
    InitialAgeDensity d;
    d.fn_ = [bp = std::move(breakpoints), vals = std::move(values)](double a) {
        if (a < bp.front() || a >= bp.back()) return 0.0;
        const auto it = std::upper_bound(bp.begin(), bp.end(), a);
        return vals[static_cast<std::size_t>(it - bp.begin()) - 1];
    };
    return d;
}

InitialAgeDensity InitialAgeDensity::callable(std::function<double(double)> fn) {
    InitialAgeDensity d;
    d.fn_ = std::move(fn);
    return d;
}

namespace {

int window_steps(const BirthKernel& kernel, double dt) {
    // dt must divide every breakpoint; the truncation age is rounded up to
    // the grid.
    for (double b : kernel.breakpoints()) {
        const double r = b / dt;
        if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r))
            throw StepSizeError("simulate_renewal: dt must divide kernel breakpoint " +
                                std::to_string(b));
    }
    return static_cast<int>(std::ceil(kernel.a_max() / dt - 1e-12));
}

}  // namespace

RenewalSolution simulate_renewal(const BirthKernel& kernel, const Nonlinearity& nl, double nu,
                                 const InitialAgeDensity& psi, double horizon, double dt,
                                 const SimulationOptions& opts) {
    if (!(dt > 0.0)) throw std::invalid_argument("simulate_renewal: dt must be positive");
    if (!(horizon >= dt)) throw std::invalid_argument("simulate_renewal: horizon too short");

    const int window = window_steps(kernel, dt);
    const int steps = static_cast<int>(std::round(horizon / dt));
    const double m = kernel.mortality();

    // Trapezoid weights over the full history window, one-sided at every
    // kernel jump (panels split there, so no panel straddles a jump).
    std::vector<double> weight(window + 1);
    for (int i = 0; i <= window; ++i) {
        const double a = i * dt;
        const double left = (i == 0) ? 0.0 : kernel.chi_left(a);
        const double right = (i == window) ? 0.0 : kernel.chi(a);
        weight[i] = 0.5 * dt * (left + right);
    }

    // Forcing tail: e^{-m t} int_0^{A - t} b(t+s) psi(s) ds on the same grid.
    // The age profile jumps across the startup seam a = t when the data are
    // incompatible; the seam node takes its right-continuous (initial-data)
    // value, so for k >= 1 the s = 0 node carries the full trapezoid weight
    // and the history integral drops its endpoint.
    RenewalSolution sol;
    sol.dt = dt;
    sol.horizon = steps * dt;
    sol.nu = nu;
    sol.tail.assign(steps + 1, 0.0);
    const int tail_steps = std::min(window, steps);
    for (int k = 0; k <= tail_steps; ++k) {
        const double t = k * dt;
        const int n = window - k;
        if (n <= 0) break;
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double s = i * dt;
            const double bl = (i == 0) ? (k == 0 ? 0.0 : kernel.birth(t)) : kernel.birth_left(t + s);
            const double br = (i == n) ? 0.0 : kernel.birth(t + s);
            acc += 0.5 * (bl + br) * psi(s);
        }
        sol.tail[k] = std::exp(-m * t) * dt * acc;
    }

    const double lag0 = weight[0];  // dt/2 * chi(0+)
    sol.v.assign(steps + 1, 0.0);

    for (int k = 0; k <= steps; ++k) {
        double hist = 0.0;
        const int mwin = (k <= window) ? k - 1 : window;
        const double* vp = sol.v.data() + k;
        for (int i = 1; i <= mwin; ++i) hist += weight[i] * vp[-i];
        const double forcing = hist + sol.tail[k];

        double x;
        if (lag0 == 0.0) {
            x = nl.f(nu, forcing);
        } else {
            x = (k == 0) ? nl.f(nu, forcing) : sol.v[k - 1];
            for (int it = 0; it < opts.inner_max_iter; ++it) {
                const double arg = lag0 * x + forcing;
                if (std::abs(nl.df_dw(nu, arg)) * lag0 >= 1.0)
                    throw StepSizeError(
                        "simulate_renewal: lag-0 sweep is not a contraction; reduce dt");
                const double next = nl.f(nu, arg);
                const bool small = std::abs(next - x) < opts.inner_tol * std::max(1.0, std::abs(next));
                x = next;
                if (small) break;
            }
        }

        if (!std::isfinite(x) || std::abs(x) > opts.v_cap) {
            sol.status = RenewalSolution::Status::BlewUp;
            sol.blowup_time = k * dt;
            sol.v.resize(k);
            sol.tail.resize(std::min<std::size_t>(sol.tail.size(), k));
            return sol;
        }
        sol.v[k] = x;
    }
    return sol;
}

std::vector<double> reconstruct_density(const RenewalSolution& sol, const InitialAgeDensity& psi,
                                        double mortality, double t,
                                        const std::vector<double>& age_grid) {
    const double available = (static_cast<int>(sol.v.size()) - 1) * sol.dt;
    if (t < 0.0 || t > available + 1e-12)
        throw std::domain_error("reconstruct_density: t outside the simulated horizon");
    std::vector<double> u(age_grid.size());
    for (std::size_t j = 0; j < age_grid.size(); ++j) {
        const double a = age_grid[j];
        if (a < 0.0) throw std::domain_error("reconstruct_density: negative age");
        if (a < t) {
            const double s = (t - a) / sol.dt;
            const int i = std::min(static_cast<int>(s), static_cast<int>(sol.v.size()) - 2);
            const double frac = s - i;
            const double v = sol.v[i] * (1.0 - frac) + sol.v[i + 1] * frac;
            u[j] = v * std::exp(-mortality * a);
        } else {
            u[j] = psi(a - t) * std::exp(-mortality * t);
        }
    }
    return u;
}

namespace {

struct Extremum {
    double t;
    double value;  // demeaned
    bool is_max;
};

std::vector<Extremum> find_extrema(const std::vector<double>& y, const std::vector<double>& t) {
    std::vector<Extremum> out;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        const double dl = y[i] - y[i - 1], dr = y[i + 1] - y[i];
        if (!((dl > 0.0 && dr < 0.0) || (dl < 0.0 && dr > 0.0))) continue;
        // quadratic refinement through the three samples
        const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
        double ts = t[i], vs = y[i];
        if (std::abs(denom) > 1e-300) {
            const double shift = 0.5 * (y[i - 1] - y[i + 1]) / denom;
            ts = t[i] + shift * (t[1] - t[0]);
            vs = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * shift;
        }
        out.push_back({ts, vs, dl > 0.0});
    }
    return out;
}

std::vector<double> find_crossings(const std::vector<double>& y, const std::vector<double>& t) {
    std::vector<double> out;
    const double dt = t.size() > 1 ? t[1] - t[0] : 1.0;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        if (!(y[i] == 0.0 ? false : (y[i] > 0.0) != (y[i + 1] > 0.0))) continue;
        double tc = t[i] + dt * y[i] / (y[i] - y[i + 1]);  // linear fallback
        if (i >= 1) {
            // quadratic through (i-1, i, i+1), root inside [t_i, t_{i+1}]
            const double ym = y[i - 1], y0 = y[i], yp = y[i + 1];
            const double a = 0.5 * (ym - 2.0 * y0 + yp);
            const double b = 0.5 * (yp - ym);
            const double c = y0;
            const double disc = b * b - 4.0 * a * c;
            if (std::abs(a) > 1e-300 && disc >= 0.0) {
                const double sq = std::sqrt(disc);
                for (double root : {(-b + sq) / (2.0 * a), (-b - sq) / (2.0 * a)}) {
                    if (root >= 0.0 && root <= 1.0) {
                        tc = t[i] + root * dt;
                        break;
                    }
                }
            }
        }
        out.push_back(tc);
    }
    return out;
}

// Unweighted least squares y = a + b x.
bool linear_fit(const std::vector<double>& x, const std::vector<double>& y, double& slope) {
    const std::size_t n = x.size();
    if (n < 2) return false;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) return false;
    slope = (n * sxy - sx * sy) / det;
    return true;
}

}  // namespace

SeriesDiagnostics analyze_series(const RenewalSolution& sol, const AnalyzeOptions& opts) {
    SeriesDiagnostics diag;
    const int n = static_cast<int>(sol.v.size());
    if (n < 4) return diag;

    const int start = std::min(n - 2, static_cast<int>(opts.settle_fraction * n));
    std::vector<double> t(n - start), y(n - start);
    for (int i = start; i < n; ++i) {
        t[i - start] = sol.time(i);
        y[i - start] = sol.v[i];
    }
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= y.size();
    diag.mean = mean;
    for (double& v : y) v -= mean;

    const double scale = std::max(1.0, std::abs(mean));
    const double noise_floor = 1e2 * std::numeric_limits<double>::epsilon() * scale;

    const auto extrema = find_extrema(y, t);
    diag.extrema_count = static_cast<int>(extrema.size());

    // Half-differences between consecutive extrema: an envelope sample that
    // is immune to slow baseline drift (the global mean is only exact for a
    // symmetric saturated cycle).
    std::vector<double> pair_t, pair_a;
    for (std::size_t i = 0; i + 1 < extrema.size(); ++i) {
        pair_t.push_back(0.5 * (extrema[i].t + extrema[i + 1].t));
        pair_a.push_back(0.5 * std::abs(extrema[i].value - extrema[i + 1].value));
    }
    double amp_max = 0.0;
    for (double a : pair_a) amp_max = std::max(amp_max, a);

    if (diag.extrema_count < opts.min_extrema || amp_max <= noise_floor) {
        // Non-oscillatory: exponential fit of |y| where it still stands out.
        std::vector<double> ft, fy;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (std::abs(y[i]) > noise_floor) {
                ft.push_back(t[i]);
                fy.push_back(std::log(std::abs(y[i])));
            }
        double slope = 0.0;
        if (ft.size() >= 4 && linear_fit(ft, fy, slope)) diag.sigma_fit = slope;
        return diag;
    }

    diag.oscillatory = true;

    // Envelope rate: log-linear fit over the band where the oscillation is
    // clean -- above the noise-contaminated tail and, for growing runs,
    // below the onset of saturation.
    const bool growing = pair_a.back() > pair_a.front();
    const double floor = std::max(noise_floor, 1e-4 * amp_max);
    const double cap = growing ? opts.growth_fit_cap * amp_max : 2.0 * amp_max;
    std::vector<double> et, ea;
    for (std::size_t i = 0; i < pair_a.size(); ++i) {
        if (pair_a[i] < floor || pair_a[i] > cap) continue;
        et.push_back(pair_t[i]);
        ea.push_back(std::log(pair_a[i]));
    }
    if (et.size() >= 4) {
        double slope = 0.0;
        if (linear_fit(et, ea, slope)) diag.sigma_fit = slope;
    }

    // Frequency, period and amplitude over the last quarter of the horizon.
    const double t_last_quarter = 0.75 * sol.horizon;
    std::vector<double> late_t, late_y;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (t[i] >= t_last_quarter) {
            late_t.push_back(t[i]);
            late_y.push_back(y[i]);
        }
    double late_mean = 0.0;
    for (double v : late_y) late_mean += v;
    if (!late_y.empty()) late_mean /= late_y.size();
    for (double& v : late_y) v -= late_mean;

    const auto crossings = find_crossings(late_y, late_t);
    if (crossings.size() >= 3)
        diag.omega_fit = M_PI * (crossings.size() - 1) / (crossings.back() - crossings.front());

    std::vector<double> up;
    for (std::size_t i = 0; i + 1 < late_y.size(); ++i)
        if (late_y[i] < 0.0 && late_y[i + 1] >= 0.0)
            up.push_back(late_t[i] + (late_t[1] - late_t[0]) * late_y[i] / (late_y[i] - late_y[i + 1]));
    if (up.size() >= 2) diag.period = (up.back() - up.front()) / (up.size() - 1);

    const auto late_extrema = find_extrema(late_y, late_t);
    double ptp_sum = 0.0;
    int ptp_cnt = 0;
    for (std::size_t i = 0; i + 1 < late_extrema.size(); ++i) {
        ptp_sum += std::abs(late_extrema[i].value - late_extrema[i + 1].value);
        ++ptp_cnt;
    }
    if (ptp_cnt > 0) diag.amplitude = ptp_sum / ptp_cnt;
    if (diag.amplitude < noise_floor) diag.amplitude = 0.0;

    return diag;
}

}  // namespace agehopf
