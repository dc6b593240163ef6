#include "agehopf/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "agehopf/errors.hpp"

namespace agehopf {

namespace {

// Strict domain guard for the Laplace-transform family.
void check_omega_domain(const BirthKernel& kernel, std::complex<double> lambda) {
    if (lambda.real() <= -kernel.mortality() + 1e-12)
        throw std::domain_error("laplace_chi: Re(lambda) must exceed -m");
}

int piece_index_right(const std::vector<double>& bp, double a) {
    // index i with bp[i] <= a < bp[i+1]; -1 outside support
    if (bp.empty() || a < bp.front() || a >= bp.back()) return -1;
    const auto it = std::upper_bound(bp.begin(), bp.end(), a);
    return static_cast<int>(it - bp.begin()) - 1;
}

int piece_index_left(const std::vector<double>& bp, double a) {
    if (bp.empty() || a <= bp.front() || a > bp.back()) return -1;
    const auto it = std::lower_bound(bp.begin(), bp.end(), a);
    return static_cast<int>(it - bp.begin()) - 1;
}

}  // namespace

BirthKernel BirthKernel::gamma(int shape, double rate, double scale, double mortality,
                               QuadratureConfig quad) {
    if (shape < 1 || shape > 12) throw std::invalid_argument("gamma kernel: shape must be in [1, 12]");
    if (rate <= 0.0) throw std::invalid_argument("gamma kernel: rate must be positive");
    if (scale <= 0.0) throw std::invalid_argument("gamma kernel: scale must be positive");
    if (mortality < 0.0) throw std::invalid_argument("kernel: mortality must be nonnegative");
    BirthKernel k;
    k.family_ = KernelFamily::Gamma;
    k.shape_ = shape;
    k.rate_ = rate;
    k.scale_ = scale;
    k.mortality_ = mortality;
    k.quad_ = quad;
    k.recompute_a_max();
    return k;
}

BirthKernel BirthKernel::piecewise_constant(std::vector<double> breakpoints,
                                            std::vector<double> levels, double mortality,
                                            QuadratureConfig quad) {
    if (breakpoints.size() < 2) throw std::invalid_argument("piecewise kernel: need at least 2 breakpoints");
    if (levels.size() + 1 != breakpoints.size())
        throw std::invalid_argument("piecewise kernel: levels must have breakpoints.size()-1 entries");
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
        if (!(breakpoints[i] < breakpoints[i + 1]))
            throw std::invalid_argument("piecewise kernel: breakpoints must be strictly increasing");
    if (breakpoints.front() < 0.0) throw std::invalid_argument("piecewise kernel: ages must be nonnegative");
    for (double l : levels)
        if (l < 0.0) throw std::invalid_argument("piecewise kernel: levels must be nonnegative");
    if (mortality < 0.0) throw std::invalid_argument("kernel: mortality must be nonnegative");
    BirthKernel k;
    k.family_ = KernelFamily::PiecewiseConstant;
    k.breakpoints_ = std::move(breakpoints);
    k.levels_ = std::move(levels);
    k.mortality_ = mortality;
    k.quad_ = quad;
    k.recompute_a_max();
    return k;
}

BirthKernel BirthKernel::table(std::vector<double> breakpoints, std::vector<double> values,
                               double mortality, QuadratureConfig quad) {
    return piecewise_constant(std::move(breakpoints), std::move(values), mortality, quad);
}

void BirthKernel::recompute_a_max() {
    if (family_ == KernelFamily::PiecewiseConstant) {
        a_max_ = breakpoints_.back();
        return;
    }
    // Smallest a with int_a^inf (1+l) chi(l) dl < tail_tol, found by
    // doubling then bisection on the closed-form tail.
    const double c = gamma_decay();
    double lo = shape_ / c;
    double hi = lo;
    auto tail = [&](double a) {
        return scale_ * (exp_poly_tail(c, a, shape_ - 1).real() + exp_poly_tail(c, a, shape_).real());
    };
    while (tail(hi) >= quad_.tail_tol) {
        hi *= 2.0;
        if (hi > 1e9) throw NumericError("gamma kernel: tail does not decay below tail_tol");
    }
    if (tail(lo) < quad_.tail_tol) {
        a_max_ = lo;
        return;
    }
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) < quad_.tail_tol ? hi : lo) = mid;
    }
    a_max_ = hi;
}

double BirthKernel::birth(double a) const {
    if (family_ == KernelFamily::Gamma)
        return scale_ * std::pow(a, shape_ - 1) * std::exp(-rate_ * a);
    const int i = piece_index_right(breakpoints_, a);
    return i < 0 ? 0.0 : levels_[i];
}

double BirthKernel::birth_left(double a) const {
    if (family_ == KernelFamily::Gamma) return birth(a);
    const int i = piece_index_left(breakpoints_, a);
    return i < 0 ? 0.0 : levels_[i];
}

double BirthKernel::chi(double a) const { return birth(a) * std::exp(-mortality_ * a); }

double BirthKernel::chi_left(double a) const { return birth_left(a) * std::exp(-mortality_ * a); }

double BirthKernel::tau(double a) const { return a * chi(a); }

double BirthKernel::tau_left(double a) const { return a * chi_left(a); }

std::vector<double> BirthKernel::jump_ages() const {
    std::vector<double> out;
    if (family_ == KernelFamily::Gamma) return out;
    for (double b : breakpoints_) {
        if (b <= 0.0) continue;
        if (std::abs(birth(b) - birth_left(b)) > 0.0) out.push_back(b);
    }
    return out;
}

BirthKernel BirthKernel::scaled_ages(double factor) const {
    if (factor <= 0.0) throw std::invalid_argument("scaled_ages: factor must be positive");
    BirthKernel k = *this;
    k.mortality_ = mortality_ / factor;
    if (family_ == KernelFamily::Gamma) {
        k.rate_ = rate_ / factor;
        k.scale_ = scale_ / std::pow(factor, shape_);
    } else {
        for (double& b : k.breakpoints_) b *= factor;
        for (double& l : k.levels_) l /= factor;
    }
    k.recompute_a_max();
    return k;
}

BirthKernel BirthKernel::with_mortality(double m) const {
    if (m < 0.0) throw std::invalid_argument("kernel: mortality must be nonnegative");
    BirthKernel k = *this;
    k.mortality_ = m;
    k.recompute_a_max();
    return k;
}

BirthKernel BirthKernel::with_birth_scaled(double factor) const {
    if (factor <= 0.0) throw std::invalid_argument("kernel: birth scale factor must be positive");
    BirthKernel k = *this;
    if (family_ == KernelFamily::Gamma)
        k.scale_ *= factor;
    else
        for (double& l : k.levels_) l *= factor;
    k.recompute_a_max();
    return k;
}

std::string BirthKernel::id() const {
    char buf[160];
    if (family_ == KernelFamily::Gamma) {
        std::snprintf(buf, sizeof buf, "gamma(shape=%d,rate=%.12g,scale=%.12g,m=%.12g)", shape_,
                      rate_, scale_, mortality_);
        return buf;
    }
    std::snprintf(buf, sizeof buf, "piecewise(%zu pieces,[%.12g,%.12g),m=%.12g)", levels_.size(),
                  breakpoints_.front(), breakpoints_.back(), mortality_);
    return buf;
}

double chi_eval(const BirthKernel& kernel, double a) {
    if (a < 0.0) throw std::domain_error("chi_eval: age must be nonnegative");
    return kernel.chi(a);
}

namespace {

// Shared worker: int_0^inf l^k chi(l) e^{-lambda l} dl without the Omega
// check (the normalization solver probes lambda = 0 at trial mortalities).
std::complex<double> birth_transform(const BirthKernel& kernel, std::complex<double> lambda,
                                     int k) {
    const auto& cfg = kernel.quad();
    const double cap = oscillation_panel_cap(cfg, lambda);
    const auto edges =
        build_panels(0.0, kernel.a_max(), kernel.breakpoints(), cap, cfg.panels_per_interval);
    auto f = [&](double l) -> std::complex<double> {
        double w = kernel.chi(l);
        for (int j = 0; j < k; ++j) w *= l;
        return w * std::exp(-lambda * l);
    };
    std::complex<double> value = integrate_panels(f, edges, cfg.nodes_per_panel);
    if (kernel.family() == KernelFamily::Gamma) {
        const std::complex<double> z = kernel.gamma_decay() + lambda;
        value += kernel.gamma_scale() * exp_poly_tail(z, kernel.a_max(), kernel.gamma_shape() - 1 + k);
    }
    return value;
}

}  // namespace

double chi_integral(const BirthKernel& kernel) { return birth_transform(kernel, 0.0, 0).real(); }

std::complex<double> laplace_chi_moment(const BirthKernel& kernel, std::complex<double> lambda,
                                        int k) {
    if (k < 0 || k > 2) throw std::invalid_argument("laplace_chi_moment: k must be in {0,1,2}");
    check_omega_domain(kernel, lambda);
    return birth_transform(kernel, lambda, k);
}

std::complex<double> laplace_chi(const BirthKernel& kernel, std::complex<double> lambda) {
    check_omega_domain(kernel, lambda);
    return birth_transform(kernel, lambda, 0);
}

BirthKernel normalize(const BirthKernel& kernel, NormalizationMode mode) {
    const double tol = kernel.quad().quad_tol;
    switch (mode) {
        case NormalizationMode::ScaleB0: {
            const double mass = chi_integral(kernel);
            if (mass <= 0.0) throw NoSolution("normalize: kernel has zero mass");
            return kernel.with_birth_scaled(1.0 / mass);
        }
        case NormalizationMode::AssertNormalized: {
            const double mass = chi_integral(kernel);
            if (std::abs(mass - 1.0) > 10.0 * tol)
                throw std::invalid_argument("normalize: kernel is not normalized (int chi = " +
                                            std::to_string(mass) + ")");
            return kernel;
        }
        case NormalizationMode::SolveM: {
            auto mass_at = [&](double m) { return chi_integral(kernel.with_mortality(m)); };
            double lo = 0.0;
            if (mass_at(lo) < 1.0)
                throw NoSolution("normalize: reproduction number < 1 for all m >= 0; "
                                 "cannot normalize by mortality");
            double hi = std::max(1.0, kernel.mortality());
            while (mass_at(hi) >= 1.0) {
                hi *= 2.0;
                if (hi > 1e12) throw NoSolution("normalize: mortality solve failed to bracket");
            }
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                const double mass = mass_at(mid);
                if (std::abs(mass - 1.0) < tol) return kernel.with_mortality(mid);
                (mass > 1.0 ? lo : hi) = mid;
                if (hi - lo < 1e-16 * std::max(1.0, hi)) break;
            }
            return kernel.with_mortality(0.5 * (lo + hi));
        }
    }
    throw std::logic_error("normalize: unknown mode");
}

double chi_weighted_tail(const BirthKernel& kernel, double a) {
    if (kernel.family() == KernelFamily::PiecewiseConstant) {
        if (a >= kernel.breakpoints().back()) return 0.0;
        const auto& cfg = kernel.quad();
        const auto edges = build_panels(a, kernel.breakpoints().back(), kernel.breakpoints(),
                                        cfg.max_panel_length, cfg.panels_per_interval);
        return integrate_panels([&](double l) { return (1.0 + l) * kernel.chi(l); }, edges,
                                cfg.nodes_per_panel);
    }
    const double c = kernel.gamma_decay();
    return kernel.gamma_scale() *
           (exp_poly_tail(c, a, kernel.gamma_shape() - 1).real() +
            exp_poly_tail(c, a, kernel.gamma_shape()).real());
}

// ---------------------------------------------------------------------------
// TauMeasure
// ---------------------------------------------------------------------------

TauMeasure::TauMeasure(const BirthKernel& kernel) : kernel_(kernel) {
    for (double a : kernel.jump_ages()) {
        const double mass = kernel.tau(a) - kernel.tau_left(a);
        if (mass != 0.0) {
            jump_ages_.push_back(a);
            jump_masses_.push_back(mass);
        }
    }
}

double TauMeasure::density(double a) const {
    if (a < 0.0) throw std::domain_error("TauMeasure::density: age must be nonnegative");
    if (kernel_.family() == KernelFamily::Gamma) {
        const int n = kernel_.gamma_shape();
        const double c = kernel_.gamma_decay();
        return kernel_.gamma_scale() * (n * std::pow(a, n - 1) - c * std::pow(a, n)) *
               std::exp(-c * a);
    }
    const double level = kernel_.birth(a);
    const double m = kernel_.mortality();
    return level * (1.0 - m * a) * std::exp(-m * a);
}

double TauMeasure::measure_of(double a, double b) const {
    if (!(a < b) || a < 0.0) throw std::domain_error("TauMeasure::measure_of: need 0 <= a < b");
    return kernel_.tau(b) - kernel_.tau(a);
}

double TauMeasure::variation_between(double lo, double hi) const {
    // Exact variation of the absolutely continuous part over [lo, hi]:
    // split at breakpoints and at the critical points of tau, then sum
    // |tau(segment end) - tau(segment start)| using one-sided values.
    std::vector<double> cuts{lo, hi};
    for (double b : kernel_.breakpoints())
        if (b > lo && b < hi) cuts.push_back(b);
    if (kernel_.family() == KernelFamily::Gamma) {
        const double crit = kernel_.gamma_shape() / kernel_.gamma_decay();
        if (crit > lo && crit < hi) cuts.push_back(crit);
    } else if (kernel_.mortality() > 0.0) {
        const double crit = 1.0 / kernel_.mortality();
        if (crit > lo && crit < hi) cuts.push_back(crit);
    }
    std::sort(cuts.begin(), cuts.end());
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        tv += std::abs(kernel_.tau_left(cuts[i + 1]) - kernel_.tau(cuts[i]));
    return tv;
}

double TauMeasure::total_variation() const {
    double tv = variation_between(0.0, kernel_.a_max());
    for (double m : jump_masses_) tv += std::abs(m);
    if (kernel_.family() == KernelFamily::Gamma) tv += kernel_.tau(kernel_.a_max());
    return tv;
}

double TauMeasure::variation_upto(double a) const {
    if (a <= 0.0) return 0.0;
    const double cap = std::min(a, kernel_.a_max());
    double tv = variation_between(0.0, cap);
    for (std::size_t j = 0; j < jump_ages_.size(); ++j)
        if (jump_ages_[j] <= a) tv += std::abs(jump_masses_[j]);
    if (kernel_.family() == KernelFamily::Gamma && a > kernel_.a_max())
        tv += std::abs(kernel_.tau(a) - kernel_.tau(kernel_.a_max()));
    return tv;
}

double TauMeasure::integrate(const std::function<double(double)>& g) const {
    return integrate(g, 0.0, kernel_.a_max());
}

double TauMeasure::integrate(const std::function<double(double)>& g, double lo, double hi) const {
    if (!(lo < hi) || lo < 0.0) throw std::domain_error("TauMeasure::integrate: need 0 <= lo < hi");
    const auto& cfg = kernel_.quad();
    double value = 0.0;
    for (std::size_t j = 0; j < jump_ages_.size(); ++j)
        if (jump_ages_[j] > lo && jump_ages_[j] <= hi) value += g(jump_ages_[j]) * jump_masses_[j];
    const double cap = std::min(hi, kernel_.a_max());
    if (lo < cap) {
        std::vector<double> crit = kernel_.breakpoints();
        if (kernel_.family() == KernelFamily::Gamma)
            crit.push_back(kernel_.gamma_shape() / kernel_.gamma_decay());
        const auto edges = build_panels(lo, cap, crit, cfg.max_panel_length, cfg.panels_per_interval);
        value += integrate_panels([&](double l) { return g(l) * density(l); }, edges,
                                  cfg.nodes_per_panel);
    }
    return value;
}

std::complex<double> TauMeasure::fourier(double theta) const {
    const auto& cfg = kernel_.quad();
    std::complex<double> value = 0.0;
    const std::complex<double> i_theta(0.0, theta);
    for (std::size_t j = 0; j < jump_ages_.size(); ++j)
        value += std::exp(-i_theta * jump_ages_[j]) * jump_masses_[j];
    const double cap = oscillation_panel_cap(cfg, i_theta);
    std::vector<double> crit = kernel_.breakpoints();
    if (kernel_.family() == KernelFamily::Gamma)
        crit.push_back(kernel_.gamma_shape() / kernel_.gamma_decay());
    const auto edges = build_panels(0.0, kernel_.a_max(), crit, cap, cfg.panels_per_interval);
    value += integrate_panels(
        [&](double l) -> std::complex<double> { return std::exp(-i_theta * l) * density(l); },
        edges, cfg.nodes_per_panel);
    if (kernel_.family() == KernelFamily::Gamma) {
        const int n = kernel_.gamma_shape();
        const double c = kernel_.gamma_decay();
        const std::complex<double> z = c + i_theta;
        value += kernel_.gamma_scale() *
                 (static_cast<double>(n) * exp_poly_tail(z, kernel_.a_max(), n - 1) -
                  c * exp_poly_tail(z, kernel_.a_max(), n));
    }
    return value;
}

double measure_integral(const TauMeasure& tm, const std::function<double(double)>& g) {
    return tm.integrate(g);
}

double total_variation(const TauMeasure& tm) { return tm.total_variation(); }

}  // namespace agehopf
