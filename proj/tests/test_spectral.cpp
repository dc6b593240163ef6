#include <doctest.h>

#include <cmath>
#include <cstring>

#include "agehopf/errors.hpp"
#include "agehopf/spectral.hpp"

using namespace agehopf;
using cplx = std::complex<double>;

namespace {

BirthKernel gamma3() { return BirthKernel::gamma(3, 0.5, 0.5, 0.5); }

const double kNu0 = std::exp(9.0);
const double kOmega0 = std::sqrt(3.0);

HopfSearchOptions ricker_search() {
    HopfSearchOptions so;
    so.eq_guess = 9.0;
    return so;
}

}  // namespace

TEST_CASE("equilibrium closed forms") {
    const auto nl = Nonlinearity::ricker();
    const auto eq = solve_equilibrium(nl, std::exp(2.0), 1.5);
    CHECK(eq.w == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(eq.gain == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(eq.slope == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));  // d(ln nu)/dnu

    const auto bh = solve_equilibrium(Nonlinearity::beverton_holt(), 4.0, 2.0);
    CHECK(bh.w == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(bh.gain == doctest::Approx(0.25).epsilon(1e-12));

    const auto trivial = solve_equilibrium(nl, 1.0, 0.5);
    CHECK(std::abs(trivial.w) < 1e-10);
}

TEST_CASE("equilibrium slope agrees with finite differences along the branch") {
    const auto nl = Nonlinearity::ricker();
    const double nu = 50.0, h = 1e-4;
    const auto eq = solve_equilibrium(nl, nu, 4.0);
    const auto up = solve_equilibrium(nl, nu + h, eq.w);
    const auto dn = solve_equilibrium(nl, nu - h, eq.w);
    CHECK(eq.slope == doctest::Approx((up.w - dn.w) / (2.0 * h)).epsilon(1e-6));
}

TEST_CASE("equilibrium error paths") {
    // f = nu (1 + w): no root at nu = 1 (the residual is constant)
    const auto affine = Nonlinearity::polynomial({1.0, 1.0});
    CHECK_THROWS_AS(solve_equilibrium(affine, 1.0, 0.3), NoConvergence);
    // f = nu (1 + w^2): double root at nu = 1/2, w = 1 where 1 - f_w = 0
    const auto fold = Nonlinearity::polynomial({1.0, 0.0, 1.0});
    CHECK_THROWS_AS(solve_equilibrium(fold, 0.5, 1.2), FoldPoint);
}

TEST_CASE("delta closed forms for gamma-3 / ricker") {
    const auto k = gamma3();
    const auto nl = Nonlinearity::ricker();
    // lambda = 0: Delta = 1 - p = ln nu
    for (double nu : {40.0, 400.0, kNu0}) {
        const cplx d = delta(k, nl, nu, {0.0, 0.0}, 9.0);
        CHECK(d.real() == doctest::Approx(std::log(nu)).epsilon(1e-10));
        CHECK(std::abs(d.imag()) < 1e-12);
    }
    // the Hopf root itself
    CHECK(std::abs(delta(k, nl, kNu0, {0.0, kOmega0}, 9.0)) < 1e-12);
    // k = 2 overtone: 1 + 8/(-35 - 18 sqrt3 i)
    const cplx expect = 1.0 + 8.0 / cplx(-35.0, -18.0 * std::sqrt(3.0));
    const cplx got = delta(k, nl, kNu0, {0.0, 2.0 * kOmega0}, 9.0);
    CHECK(std::abs(got - expect) < 1e-11);
    CHECK(got.real() == doctest::Approx(0.87256).epsilon(1e-4));
    CHECK(got.imag() == doctest::Approx(0.11352).epsilon(1e-4));
}

TEST_CASE("delta root conjugacy") {
    const auto k = gamma3();
    const auto nl = Nonlinearity::ricker();
    const auto eq = solve_equilibrium(nl, kNu0, 9.0);
    for (const cplx lambda : {cplx{0.0, kOmega0}, cplx{0.1, 1.2}}) {
        const cplx a = delta(k, eq, lambda);
        const cplx b = delta(k, eq, std::conj(lambda));
        CHECK(std::abs(b - std::conj(a)) < 1e-13);
    }
}

TEST_CASE("delta partials: closed forms and finite-difference cross-check") {
    const auto k = gamma3();
    const auto nl = Nonlinearity::ricker();
    const auto eq = solve_equilibrium(nl, kNu0, 9.0);
    const cplx i_omega{0.0, kOmega0};
    const auto parts = delta_partials(k, nl, eq, i_omega);
    CHECK(parts.dlambda.real() == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(parts.dlambda.imag() == doctest::Approx(-0.75 * std::sqrt(3.0)).epsilon(1e-10));
    CHECK(std::abs(parts.dlambda) == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(parts.dnu == doctest::Approx(-std::exp(-9.0) / 8.0).epsilon(1e-8));

    // generic point, central differences
    const double nu = 2000.0, h = 1e-4;
    const cplx lambda{0.2, 1.1};
    const auto eq2 = solve_equilibrium(nl, nu, 8.0);
    const auto p2 = delta_partials(k, nl, eq2, lambda);
    const cplx fd_l =
        (delta(k, eq2, lambda + h) - delta(k, eq2, lambda - h)) / (2.0 * h);
    CHECK(std::abs(fd_l - p2.dlambda) < 1e-6);
    const cplx fd_nu = (delta(k, nl, nu + h, lambda, eq2.w) - delta(k, nl, nu - h, lambda, eq2.w)) /
                       (2.0 * h);
    CHECK(std::abs(fd_nu - p2.dnu) < 1e-6);
}

TEST_CASE("simplicity equivalence: both routes agree") {
    const auto k = gamma3();
    const auto nl = Nonlinearity::ricker();
    const auto eq = solve_equilibrium(nl, kNu0, 9.0);
    const cplx i_omega{0.0, kOmega0};
    const cplx route1 = delta_partials(k, nl, eq, i_omega).dlambda;
    const cplx route2 = eq.gain * laplace_chi_moment(k, i_omega, 1);
    CHECK(std::abs(route1 - route2) < 1e-14);
    CHECK((std::abs(route1) > 0.0) == (std::abs(route2) > 0.0));
}

TEST_CASE("find_hopf locates the analytic root and nothing else") {
    const auto k = gamma3();
    const auto cands = find_hopf(k, Nonlinearity::ricker(), 1e3, 1e4, 0.5, 3.0, ricker_search());
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].nu == doctest::Approx(kNu0).epsilon(1e-10));
    CHECK(std::abs(cands[0].omega - kOmega0) < 1e-10);
}

TEST_CASE("find_hopf negative controls") {
    const auto k = gamma3();
    HopfSearchOptions bh;
    bh.eq_guess = 2.0;
    CHECK(find_hopf(k, Nonlinearity::beverton_holt(), 1.5, 100.0, 0.5, 3.0, bh).empty());
    const auto k2 = normalize(BirthKernel::gamma(2, 0.5, 1.0, 0.5), NormalizationMode::ScaleB0);
    CHECK(find_hopf(k2, Nonlinearity::ricker(), 1e3, 1e4, 0.5, 3.0, ricker_search()).empty());
}

TEST_CASE("certify_hopf fills the four conditions") {
    const auto k = gamma3();
    const auto nl = Nonlinearity::ricker();
    const auto cands = find_hopf(k, nl, 1e3, 1e4, 0.5, 3.0, ricker_search());
    REQUIRE(cands.size() == 1);
    const auto cert = certify_hopf(k, nl, cands[0], 20, {}, 9.0);
    CHECK(cert.certified);
    CHECK(cert.ok_root);
    CHECK(cert.ok_nonresonance);
    CHECK(cert.ok_simplicity);
    CHECK(cert.ok_transversality);
    CHECK(cert.residual < 1e-12);
    CHECK(cert.nonresonance_argmin == 2);
    CHECK(cert.nonresonance_margin == doctest::Approx(0.87991).epsilon(2e-4));
    CHECK(cert.dlambda_abs == doctest::Approx(1.5).epsilon(1e-10));
    CHECK(cert.re_dlambda_dnu == doctest::Approx(std::exp(-9.0) / 24.0).epsilon(1e-8));
    CHECK(cert.transversality == doctest::Approx(-0.75 * std::exp(-9.0) / 8.0).epsilon(1e-8));
}

TEST_CASE("certification is deterministic bit for bit") {
    const auto k = gamma3();
    const auto nl = Nonlinearity::ricker();
    const HopfCandidate cand{kNu0, kOmega0};
    const auto a = certify_hopf(k, nl, cand, 20, {}, 9.0);
    const auto b = certify_hopf(k, nl, cand, 20, {}, 9.0);
    CHECK(std::memcmp(&a.nu0, &b.nu0, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.nonresonance_margin, &b.nonresonance_margin, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.transversality, &b.transversality, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.re_dlambda_dnu, &b.re_dlambda_dnu, sizeof(double)) == 0);
}

TEST_CASE("eigenbranch anchor, sign structure and first-order slope") {
    const auto k = gamma3();
    const auto nl = Nonlinearity::ricker();
    ContinuationOptions co;
    co.eq_guess = 9.0;
    const auto branch = continue_eigenbranch(k, nl, kNu0, kOmega0, 0.95 * kNu0, 1.05 * kNu0,
                                             0.005 * kNu0, co);
    CHECK_FALSE(branch.truncated_low);
    CHECK_FALSE(branch.truncated_high);
    for (const auto& s : branch.samples) {
        CHECK(s.omega > 0.0);
        if (s.nu < kNu0 - 1.0) CHECK(s.alpha < 0.0);
        if (s.nu > kNu0 + 1.0) CHECK(s.alpha > 0.0);
        if (std::abs(s.nu - kNu0) < 1.0) CHECK(std::abs(s.alpha) < 1e-12);
    }
    const auto near = eigenbranch_at(k, nl, kNu0, kOmega0, kNu0 + 50.0, 8, co);
    CHECK(near.alpha == doctest::Approx(50.0 * std::exp(-9.0) / 24.0).epsilon(4e-3));
}

TEST_CASE("eigenbranch slope consistency with the implicit derivative") {
    const auto k = gamma3();
    const auto nl = Nonlinearity::ricker();
    ContinuationOptions co;
    co.eq_guess = 9.0;
    const double h = 2.0;
    const auto lo = eigenbranch_at(k, nl, kNu0, kOmega0, kNu0 - h, 4, co);
    const auto hi = eigenbranch_at(k, nl, kNu0, kOmega0, kNu0 + h, 4, co);
    const cplx fd{(hi.alpha - lo.alpha) / (2.0 * h), (hi.omega - lo.omega) / (2.0 * h)};
    const auto eq = solve_equilibrium(nl, kNu0, 9.0);
    const auto parts = delta_partials(k, nl, eq, {0.0, kOmega0});
    const cplx analytic = -parts.dnu / parts.dlambda;
    CHECK(std::abs(fd - analytic) < 1e-6 * std::abs(analytic) + 1e-9);
}
