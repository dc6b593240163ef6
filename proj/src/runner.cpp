#include "agehopf/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "agehopf/errors.hpp"
#include "agehopf/periodic.hpp"
#include "agehopf/renewal.hpp"

namespace agehopf {

namespace {

namespace fs = std::filesystem;

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int resolve_threads(const RunOptions& opts, int jobs) {
    int n = opts.threads;
    if (n <= 0) {
        if (const char* env = std::getenv("AGEHOPF_THREADS")) n = std::atoi(env);
    }
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    return std::min(n, std::max(1, jobs));
}

/// Ordered parallel map: results land by index regardless of completion order.
template <typename F>
void parallel_for(int jobs, int threads, F&& body) {
    if (threads <= 1) {
        for (int i = 0; i < jobs; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < jobs; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct Context {
    Scenario scenario;
    BirthKernel kernel;
    Nonlinearity nl;
    fs::path out_dir;

    Context(const Scenario& sc, const RunOptions& opts)
        : scenario(sc), kernel(sc.make_kernel()), nl(sc.make_nonlinearity()),
          out_dir(opts.out_dir.empty() ? sc.output.dir : opts.out_dir) {
        fs::create_directories(out_dir);
    }

    std::ofstream open_csv(const std::string& name, const std::string& columns) const {
        std::ofstream out(out_dir / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output file " + (out_dir / name).string());
        out << "# agehopf " << name << "\n";
        out << "# scenario_hash=" << scenario.hash << "\n";
        out << "# kernel=" << kernel.id() << " nonlinearity=" << nl.id() << "\n";
        const auto& t = scenario.analysis.tol;
        out << "# tolerances: root=" << num(t.root_tol) << " resonance=" << num(t.res_tol)
            << " simplicity=" << num(t.simp_tol) << " transversality=" << num(t.trans_tol)
            << " branch=" << num(scenario.analysis.branch_tol) << "\n";
        out << columns << "\n";
        return out;
    }

    void require_ranges(const char* sub) const {
        if (scenario.analysis.nu_range.empty() || scenario.analysis.omega_range.empty())
            throw std::invalid_argument(std::string(sub) +
                                        " requires analysis.nu_range and analysis.omega_range");
    }

    std::vector<HopfCandidate> candidates() const {
        require_ranges("certify");
        HopfSearchOptions so;
        so.nu_points = scenario.analysis.scan_nu_points;
        so.omega_points = scenario.analysis.scan_omega_points;
        so.eq_guess = scenario.analysis.equilibrium_guess;
        so.tol = scenario.analysis.tol;
        return find_hopf(kernel, nl, scenario.analysis.nu_range[0], scenario.analysis.nu_range[1],
                         scenario.analysis.omega_range[0], scenario.analysis.omega_range[1], so);
    }

    std::vector<HopfCertificate> certificates() const {
        std::vector<HopfCertificate> certs;
        for (const auto& c : candidates())
            certs.push_back(certify_hopf(kernel, nl, c, scenario.analysis.k_max,
                                         scenario.analysis.tol,
                                         scenario.analysis.equilibrium_guess));
        return certs;
    }

    HopfCertificate first_certified() const {
        for (const auto& c : certificates())
            if (c.certified) return c;
        throw NoSolution("no certified Hopf point in the scanned rectangle");
    }

    InitialAgeDensity perturbation_density(const Equilibrium& eq, double omega0) const {
        const auto& p = scenario.analysis.perturbation;
        if (p.kind == "none") return InitialAgeDensity::equilibrium(eq.w, kernel.mortality());
        if (p.kind == "cosine") {
            const double theta = p.omega ? *p.omega : omega0;
            return InitialAgeDensity::equilibrium_cosine(eq.w, kernel.mortality(), p.epsilon,
                                                         theta);
        }
        if (p.kind == "bump")
            return InitialAgeDensity::equilibrium_bump(eq.w, kernel.mortality(), p.edges,
                                                       p.values);
        if (p.kind == "table") return InitialAgeDensity::table(p.edges, p.values);
        return InitialAgeDensity::scaled_exponential(p.kappa * eq.w, kernel.mortality());
    }

    bool wants(const std::string& fmt) const {
        for (const auto& f : scenario.output.formats)
            if (f == fmt) return true;
        return false;
    }
};

void write_certificate_json(std::ostream& out, const HopfCertificate& c, int indent) {
    const std::string pad(indent, ' ');
    const std::string pad2(indent + 2, ' ');
    out << pad << "{\n";
    out << pad2 << "\"nu0\": " << num(c.nu0) << ",\n";
    out << pad2 << "\"omega0\": " << num(c.omega0) << ",\n";
    out << pad2 << "\"residual\": " << num(c.residual) << ",\n";
    out << pad2 << "\"nonresonance_margin\": " << num(c.nonresonance_margin) << ",\n";
    out << pad2 << "\"nonresonance_argmin\": " << c.nonresonance_argmin << ",\n";
    out << pad2 << "\"dlambda_abs\": " << num(c.dlambda_abs) << ",\n";
    out << pad2 << "\"dlambda\": [" << num(c.dlambda.real()) << ", " << num(c.dlambda.imag())
        << "],\n";
    out << pad2 << "\"transversality\": " << num(c.transversality) << ",\n";
    out << pad2 << "\"re_dlambda_dnu\": " << num(c.re_dlambda_dnu) << ",\n";
    out << pad2 << "\"verdicts\": {"
        << "\"root\": " << (c.ok_root ? "true" : "false")
        << ", \"nonresonance\": " << (c.ok_nonresonance ? "true" : "false")
        << ", \"simplicity\": " << (c.ok_simplicity ? "true" : "false")
        << ", \"transversality\": " << (c.ok_transversality ? "true" : "false")
        << ", \"certified\": " << (c.certified ? "true" : "false") << "}\n";
    out << pad << "}";
}

int run_certify(const Context& ctx) {
    const auto certs = ctx.certificates();
    std::ofstream out(ctx.out_dir / "candidates.json", std::ios::binary);
    out << "{\n  \"scenario_hash\": \"" << ctx.scenario.hash << "\",\n  \"candidates\": [";
    for (std::size_t i = 0; i < certs.size(); ++i) {
        out << (i ? ",\n" : "\n");
        write_certificate_json(out, certs[i], 4);
    }
    out << (certs.empty() ? "]" : "\n  ]") << "\n}\n";

    const HopfCertificate* best = nullptr;
    for (const auto& c : certs)
        if (c.certified) {
            best = &c;
            break;
        }
    if (!best) {
        std::cout << "certify: no certified Hopf point (" << certs.size() << " candidate"
                  << (certs.size() == 1 ? "" : "s") << " examined)\n";
        return 2;
    }
    std::ofstream cert_out(ctx.out_dir / "certificate.json", std::ios::binary);
    write_certificate_json(cert_out, *best, 0);
    cert_out << "\n";
    std::cout << "certify: certified Hopf point nu0=" << num(best->nu0)
              << " omega0=" << num(best->omega0) << "\n";
    return 0;
}

int run_simulate(const Context& ctx) {
    const auto& a = ctx.scenario.analysis;
    if (!a.nu) throw std::invalid_argument("simulate requires analysis.nu");
    const Equilibrium eq = solve_equilibrium(ctx.nl, *a.nu, a.equilibrium_guess, a.tol.eq_tol);

    double omega0 = 0.0;
    if (a.perturbation.kind == "cosine" && !a.perturbation.omega)
        omega0 = ctx.first_certified().omega0;
    const auto psi = ctx.perturbation_density(eq, omega0);

    const auto sol = simulate_renewal(ctx.kernel, ctx.nl, *a.nu, psi, a.horizon, a.dt);
    AnalyzeOptions ao;
    ao.settle_fraction = a.settle_fraction;
    const auto diag = analyze_series(sol, ao);

    auto ts = ctx.open_csv("timeseries.csv", "t,v");
    ts << "# nu=" << num(*a.nu) << " dt=" << num(a.dt) << " horizon=" << num(sol.horizon) << "\n";
    if (sol.status == RenewalSolution::Status::BlewUp)
        ts << "# blowup_time=" << num(sol.blowup_time) << "\n";
    for (std::size_t k = 0; k < sol.v.size(); ++k)
        ts << num(sol.time(static_cast<int>(k))) << "," << num(sol.v[k]) << "\n";

    const double t_final = (static_cast<int>(sol.v.size()) - 1) * sol.dt;
    std::vector<double> ages;
    for (double age = 0.0; age <= ctx.kernel.a_max(); age += a.dt) ages.push_back(age);
    const auto density = reconstruct_density(sol, psi, ctx.kernel.mortality(), t_final, ages);
    auto dc = ctx.open_csv("density.csv", "a,u");
    dc << "# nu=" << num(*a.nu) << " dt=" << num(a.dt) << " t=" << num(t_final) << "\n";
    for (std::size_t j = 0; j < ages.size(); ++j)
        dc << num(ages[j]) << "," << num(density[j]) << "\n";

    std::cout << "simulate: " << (sol.status == RenewalSolution::Status::BlewUp
                                      ? "finite-time blowup at t=" + num(sol.blowup_time)
                                      : "completed")
              << " sigma_fit=" << num(diag.sigma_fit) << " omega_fit=" << num(diag.omega_fit)
              << " amplitude=" << num(diag.amplitude) << " period=" << num(diag.period) << "\n";
    return 0;
}

int run_branch(const Context& ctx) {
    const auto cert = ctx.first_certified();
    PeriodicSolveOptions po;
    po.order = ctx.scenario.analysis.order;
    po.branch_tol = ctx.scenario.analysis.branch_tol;
    po.eq_guess = ctx.scenario.analysis.equilibrium_guess;
    const auto branch =
        continue_periodic_branch(ctx.kernel, ctx.nl, cert, ctx.scenario.analysis.s_grid, po);

    auto out = ctx.open_csv("branch.csv", "s,nu,omega_physical,period,amplitude_mode1,residual");
    out << "# nu0=" << num(branch.nu0) << " omega0=" << num(branch.omega0)
        << " order=" << branch.order_used << (branch.truncated ? " truncated" : "") << "\n";
    for (const auto& p : branch.points) {
        const double omega_phys = p.omega * branch.omega0;
        out << num(p.s) << "," << num(p.nu) << "," << num(omega_phys) << ","
            << num(2.0 * M_PI / omega_phys) << "," << num(p.s) << "," << num(p.residual) << "\n";
    }

    if (ctx.wants("orbits")) {
        for (std::size_t i = 0; i < branch.points.size(); ++i) {
            const auto& p = branch.points[i];
            char name[48];
            std::snprintf(name, sizeof name, "orbit_%03zu.csv", i);
            auto oc = ctx.open_csv(name, "t,x");
            oc << "# s=" << num(p.s) << " nu=" << num(p.nu) << "\n";
            const auto orbit =
                orbit_state(p, ctx.nl, ctx.scenario.analysis.equilibrium_guess, po.u1_phase);
            const int samples = 256;
            for (int j = 0; j <= samples; ++j) {
                const double t = 2.0 * M_PI * j / samples;
                oc << num(t) << "," << num(orbit.eval(t)) << "\n";
            }
        }
    }

    const char* direction = "undetermined";
    if (branch.points.size() >= 2)
        direction = branch.points.back().nu > branch.nu0 ? "supercritical (empirical)"
                                                         : "subcritical (empirical)";
    std::cout << "branch: " << branch.points.size() << " points, order=" << branch.order_used
              << (branch.truncated ? ", truncated" : "") << ", direction: " << direction << "\n";
    return 0;
}

int run_sweep(const Context& ctx, const RunOptions& opts) {
    ctx.require_ranges("sweep");
    const auto cert = ctx.first_certified();
    const auto& a = ctx.scenario.analysis;
    const int n = a.sweep_points;
    std::vector<EigenBranchSample> rows(n);
    std::vector<char> ok(n, 0);

    const int threads = resolve_threads(opts, n);
    parallel_for(n, threads, [&](int i) {
        const double nu = a.nu_range[0] + (a.nu_range[1] - a.nu_range[0]) * i / (n - 1);
        ContinuationOptions co;
        co.root_tol = a.tol.root_tol;
        co.eq_guess = a.equilibrium_guess;
        try {
            rows[i] = eigenbranch_at(ctx.kernel, ctx.nl, cert.nu0, cert.omega0, nu, 32, co);
            ok[i] = 1;
        } catch (const NumericError&) {
            ok[i] = 0;
        }
    });

    auto out = ctx.open_csv("stability.csv", "nu,alpha,omega");
    out << "# nu0=" << num(cert.nu0) << " omega0=" << num(cert.omega0) << "\n";
    for (int i = 0; i < n; ++i) {
        if (!ok[i]) continue;
        out << num(rows[i].nu) << "," << num(rows[i].alpha) << "," << num(rows[i].omega) << "\n";
    }
    std::cout << "sweep: " << n << " grid points\n";
    return 0;
}

int run_diagram(const Context& ctx, const RunOptions& opts) {
    ctx.require_ranges("diagram");
    const auto cert = ctx.first_certified();
    const auto& a = ctx.scenario.analysis;
    const int n = a.diagram_points;

    struct Row {
        double nu = 0.0, amplitude = 0.0, sigma = 0.0, omega = 0.0;
        bool blewup = false;
    };
    std::vector<Row> rows(n);

    const int threads = resolve_threads(opts, n);
    parallel_for(n, threads, [&](int i) {
        Row& row = rows[i];
        row.nu = a.nu_range[0] + (a.nu_range[1] - a.nu_range[0]) * i / (n - 1);
        const Equilibrium eq =
            solve_equilibrium(ctx.nl, row.nu, a.equilibrium_guess, a.tol.eq_tol);
        const auto psi = ctx.perturbation_density(eq, cert.omega0);
        const auto sol = simulate_renewal(ctx.kernel, ctx.nl, row.nu, psi, a.horizon, a.dt);
        if (sol.status == RenewalSolution::Status::BlewUp) {
            row.blewup = true;
            return;
        }
        AnalyzeOptions ao;
        ao.settle_fraction = a.settle_fraction;
        const auto diag = analyze_series(sol, ao);
        row.amplitude = diag.amplitude;
        row.sigma = diag.sigma_fit;
        row.omega = diag.omega_fit;
    });

    auto out = ctx.open_csv("diagram.csv", "nu,amplitude,sigma_fit,omega_fit");
    out << "# nu0=" << num(cert.nu0) << " dt=" << num(a.dt) << " horizon=" << num(a.horizon)
        << "\n";
    for (const auto& row : rows) {
        if (row.blewup) {
            out << num(row.nu) << ",blowup,,\n";
            continue;
        }
        out << num(row.nu) << "," << num(row.amplitude) << "," << num(row.sigma) << ","
            << num(row.omega) << "\n";
    }
    std::cout << "diagram: " << n << " grid points\n";
    return 0;
}

}  // namespace

int run(const std::string& subcommand, const Scenario& scenario, const RunOptions& opts) {
    try {
        Context ctx(scenario, opts);
        if (subcommand == "certify") return run_certify(ctx);
        if (subcommand == "simulate") return run_simulate(ctx);
        if (subcommand == "branch") return run_branch(ctx);
        if (subcommand == "sweep") return run_sweep(ctx, opts);
        if (subcommand == "diagram") return run_diagram(ctx, opts);
        std::cerr << "error: unknown subcommand '" << subcommand << "'\n";
        return 1;
    } catch (const NoSolution& e) {
        // "nothing found" from certification is distinct from runtime failure
        if (std::string(e.what()).find("no certified") != std::string::npos) {
            std::cout << e.what() << "\n";
            return 2;
        }
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace agehopf
