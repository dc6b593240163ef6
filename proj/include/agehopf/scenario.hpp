#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agehopf/kernel.hpp"
#include "agehopf/nonlinearity.hpp"
#include "agehopf/spectral.hpp"

namespace agehopf {

/// One scenario file drives every subcommand, so certificates, simulations
/// and branches share exactly one model definition.
struct Scenario {
    struct KernelBlock {
        std::string family;  // "gamma" | "piecewise" | "table"
        int shape = 3;
        double rate = 1.0;
        double scale = 1.0;
        std::vector<double> breakpoints;
        std::vector<double> levels;
        double mortality = 0.0;
        std::string normalization;  // "scale_b0" | "solve_m" | "assert"
    } kernel;

    struct NonlinearityBlock {
        std::string family;  // "ricker" | "beverton_holt" | "poly"
        std::vector<double> coefficients;
    } nonlinearity;

    struct Perturbation {
        std::string kind = "cosine";  // "none" | "cosine" | "bump" | "table" | "exponential"
        double epsilon = 1e-3;
        std::optional<double> omega;  // cosine frequency; defaults to the certified omega0
        std::vector<double> edges;    // bump cells / table breakpoints
        std::vector<double> values;   // bump factors / table values
        double kappa = 1.0;           // exponential amplitude
    };

    struct AnalysisBlock {
        std::vector<double> nu_range;     // [lo, hi]
        std::vector<double> omega_range;  // [lo, hi]
        double equilibrium_guess = 1.0;
        std::optional<double> nu;         // simulate at this parameter value
        double dt = 0.01;
        double horizon = 2000.0;
        double settle_fraction = 0.2;
        Perturbation perturbation;
        std::vector<double> s_grid;       // defaults to 0:1e-3:1e-2
        int k_max = 20;
        int order = 32;                   // Fourier truncation N
        int scan_nu_points = 48;
        int scan_omega_points = 48;
        int diagram_points = 15;
        int sweep_points = 64;
        SpectralTolerances tol{};
        double branch_tol = 1e-10;
        QuadratureConfig quad{};
    } analysis;

    struct OutputBlock {
        std::string dir = "out";
        std::vector<std::string> formats{"csv", "json"};  // may include "orbits"
    } output;

    std::string source_path;
    std::string hash;  // FNV-1a over the scenario file bytes

    BirthKernel make_kernel() const;      // normalized per the scenario mode
    Nonlinearity make_nonlinearity() const;
};

/// Parse + validate.  Unknown keys are rejected; validation errors name the
/// offending key with its dotted path.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& text, const std::string& source_name = "<memory>");

}  // namespace agehopf
