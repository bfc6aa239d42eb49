#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "homsim/dynamics.hpp"
#include "homsim/errors.hpp"
#include "homsim/level_scheme.hpp"
#include "homsim/units.hpp"
#include "two_level_reference.hpp"

using Catch::Matchers::WithinAbs;
using namespace homsim;

namespace {

const double kGamma = angular_from_mhz(20.0);

std::vector<double> detuning_grid(double half_span, std::size_t n) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = -half_span + 2.0 * half_span * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

SystemConfig lambda_config(double gauss) {
    SystemConfig cfg;
    cfg.scheme = LevelScheme::eight_level(kGamma, 0.75);
    cfg.field.gauss = gauss;
    cfg.lasers = {
        LaserDrive{Term::S12, Term::P12, angular_from_mhz(8.0), 0.0,
                   Eigen::Vector3cd(0.0, 1.0, 0.0), 0.0},
        LaserDrive{Term::D32, Term::P12, angular_from_mhz(6.0), 0.0,
                   Eigen::Vector3cd(1.0, 0.0, -1.0) / std::sqrt(2.0), 0.0},
    };
    return cfg;
}

}  // namespace

TEST_CASE("two-level excitation spectrum is the saturation-broadened Lorentzian", "[spectrum]") {
    const double omega = 0.7 * kGamma;
    SystemConfig cfg;
    cfg.scheme = LevelScheme::two_level(kGamma);
    cfg.lasers = {LaserDrive{Term::S12, Term::P12, omega, 0.0, Eigen::Vector3cd(0.0, 1.0, 0.0), 0.0}};

    const auto grid = detuning_grid(4.0 * kGamma, 81);
    const Spectrum spec = excitation_spectrum(cfg, 0, grid);
    REQUIRE(spec.p_population.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const reference::TwoLevelAtom atom{omega, grid[i], kGamma};
        CHECK_FALSE(spec.degenerate[i]);
        CHECK_THAT(spec.p_population[i], WithinAbs(reference::excited_population(atom), 1e-9));
    }
}

TEST_CASE("two-photon-resonant drive digs a dark dip into the spectrum", "[spectrum][slow]") {
    const auto cfg = lambda_config(3.0);
    const double span = angular_from_mhz(40.0);
    const auto grid = detuning_grid(span, 121);
    const Spectrum spec = excitation_spectrum(cfg, 0, grid);

    double max_pop = 0.0, min_pop = std::numeric_limits<double>::infinity();
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        REQUIRE_FALSE(spec.degenerate[i]);
        max_pop = std::max(max_pop, spec.p_population[i]);
        if (spec.p_population[i] < min_pop) {
            min_pop = spec.p_population[i];
            argmin = i;
        }
    }
    // Dips from coherent trapping sit within the Zeeman splitting of the
    // two-photon condition (red detuning is 0 here).
    CHECK(min_pop < 0.4 * max_pop);
    CHECK(std::abs(grid[argmin]) < angular_from_mhz(15.0));
    CHECK(max_pop > 0.01);
}

TEST_CASE("a far-detuned repump removes the central dark dip", "[spectrum][slow]") {
    auto cfg = lambda_config(3.0);
    cfg.lasers[1].detuning = angular_from_mhz(300.0);
    const auto grid = detuning_grid(angular_from_mhz(30.0), 61);
    const Spectrum spec = excitation_spectrum(cfg, 0, grid);

    // the profile inside the window is a single smooth resonance: the
    // population at line center exceeds the window edges and there is no
    // deep notch (> 60% drop) anywhere inside the central half of the scan
    double max_pop = 0.0;
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        REQUIRE_FALSE(spec.degenerate[i]);
        if (spec.p_population[i] > max_pop) {
            max_pop = spec.p_population[i];
            argmax = i;
        }
    }
    CHECK(std::abs(grid[argmax]) < angular_from_mhz(6.0));
    for (std::size_t i = grid.size() / 4; i < 3 * grid.size() / 4; ++i)
        CHECK(spec.p_population[i] > 0.05 * max_pop);
}

TEST_CASE("zero magnetic field leaves dark superpositions at every detuning", "[spectrum]") {
    const auto cfg = lambda_config(0.0);
    const auto grid = detuning_grid(angular_from_mhz(10.0), 5);
    const Spectrum spec = excitation_spectrum(cfg, 0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(spec.degenerate[i]);
        CHECK(std::isnan(spec.p_population[i]));
    }
}

TEST_CASE("spectrum input validation", "[spectrum]") {
    const auto cfg = lambda_config(3.0);
    CHECK_THROWS_AS(excitation_spectrum(cfg, 2, {0.0}), InvalidInput);
    CHECK_THROWS_AS(excitation_spectrum(cfg, 0, {std::numeric_limits<double>::quiet_NaN()}),
                    InvalidInput);
}
