#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "homsim/errors.hpp"
#include "homsim/level_scheme.hpp"
#include "homsim/units.hpp"

namespace homsim {

// One monochromatic drive laser.  `rabi` is the peak coupling before
// geometry factors, `detuning` the laser frequency minus the zero-field
// transition frequency, both rad/us.  `polarization` holds the complex
// (sigma-, pi, sigma+) amplitudes in the spherical basis and must be unit
// norm.  `linewidth` is an optional Lorentzian FWHM adding pure dephasing.
struct LaserDrive {
    Term lower;
    Term upper;
    double rabi = 0.0;
    double detuning = 0.0;
    Eigen::Vector3cd polarization = Eigen::Vector3cd(0.0, 1.0, 0.0);
    double linewidth = 0.0;

    void validate() const {
        if (!std::isfinite(rabi) || !std::isfinite(detuning) || !std::isfinite(linewidth))
            throw ConfigError("laser has a non-finite parameter");
        if (rabi < 0.0) throw ConfigError("Rabi frequency must be >= 0");
        if (linewidth < 0.0) throw ConfigError("laser linewidth must be >= 0");
        if (!polarization.allFinite()) throw ConfigError("laser polarization has NaN entries");
        if (std::abs(polarization.norm() - 1.0) > 1e-12)
            throw ConfigError("laser polarization must be unit norm");
        const bool green = lower == Term::S12 && upper == Term::P12;
        const bool red = lower == Term::D32 && upper == Term::P12;
        if (!green && !red)
            throw ConfigError("laser transition must be S1/2<->P1/2 or D3/2<->P1/2");
    }
};

struct MagneticField {
    double gauss = 0.0;
    // Zeeman shift per Gauss per g*mJ, rad/us.
    double zeeman_unit = angular_from_mhz(kZeemanMhzPerGauss);

    void validate() const {
        if (!std::isfinite(gauss) || gauss < 0.0)
            throw ConfigError("magnetic field magnitude must be >= 0");
        if (!std::isfinite(zeeman_unit) || zeeman_unit <= 0.0)
            throw ConfigError("zeeman unit must be > 0");
    }
};

// Full physical description of one ion plus its drives.
struct SystemConfig {
    LevelScheme scheme;
    std::vector<LaserDrive> lasers;
    MagneticField field;

    void validate() const {
        scheme.validate();
        field.validate();
        bool seen_green = false, seen_red = false;
        for (const auto& l : lasers) {
            l.validate();
            if (!scheme.has_term(l.lower) || !scheme.has_term(l.upper))
                throw ConfigError("laser references a term not in the scheme");
            if (l.lower == Term::S12) {
                if (seen_green) throw ConfigError("more than one laser on S1/2<->P1/2");
                seen_green = true;
            } else {
                if (seen_red) throw ConfigError("more than one laser on D3/2<->P1/2");
                seen_red = true;
            }
        }
    }

    const LaserDrive* laser_on(Term lower_term) const {
        for (const auto& l : lasers)
            if (l.lower == lower_term) return &l;
        return nullptr;
    }
};

}  // namespace homsim
