#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "homsim/detection.hpp"
#include "homsim/errors.hpp"
#include "homsim/operators.hpp"
#include "homsim/system_config.hpp"
#include "homsim/units.hpp"

namespace homsim {

// Run-control parameters from the `simulation` config section.
struct SimulationParams {
    double duration_s = 1.0;
    std::uint64_t seed = 1;
    std::int64_t time_quantum_ps = 1;
    Eigen::Vector3cd collection_weights = default_collection_weights();
};

// Everything one config document describes: the ion and its drives, the
// collection chain, the detector, and simulation plumbing.  `hash` is a
// 64-bit FNV-1a digest of the canonical JSON text, embedded in every output
// so results can be traced to their exact inputs.
struct FullConfig {
    SystemConfig system;
    CollectionChain chain;
    DetectorModel detector;
    double stray_rate_cps = 0.0;
    SimulationParams sim;
    std::string hash;
};

inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

[[noreturn]] inline void config_fail(const std::string& path, const std::string& why) {
    throw ConfigError(path + ": " + why);
}

inline const nlohmann::json& member(const nlohmann::json& j, const char* key,
                                    const std::string& path) {
    if (!j.is_object()) config_fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) config_fail(path + "." + key, "missing");
    return *it;
}

inline double number(const nlohmann::json& j, const char* key, const std::string& path) {
    const auto& v = member(j, key, path);
    if (!v.is_number()) config_fail(path + "." + key, "expected a number");
    return v.get<double>();
}

inline double number_or(const nlohmann::json& j, const char* key, const std::string& path,
                        double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return number(j, key, path);
}

inline Eigen::Vector3cd parse_polarization(const nlohmann::json& v, const std::string& path) {
    if (v.is_string()) {
        const std::string name = v.get<std::string>();
        const double r = 1.0 / std::sqrt(2.0);
        if (name == "pi") return {0.0, 1.0, 0.0};
        if (name == "sigma_plus") return {0.0, 0.0, 1.0};
        if (name == "sigma_minus") return {1.0, 0.0, 0.0};
        if (name == "perp") return {r, 0.0, -r};  // linear, perpendicular to B
        config_fail(path, "unknown polarization name '" + name +
                              "' (use pi, sigma_plus, sigma_minus, perp, or a 3-component array)");
    }
    if (!v.is_array() || v.size() != 3)
        config_fail(path, "polarization must be a name or a 3-component array");
    Eigen::Vector3cd out;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& c = v[i];
        if (c.is_number()) {
            out(static_cast<Eigen::Index>(i)) = c.get<double>();
        } else if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number()) {
            out(static_cast<Eigen::Index>(i)) =
                std::complex<double>(c[0].get<double>(), c[1].get<double>());
        } else {
            config_fail(path, "polarization components are numbers or [re, im] pairs");
        }
    }
    const double n = out.norm();
    if (n == 0.0) config_fail(path, "polarization must not be the zero vector");
    return out / n;
}

}  // namespace detail

inline FullConfig parse_config(const nlohmann::json& j) {
    FullConfig out;
    out.hash = fnv1a_hex(j.dump());

    // scheme
    const auto& scheme = detail::member(j, "scheme", "config");
    const auto& type_v = detail::member(scheme, "type", "scheme");
    if (!type_v.is_string()) detail::config_fail("scheme.type", "expected a string");
    const std::string type = type_v.get<std::string>();
    const double gamma = angular_from_mhz(detail::number(scheme, "gamma_p_mhz", "scheme"));
    if (!(gamma > 0.0)) detail::config_fail("scheme.gamma_p_mhz", "must be > 0");
    if (type == "eight_level") {
        const double branch = detail::number(scheme, "branch_to_s", "scheme");
        if (!(branch > 0.0) || !(branch < 1.0))
            detail::config_fail("scheme.branch_to_s", "must lie in (0, 1)");
        double g_s = 2.0, g_p = 2.0 / 3.0, g_d = 4.0 / 5.0;
        if (scheme.contains("lande")) {
            const auto& lande = scheme["lande"];
            g_s = detail::number_or(lande, "s", "scheme.lande", g_s);
            g_p = detail::number_or(lande, "p", "scheme.lande", g_p);
            g_d = detail::number_or(lande, "d", "scheme.lande", g_d);
        }
        out.system.scheme = LevelScheme::eight_level(gamma, branch, g_s, g_p, g_d);
    } else if (type == "two_level") {
        out.system.scheme = LevelScheme::two_level(gamma);
    } else {
        detail::config_fail("scheme.type", "unknown scheme '" + type + "'");
    }

    // lasers
    const auto& lasers = detail::member(j, "lasers", "config");
    if (!lasers.is_array() || lasers.empty())
        detail::config_fail("lasers", "expected a non-empty array");
    for (std::size_t i = 0; i < lasers.size(); ++i) {
        const std::string path = "lasers[" + std::to_string(i) + "]";
        const auto& lj = lasers[i];
        const auto& trans = detail::member(lj, "transition", path);
        if (!trans.is_string()) detail::config_fail(path + ".transition", "expected a string");
        LaserDrive drive;
        const std::string t = trans.get<std::string>();
        if (t == "green") {
            drive.lower = Term::S12;
            drive.upper = Term::P12;
        } else if (t == "red") {
            drive.lower = Term::D32;
            drive.upper = Term::P12;
        } else {
            detail::config_fail(path + ".transition", "must be 'green' or 'red'");
        }
        drive.rabi = angular_from_mhz(detail::number(lj, "rabi_mhz", path));
        drive.detuning = angular_from_mhz(detail::number(lj, "detuning_mhz", path));
        drive.linewidth = angular_from_mhz(detail::number_or(lj, "linewidth_mhz", path, 0.0));
        if (lj.contains("polarization"))
            drive.polarization = detail::parse_polarization(lj["polarization"], path + ".polarization");
        try {
            drive.validate();
        } catch (const ConfigError& e) {
            detail::config_fail(path, e.what());
        }
        out.system.lasers.push_back(drive);
    }

    // field
    const auto& field = detail::member(j, "field", "config");
    out.system.field.gauss = detail::number(field, "gauss", "field");
    try {
        out.system.validate();
    } catch (const ConfigError& e) {
        detail::config_fail("config", e.what());
    }

    // detection (optional; defaults are usable)
    if (j.contains("detection")) {
        const auto& det = j["detection"];
        const std::string path = "detection";
        out.chain.solid_angle_fraction =
            detail::number_or(det, "solid_angle_fraction", path, out.chain.solid_angle_fraction);
        out.chain.fiber_coupling =
            detail::number_or(det, "fiber_coupling", path, out.chain.fiber_coupling);
        out.chain.optical_transmission =
            detail::number_or(det, "optical_transmission", path, out.chain.optical_transmission);
        out.detector.quantum_efficiency =
            detail::number_or(det, "quantum_efficiency", path, out.detector.quantum_efficiency);
        out.detector.response_fwhm =
            detail::number_or(det, "response_fwhm_ns", path, out.detector.response_fwhm);
        out.detector.dark_rate = detail::number_or(det, "dark_rate_cps", path, out.detector.dark_rate);
        out.detector.dead_time = detail::number_or(det, "dead_time_ns", path, out.detector.dead_time);
        out.stray_rate_cps = detail::number_or(det, "stray_rate_cps", path, 0.0);
        try {
            out.chain.validate();
            out.detector.validate();
        } catch (const InvalidInput& e) {
            detail::config_fail(path, e.what());
        }
        if (out.stray_rate_cps < 0.0) detail::config_fail(path + ".stray_rate_cps", "must be >= 0");
    }

    // simulation (optional)
    if (j.contains("simulation")) {
        const auto& sim = j["simulation"];
        const std::string path = "simulation";
        out.sim.duration_s = detail::number_or(sim, "duration_s", path, out.sim.duration_s);
        if (!(out.sim.duration_s > 0.0)) detail::config_fail(path + ".duration_s", "must be > 0");
        if (sim.contains("seed")) {
            const auto& s = sim["seed"];
            if (!s.is_number_unsigned()) detail::config_fail(path + ".seed", "must be a non-negative integer");
            out.sim.seed = s.get<std::uint64_t>();
        }
        out.sim.time_quantum_ps = static_cast<std::int64_t>(
            detail::number_or(sim, "time_quantum_ps", path, 1.0));
        if (out.sim.time_quantum_ps < 1) detail::config_fail(path + ".time_quantum_ps", "must be >= 1");
        if (sim.contains("collection_weights"))
            out.sim.collection_weights =
                detail::parse_polarization(sim["collection_weights"], path + ".collection_weights");
    }

    return out;
}

inline FullConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": not valid JSON: " + e.what());
    }
    return parse_config(j);
}

}  // namespace homsim
