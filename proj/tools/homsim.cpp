// homsim command-line front end.
//
// Subcommands map config documents to CSV/time-tag artifacts:
//   spectrum      steady-state excitation spectrum vs one laser detuning
//   correlations  g1 and g2 of the collected fluorescence
//   hom           two-emitter cross-correlation g2_tot(tau, phi) + contrast
//   simulate      Monte Carlo photon streams -> binary time-tag file
//   correlate     time-tag file -> coincidence histogram CSV
//
// Exit codes: 0 ok, 2 config/flag error, 3 numeric failure, 4 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "homsim/homsim.hpp"

namespace {

using namespace homsim;

std::vector<double> uniform_grid(double start, double stop, double step) {
    std::vector<double> out;
    const long n = std::lround((stop - start) / step);
    out.reserve(static_cast<std::size_t>(n) + 1);
    for (long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void stamp(CsvWriter& csv, const FullConfig& cfg, const std::string& what) {
    csv.comment(what);
    csv.comment("config_hash " + cfg.hash);
}

// g1 for the veto must cover lags out to where |g1|^2 < 1e-3; extend the
// grid until it does.
CorrelationSeries g1_covering_coherence(const Liouvillian& liou, const DensityMatrix& rho,
                                        const Eigen::MatrixXcd& collect) {
    for (double tau_max : {100.0, 400.0, 1600.0}) {
        CorrelationSeries s = g1(liou, rho, collect, uniform_grid(0.0, tau_max, 0.1));
        if (std::norm(s.values.back()) < 1e-3) return s;
    }
    throw Error("fluorescence coherence persists beyond 1.6 us; no interference window");
}

int cmd_spectrum(const std::string& config_path, const std::string& out_dir,
                 const std::string& laser_name, double from_mhz, double to_mhz, int points) {
    const FullConfig cfg = load_config(config_path);
    std::size_t laser_index = cfg.system.lasers.size();
    for (std::size_t i = 0; i < cfg.system.lasers.size(); ++i) {
        const bool green = cfg.system.lasers[i].lower == Term::S12;
        if ((laser_name == "green") == green) laser_index = i;
    }
    if (laser_index >= cfg.system.lasers.size())
        throw ConfigError("config has no " + laser_name + " laser to scan");

    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = angular_from_mhz(
            from_mhz + (to_mhz - from_mhz) * static_cast<double>(i) / static_cast<double>(points - 1));

    const Spectrum spec = excitation_spectrum(cfg.system, laser_index, grid);

    ensure_dir(out_dir);
    CsvWriter csv(join_path(out_dir, "spectrum.csv"));
    stamp(csv, cfg, "steady-state excitation spectrum; scanned laser: " + laser_name);
    csv.comment("degenerate=1 marks detunings with no unique steady state");
    csv.header({"detuning_mhz", "p_population", "counts_per_s", "degenerate"});
    for (std::size_t i = 0; i < spec.detuning.size(); ++i) {
        const double pop = spec.p_population[i];
        const double rate = spec.degenerate[i]
                                ? std::numeric_limits<double>::quiet_NaN()
                                : detected_rate_from_population(pop, cfg.system, cfg.chain, cfg.detector);
        csv.row({mhz_from_angular(spec.detuning[i]), pop, rate, spec.degenerate[i] ? 1.0 : 0.0});
    }
    csv.close();
    std::cerr << "wrote " << join_path(out_dir, "spectrum.csv") << "\n";
    return 0;
}

int cmd_correlations(const std::string& config_path, const std::string& out_dir, double tau_max,
                     double dt) {
    const FullConfig cfg = load_config(config_path);
    const Liouvillian liou = liouvillian_for(cfg.system);
    const DensityMatrix rho = steady_state(liou);
    const Eigen::MatrixXcd collect =
        collapse_channels(cfg.system, cfg.sim.collection_weights).collected;

    const auto grid = uniform_grid(0.0, tau_max, dt);
    const CorrelationSeries s1 = g1(liou, rho, collect, grid);
    const CorrelationSeries s2 = g2(liou, rho, collect, grid);
    const double rate_us = (collect.adjoint() * collect * rho.rho).trace().real();

    ensure_dir(out_dir);
    {
        CsvWriter csv(join_path(out_dir, "g1.csv"));
        stamp(csv, cfg, "first-order field correlation of the collected fluorescence");
        char line[96];
        std::snprintf(line, sizeof line, "collected emission rate %.6g photons/s", rate_us * 1e6);
        csv.comment(line);
        csv.header({"tau_ns", "re_g1", "im_g1", "abs2_g1"});
        for (std::size_t i = 0; i < s1.size(); ++i)
            csv.row({s1.tau_ns[i], s1.values[i].real(), s1.values[i].imag(), std::norm(s1.values[i])});
        csv.close();
    }
    {
        CsvWriter csv(join_path(out_dir, "g2.csv"));
        stamp(csv, cfg, "intensity correlation of the collected fluorescence");
        csv.header({"tau_ns", "g2"});
        for (std::size_t i = 0; i < s2.size(); ++i) csv.row({s2.tau_ns[i], s2.real_at(i)});
        csv.close();
    }
    std::cerr << "wrote g1.csv, g2.csv in " << out_dir << "\n";
    return 0;
}

int cmd_hom(const std::string& config_path, const std::string& out_dir,
            const std::vector<double>& phis_deg, double tau_max, double dt) {
    const FullConfig cfg = load_config(config_path);
    const Liouvillian liou = liouvillian_for(cfg.system);
    const DensityMatrix rho = steady_state(liou);
    const Eigen::MatrixXcd collect =
        collapse_channels(cfg.system, cfg.sim.collection_weights).collected;

    const auto grid = uniform_grid(0.0, tau_max, dt);
    const CorrelationSeries s1 = g1(liou, rho, collect, grid);
    const CorrelationSeries s2 = g2(liou, rho, collect, grid);

    const double signal = effective_count_rate(cfg.system, cfg.chain, cfg.detector);
    const BackgroundMix bg =
        accidental_floor(signal, cfg.detector.dark_rate, cfg.stray_rate_cps);

    ensure_dir(out_dir);
    double par_meas = -1.0, perp_meas = -1.0, par_ideal = -1.0, perp_ideal = -1.0;
    for (double phi : phis_deg) {
        const double phi_rad = phi * kTwoPi / 360.0;
        const CorrelationSeries ideal = hom_g2_tot(s1, s2, phi_rad);
        const CorrelationSeries smeared = convolve_response(ideal, cfg.detector);
        const CorrelationSeries measured = bg.apply(smeared);

        char name[48];
        std::snprintf(name, sizeof name, "hom_phi%02d.csv", static_cast<int>(std::lround(phi)));
        CsvWriter csv(join_path(out_dir, name));
        stamp(csv, cfg, "cross-port coincidence correlation behind the beam splitter");
        char line[128];
        std::snprintf(line, sizeof line,
                      "phi_deg %g; response_fwhm_ns %g; background_fraction %.6g", phi,
                      cfg.detector.response_fwhm, bg.b);
        csv.comment(line);
        csv.header({"tau_ns", "g2_tot_ideal", "g2_tot_convolved", "g2_tot_measured"});
        for (std::size_t i = 0; i < ideal.size(); ++i)
            csv.row({ideal.tau_ns[i], ideal.real_at(i), smeared.real_at(i), measured.real_at(i)});
        csv.close();

        if (phi == 0.0) {
            par_ideal = ideal.real_at(0);
            par_meas = measured.real_at(0);
        }
        if (phi == 90.0) {
            perp_ideal = ideal.real_at(0);
            perp_meas = measured.real_at(0);
        }
    }

    {
        CsvWriter csv(join_path(out_dir, "polarization_scan.csv"));
        stamp(csv, cfg, "tau=0 coincidence level vs polarization angle");
        csv.comment("law column is the ideal 0.5*sin^2(phi)");
        csv.header({"phi_deg", "g2_tot_zero_ideal", "g2_tot_zero_measured", "law"});
        for (double phi : phis_deg) {
            const double phi_rad = phi * kTwoPi / 360.0;
            const CorrelationSeries ideal = hom_g2_tot(s1, s2, phi_rad);
            const CorrelationSeries measured =
                bg.apply(convolve_response(ideal, cfg.detector));
            const double sp = std::sin(phi_rad);
            csv.row({phi, ideal.real_at(0), measured.real_at(0), 0.5 * sp * sp});
        }
        csv.close();
    }

    if (par_ideal >= 0.0 && perp_ideal > 0.0) {
        CsvWriter csv(join_path(out_dir, "contrast.csv"));
        stamp(csv, cfg, "two-photon interference contrast 1 - parallel/perpendicular at tau=0");
        csv.header({"ideal_parallel", "ideal_perpendicular", "ideal_contrast", "measured_parallel",
                    "measured_perpendicular", "measured_contrast"});
        const ContrastResult ideal_c = contrast(par_ideal, 0.0, perp_ideal, 0.0);
        const ContrastResult meas_c = contrast(par_meas, 0.0, perp_meas, 0.0);
        csv.row({par_ideal, perp_ideal, ideal_c.value, par_meas, perp_meas, meas_c.value});
        csv.close();
    }
    std::cerr << "wrote hom curves in " << out_dir << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, double duration_s,
                 std::uint64_t seed, bool seed_set, double phi_deg) {
    FullConfig cfg = load_config(config_path);
    if (duration_s > 0.0) cfg.sim.duration_s = duration_s;
    if (seed_set) cfg.sim.seed = seed;

    const Liouvillian liou = liouvillian_for(cfg.system);
    const DensityMatrix rho = steady_state(liou);
    const Eigen::MatrixXcd collect =
        collapse_channels(cfg.system, cfg.sim.collection_weights).collected;
    const CorrelationSeries veto_g1 = g1_covering_coherence(liou, rho, collect);

    TrajectoryConfig traj{cfg.sim.duration_s, cfg.sim.seed, cfg.sim.time_quantum_ps};
    std::cerr << "simulating ion 1...\n";
    const auto ion1 = mcwf_photon_stream(cfg.system, traj, Channel::I1, Origin::Ion1,
                                         cfg.sim.collection_weights);
    std::cerr << "simulating ion 2...\n";
    const auto ion2 = mcwf_photon_stream(cfg.system, traj, Channel::I2, Origin::Ion2,
                                         cfg.sim.collection_weights);
    std::cerr << "ion 1: " << ion1.size() << " photons, ion 2: " << ion2.size() << " photons\n";

    // The collection chain (solid angle, fiber coupling, filters) sits
    // between each ion and the beam splitter, so its losses thin the streams
    // before routing and interference.
    const double eta = cfg.chain.efficiency();
    const auto col1 = thin_stream(ion1, eta, derive_seed(cfg.sim.seed, 101));
    const auto col2 = thin_stream(ion2, eta, derive_seed(cfg.sim.seed, 102));
    std::cerr << "collected: " << col1.size() << " / " << col2.size() << " photons\n";

    // Stray light is uncorrelated background just like detector dark counts,
    // so it enters the stream as extra Poisson events on each output port.
    DetectorModel det = cfg.detector;
    det.dark_rate += cfg.stray_rate_cps;
    const RoutingResult routed =
        route_and_interfere(col1, col2, phi_deg, veto_g1, det, cfg.sim.duration_s,
                            derive_seed(cfg.sim.seed, 100));
    std::cerr << "vetoed " << routed.vetoed << " photons in a " << routed.window_ns
              << " ns window; I3 " << routed.i3.size() << ", I4 " << routed.i4.size() << "\n";

    ensure_dir(out_dir);
    const std::string path = join_path(out_dir, "tags.homtag");
    TimeTagMetadata meta{cfg.sim.duration_s, cfg.sim.seed, cfg.hash};
    write_timetags(path, times_of(routed.i3), times_of(routed.i4), meta);
    std::cerr << "wrote " << path << "\n";
    return 0;
}

int cmd_correlate(const std::string& file, const std::string& out_dir, double bin_ns,
                  double window_ns, const std::string& mode, double duration_override) {
    HistogramConfig hc;
    hc.bin_width_ns = bin_ns;
    hc.window_ns = window_ns;
    hc.mode = mode == "tac" ? HistogramMode::TacStartStop : HistogramMode::Multistop;
    hc.validate();

    const TimeTagData data = read_timetags(file);
    const HistogramResult hist = correlate_timetags(data, hc, duration_override);

    ensure_dir(out_dir);
    CsvWriter csv(join_path(out_dir, "histogram.csv"));
    csv.comment("coincidence histogram; tau = t(I4) - t(I3), bins half-open [lo, hi)");
    csv.comment(std::string("mode ") + histogram_mode_name(hist.mode));
    char line[192];
    std::snprintf(line, sizeof line,
                  "bin_ns %g; window_ns %g; rate_I3 %.6g cps; rate_I4 %.6g cps; duration_s %g",
                  hist.bin_width_ns, hist.window_ns, hist.rate_a, hist.rate_b, hist.duration_s);
    csv.comment(line);
    if (data.meta) csv.comment("config_hash " + data.meta->config_hash);
    csv.comment("g2 is rate-product normalized; g2_plateau divides by the far-bin mean");
    csv.header({"tau_ns", "counts", "g2", "stderr", "g2_plateau"});
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        csv.row({hist.bin_centers_ns[i], static_cast<double>(hist.counts[i]), hist.g2[i],
                 hist.g2_err[i],
                 hist.plateau_available ? hist.g2_plateau[i]
                                        : std::numeric_limits<double>::quiet_NaN()});
    csv.close();
    std::cerr << "wrote " << join_path(out_dir, "histogram.csv") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven-ion fluorescence correlation and two-photon interference toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::string laser_name = "green", mode = "multistop", tag_file;
    double from_mhz = -60.0, to_mhz = 60.0;
    int points = 121;
    double tau_max = 100.0, dt = 0.1;
    std::vector<double> phis = {0.0, 26.0, 47.0, 64.0, 90.0};
    double duration = 0.0, phi_single = 0.0, bin_ns = 1.0, window_ns = 50.0;
    std::uint64_t seed = 0;

    auto* sp = app.add_subcommand("spectrum", "excitation spectrum vs laser detuning");
    sp->add_option("--config", config_path, "config JSON")->required();
    sp->add_option("--out", out_dir, "output directory");
    sp->add_option("--laser", laser_name, "which laser to scan")
        ->check(CLI::IsMember({"green", "red"}));
    sp->add_option("--from", from_mhz, "scan start, MHz");
    sp->add_option("--to", to_mhz, "scan end, MHz");
    sp->add_option("--points", points, "number of grid points")->check(CLI::Range(2, 100000));

    auto* co = app.add_subcommand("correlations", "g1 and g2 of one ion's fluorescence");
    co->add_option("--config", config_path, "config JSON")->required();
    co->add_option("--out", out_dir, "output directory");
    co->add_option("--tau-max", tau_max, "largest lag, ns")->check(CLI::PositiveNumber);
    co->add_option("--dt", dt, "lag grid step, ns")->check(CLI::PositiveNumber);

    auto* ho = app.add_subcommand("hom", "two-emitter cross-port correlation vs phi");
    ho->add_option("--config", config_path, "config JSON")->required();
    ho->add_option("--out", out_dir, "output directory");
    ho->add_option("--phi", phis, "polarization angles, degrees");
    ho->add_option("--tau-max", tau_max, "largest lag, ns")->check(CLI::PositiveNumber);
    ho->add_option("--dt", dt, "lag grid step, ns")->check(CLI::PositiveNumber);

    auto* si = app.add_subcommand("simulate", "Monte Carlo photon streams -> time-tag file");
    si->add_option("--config", config_path, "config JSON")->required();
    si->add_option("--out", out_dir, "output directory");
    si->add_option("--duration", duration, "run length, s (overrides config)")
        ->check(CLI::PositiveNumber);
    auto* seed_opt = si->add_option("--seed", seed, "RNG seed (overrides config)");
    si->add_option("--phi", phi_single, "polarization angle, degrees");

    auto* cr = app.add_subcommand("correlate", "time-tag file -> coincidence histogram");
    cr->add_option("file", tag_file, "time-tag file")->required();
    cr->add_option("--out", out_dir, "output directory");
    cr->add_option("--bin", bin_ns, "bin width, ns")->check(CLI::PositiveNumber);
    cr->add_option("--window", window_ns, "half window, ns")->check(CLI::PositiveNumber);
    cr->add_option("--mode", mode, "estimator")->check(CLI::IsMember({"multistop", "tac"}));
    cr->add_option("--duration", duration, "override run duration, s")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sp->parsed()) return cmd_spectrum(config_path, out_dir, laser_name, from_mhz, to_mhz, points);
        if (co->parsed()) return cmd_correlations(config_path, out_dir, tau_max, dt);
        if (ho->parsed()) return cmd_hom(config_path, out_dir, phis, tau_max, dt);
        if (si->parsed())
            return cmd_simulate(config_path, out_dir, duration, seed, seed_opt->count() > 0,
                                phi_single);
        if (cr->parsed()) return cmd_correlate(tag_file, out_dir, bin_ns, window_ns, mode, duration);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 4;
    } catch (const FormatError& e) {
        std::cerr << "file format error: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
