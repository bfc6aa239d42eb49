#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "homsim/correlator.hpp"
#include "homsim/errors.hpp"
#include "homsim/timetag.hpp"
#include "histogram_reference.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace homsim;

namespace {

HistogramConfig config(double bin_ns, double window_ns,
                       HistogramMode mode = HistogramMode::Multistop) {
    HistogramConfig cfg;
    cfg.bin_width_ns = bin_ns;
    cfg.window_ns = window_ns;
    cfg.mode = mode;
    return cfg;
}

std::vector<std::uint64_t> poisson_stream(double rate_per_s, double duration_s,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> gap(rate_per_s);
    std::vector<std::uint64_t> out;
    double t_s = 0.0;
    for (;;) {
        t_s += gap(rng);
        if (t_s >= duration_s) break;
        out.push_back(static_cast<std::uint64_t>(t_s * 1e12));
    }
    return out;
}

}  // namespace

TEST_CASE("histogram layout validation", "[correlator]") {
    CHECK_NOTHROW(config(1.0, 50.0).validate());
    CHECK_THROWS_AS(config(0.3, 50.0).validate(), InvalidInput);     // 50/0.3 not integer
    CHECK_THROWS_AS(config(0.0, 50.0).validate(), InvalidInput);
    CHECK_THROWS_AS(config(1.0, -5.0).validate(), InvalidInput);
    CHECK_THROWS_AS(config(0.0005, 0.001).validate(), InvalidInput);  // sub-picosecond bin

    const auto cfg = config(0.5, 16.0);
    CHECK(cfg.bin_ps() == 500);
    CHECK(cfg.window_ps() == 16000);
    CHECK(cfg.bin_count() == 64);
}

TEST_CASE("multistop counts every in-window pair into half-open bins", "[correlator]") {
    const std::vector<std::uint64_t> a = {1000, 5000};
    const std::vector<std::uint64_t> b = {1200, 3900, 7800};
    const HistogramResult r = correlate_multistop(a, b, config(1.0, 3.0));

    REQUIRE(r.counts.size() == 6);
    CHECK(r.counts == std::vector<std::uint64_t>{0, 1, 0, 1, 0, 2});
    CHECK_THAT(r.bin_centers_ns.front(), WithinAbs(-2.5, 1e-12));
    CHECK_THAT(r.bin_centers_ns.back(), WithinAbs(2.5, 1e-12));
    CHECK(r.total_counts() == 4);
}

TEST_CASE("window boundaries are half-open: -W in, +W out, 0 in the positive bin",
          "[correlator]") {
    const HistogramResult low =
        correlate_multistop({10000}, {7000, 13000}, config(1.0, 3.0));
    CHECK(low.counts == std::vector<std::uint64_t>{1, 0, 0, 0, 0, 0});

    const HistogramResult zero = correlate_multistop({5000}, {5000}, config(1.0, 3.0));
    CHECK(zero.counts == std::vector<std::uint64_t>{0, 0, 0, 1, 0, 0});
}

TEST_CASE("multistop matches the brute-force pair counter exactly", "[correlator]") {
    std::mt19937_64 rng(7);
    std::vector<std::uint64_t> a, b;
    std::uint64_t ta = 0, tb = 0;
    for (int i = 0; i < 1000; ++i) {
        a.push_back(ta += 1 + rng() % 4000);
        b.push_back(tb += 1 + rng() % 4000);
    }
    const auto cfg = config(1.0, 50.0);
    const HistogramResult r = correlate_multistop(a, b, cfg);
    const auto expected = reference::brute_force_pairs(a, b, cfg.bin_ps(), cfg.window_ps());
    CHECK(r.counts == expected);
    CHECK(r.total_counts() > 0);

    // also with strongly clustered input
    std::vector<std::uint64_t> c;
    std::uint64_t tc = 0;
    for (int i = 0; i < 500; ++i) {
        tc += (i % 10 == 0) ? 200000 : 17;
        c.push_back(tc);
    }
    const HistogramResult rc = correlate_multistop(c, c, cfg);
    CHECK(rc.counts == reference::brute_force_pairs(c, c, cfg.bin_ps(), cfg.window_ps()));
}

TEST_CASE("swapping channels mirrors the histogram", "[correlator]") {
    std::mt19937_64 rng(11);
    std::vector<std::uint64_t> a, b;
    std::uint64_t ta = 0, tb = 0;
    for (int i = 0; i < 400; ++i) {
        a.push_back((ta += 1 + rng() % 3000) * 2);      // even picoseconds
        b.push_back((tb += 1 + rng() % 3000) * 2 + 1);  // odd picoseconds
    }
    // every lag is odd, so no pair sits on a bin edge and the mirror is exact
    const auto cfg = config(1.0, 50.0);
    const HistogramResult ab = correlate_multistop(a, b, cfg);
    const HistogramResult ba = correlate_multistop(b, a, cfg);
    const std::size_t n = ab.counts.size();
    for (std::size_t i = 0; i < n; ++i)
        CHECK(ab.counts[i] == ba.counts[n - 1 - i]);
}

TEST_CASE("independent Poisson streams normalize to a flat g2 of one", "[correlator][slow]") {
    const double rate = 4e5, duration = 0.25;
    const auto a = poisson_stream(rate, duration, 101);
    const auto b = poisson_stream(rate, duration, 202);
    const auto cfg = config(1.0, 50.0);
    const double ra = static_cast<double>(a.size()) / duration;
    const double rb = static_cast<double>(b.size()) / duration;
    const HistogramResult r = normalize(correlate_multistop(a, b, cfg), ra, rb, duration);

    std::vector<double> observed, expected;
    const double per_bin = ra * rb * 1e-9 * duration;
    for (std::size_t i = 0; i < r.counts.size(); ++i) {
        observed.push_back(static_cast<double>(r.counts[i]));
        expected.push_back(per_bin);
    }
    const auto chi = reference::pearson_chi2(observed, expected);
    REQUIRE(chi.ndf == r.counts.size());
    CHECK(chi.reduced() > 0.5);
    CHECK(chi.reduced() < 1.5);

    double mean = 0.0;
    for (double g : r.g2) mean += g;
    mean /= static_cast<double>(r.g2.size());
    CHECK_THAT(mean, WithinAbs(1.0, 0.05));

    // plateau normalization agrees with the rate product for flat input
    REQUIRE(r.plateau_available);
    double plateau_mean = 0.0;
    for (double g : r.g2_plateau) plateau_mean += g;
    plateau_mean /= static_cast<double>(r.g2_plateau.size());
    CHECK_THAT(plateau_mean, WithinAbs(1.0, 0.05));
}

TEST_CASE("TAC accepts only the first stop strictly after an accepted start", "[correlator]") {
    SECTION("second stop in the window is ignored") {
        const HistogramResult r = correlate_tac({1000}, {1500, 1600}, config(1.0, 3.0));
        CHECK(r.counts == std::vector<std::uint64_t>{0, 0, 0, 1, 0, 0});
    }
    SECTION("simultaneous stop does not trigger") {
        const HistogramResult r = correlate_tac({1000}, {1000}, config(1.0, 3.0));
        CHECK(r.total_counts() == 0);
    }
    SECTION("starts during the ramp are discarded") {
        // start 1000 pairs with stop 1500; start 1200 arrives while ramping
        const HistogramResult r =
            correlate_tac({1000, 1200, 5000}, {600, 1500, 1600, 20000}, config(1.0, 3.0));
        CHECK(r.total_counts() == 1);
        CHECK(r.counts[3] == 1);  // tau = 0.5 ns
    }
    SECTION("a full-scale ramp re-arms after the window") {
        // start 1000 ramps to 4000 unanswered; start 2000 is ignored;
        // start 4100 is live again and catches stop 4200
        const HistogramResult r = correlate_tac({1000, 2000, 4100}, {4200}, config(1.0, 3.0));
        CHECK(r.total_counts() == 1);
        CHECK(r.counts[3] == 1);  // tau = 0.1 ns
    }
    SECTION("negative bins stay empty") {
        const HistogramResult r = correlate_tac({5000}, {2000, 5500}, config(1.0, 3.0));
        CHECK(r.counts == std::vector<std::uint64_t>{0, 0, 0, 1, 0, 0});
    }
}

TEST_CASE("TAC histograms are a per-bin subset of multistop and show pile-up",
          "[correlator][slow]") {
    const double duration = 0.05;
    const auto starts = poisson_stream(1e5, duration, 303);
    const auto stops = poisson_stream(6e7, duration, 404);  // 1/rate = 16.7 ns
    const auto cfg = config(1.0, 50.0);
    const HistogramResult multi = correlate_multistop(starts, stops, cfg);
    const HistogramResult tac = correlate_tac(starts, stops, config(1.0, 50.0, HistogramMode::TacStartStop));

    // every TAC pair is also a multistop pair
    for (std::size_t i = 0; i < tac.counts.size(); ++i)
        CHECK(tac.counts[i] <= multi.counts[i]);
    CHECK(tac.total_counts() <= starts.size());

    // multistop is flat; the TAC tail decays like the first-stop survival
    const std::size_t near = 50, mid = 66, far = 99;  // tau = 0.5, 16.5, 49.5 ns
    CHECK(static_cast<double>(multi.counts[far]) >
          0.8 * static_cast<double>(multi.counts[near]));
    const double decay = static_cast<double>(tac.counts[mid]) /
                         static_cast<double>(tac.counts[near]);
    CHECK(decay > 0.25);
    CHECK(decay < 0.50);  // expected e^-1 = 0.37 at one mean stop spacing
    CHECK(static_cast<double>(tac.counts[far]) <
          0.2 * static_cast<double>(tac.counts[near]));
}

TEST_CASE("TAC agrees with multistop when stops are rare", "[correlator][slow]") {
    const double duration = 0.5;
    const auto starts = poisson_stream(1.2e5, duration, 505);
    const auto stops = poisson_stream(1.2e5, duration, 606);
    const auto cfg = config(1.0, 50.0);
    const HistogramResult multi = correlate_multistop(starts, stops, cfg);
    const HistogramResult tac =
        correlate_tac(starts, stops, config(1.0, 50.0, HistogramMode::TacStartStop));

    std::uint64_t multi_pos = 0, diff = 0;
    for (std::size_t i = 50; i < 100; ++i) {
        multi_pos += multi.counts[i];
        diff += multi.counts[i] - tac.counts[i];
    }
    REQUIRE(multi_pos > 200);
    CHECK(static_cast<double>(diff) / static_cast<double>(multi_pos) < 0.06);
}

TEST_CASE("normalization fills g2, errors, and the plateau variant", "[correlator]") {
    // single pair at tau = 0.1 ns plus far-bin pairs to anchor the plateau
    const std::vector<std::uint64_t> a = {10000};
    const std::vector<std::uint64_t> b = {6100, 10100, 13600};
    const auto cfg = config(1.0, 4.0);
    const HistogramResult r = normalize(correlate_multistop(a, b, cfg), 10.0, 30.0, 2.0);

    REQUIRE(r.counts.size() == 8);
    CHECK(r.counts == std::vector<std::uint64_t>{1, 0, 0, 0, 1, 0, 0, 1});
    const double expected = 10.0 * 30.0 * 1e-9 * 2.0;  // 6e-7 pairs per bin
    CHECK_THAT(r.g2[4], WithinRel(1.0 / expected, 1e-12));
    CHECK_THAT(r.g2_err[4], WithinRel(1.0 / expected, 1e-12));
    CHECK_THAT(r.g2[1], WithinAbs(0.0, 0.0));
    CHECK(r.duration_s == 2.0);
    CHECK(r.rate_a == 10.0);
    CHECK(r.rate_b == 30.0);

    // plateau bins: |center| >= 3 ns -> bins 0 and 7, one count each
    REQUIRE(r.plateau_available);
    CHECK_THAT(r.g2_plateau[0], WithinAbs(1.0, 1e-12));
    CHECK_THAT(r.g2_plateau[4], WithinAbs(1.0, 1e-12));
    CHECK_THAT(r.g2_plateau[1], WithinAbs(0.0, 1e-12));
}

TEST_CASE("plateau normalization needs far-bin counts", "[correlator]") {
    const HistogramResult r =
        normalize(correlate_multistop({5000}, {5100}, config(1.0, 4.0)), 1.0, 1.0, 1.0);
    CHECK_FALSE(r.plateau_available);
    CHECK(r.g2_plateau.empty());
    CHECK(r.g2[4] > 0.0);
}

TEST_CASE("TAC plateau normalization uses only positive lags", "[correlator]") {
    // one count in the outer positive quarter anchors the plateau even
    // though every negative bin is empty by construction
    const HistogramResult r = normalize(
        correlate_tac({10000}, {13600}, config(1.0, 4.0, HistogramMode::TacStartStop)),
        5.0, 5.0, 1.0);
    REQUIRE(r.plateau_available);
    CHECK_THAT(r.g2_plateau[7], WithinAbs(1.0, 1e-12));
}

TEST_CASE("degenerate correlator input is rejected", "[correlator]") {
    CHECK_THROWS_AS(correlate_multistop({}, {1}, config(1.0, 4.0)), NoData);
    CHECK_THROWS_AS(correlate_multistop({1}, {}, config(1.0, 4.0)), NoData);
    CHECK_THROWS_AS(correlate_multistop({5, 3}, {1}, config(1.0, 4.0)), InvalidInput);
    CHECK_THROWS_AS(correlate_tac({1}, {4, 2}, config(1.0, 4.0)), InvalidInput);
    CHECK_THROWS_AS(normalize(HistogramResult{}, 1.0, 1.0, 0.0), NoData);
    CHECK_THROWS_AS(normalize(HistogramResult{}, 0.0, 1.0, 1.0), NoData);
}

TEST_CASE("time-tag files feed the correlator end to end", "[correlator]") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "homsim_corr_test";
    fs::create_directories(dir);
    const std::string path = (dir / "pairs.homtag").string();

    const std::vector<std::uint64_t> i3 = {10000, 20000};
    const std::vector<std::uint64_t> i4 = {10100, 22500};
    write_timetags(path, i3, i4, TimeTagMetadata{4.0, 99, "cafe"});

    const TimeTagData data = read_timetags(path);
    const HistogramResult r = correlate_timetags(data, config(1.0, 4.0));
    CHECK(r.total_counts() == 2);  // taus 0.1 and 2.5 ns
    CHECK_THAT(r.rate_a, WithinRel(2.0 / 4.0, 1e-12));
    CHECK_THAT(r.rate_b, WithinRel(2.0 / 4.0, 1e-12));
    CHECK(r.duration_s == 4.0);

    // override wins over metadata
    const HistogramResult r2 = correlate_timetags(data, config(1.0, 4.0), 8.0);
    CHECK(r2.duration_s == 8.0);
    CHECK_THAT(r2.rate_a, WithinRel(0.25, 1e-12));

    // no metadata and no override: cannot normalize
    TimeTagData bare;
    bare.i3 = i3;
    bare.i4 = i4;
    CHECK_THROWS_AS(correlate_timetags(bare, config(1.0, 4.0)), NoData);

    // starting on the other channel mirrors every lag
    HistogramConfig swapped = config(1.0, 4.0);
    swapped.start_channel = 1;
    const HistogramResult rs = correlate_timetags(data, swapped);
    const std::size_t n = rs.counts.size();
    REQUIRE(n == r.counts.size());
    for (std::size_t i = 0; i < n; ++i) CHECK(rs.counts[i] == r.counts[n - 1 - i]);

    HistogramConfig bad = config(1.0, 4.0);
    bad.start_channel = 2;
    CHECK_THROWS_AS(correlate_timetags(data, bad), InvalidInput);

    fs::remove_all(dir);
}
