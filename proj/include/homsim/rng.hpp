#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace homsim {

// splitmix64, used to derive uncorrelated sub-seeds from one run seed so
// that independent stages (ion 1, ion 2, routing, detectors) never share a
// stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_tag) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream_tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// mt19937_64 with hand-rolled variate transforms.  The standard
// distribution objects are implementation-defined, which would break the
// bit-identical-output guarantee across standard libraries; these
// transforms are pinned.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // uniform on [0, 1) with 53-bit resolution
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1] (safe as a log argument)
    double uniform_positive() { return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log(uniform_positive()) / rate; }

    // Box-Muller pair, second variate cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u = uniform_positive();
        const double v = uniform();
        const double r = std::sqrt(-2.0 * std::log(u));
        const double a = 2.0 * std::numbers::pi * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection-free Lemire-style reduction is not needed for our n;
        // rejection sampling keeps exact uniformity and determinism
        const std::uint64_t limit = ~static_cast<std::uint64_t>(0) - (~static_cast<std::uint64_t>(0) % n);
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace homsim
