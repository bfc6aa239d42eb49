#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "homsim/errors.hpp"
#include "homsim/units.hpp"

namespace homsim {

// Fine-structure terms of the low-lying Lambda system.
enum class Term { S12, P12, D32 };

inline const char* term_name(Term t) {
    switch (t) {
        case Term::S12: return "S12";
        case Term::P12: return "P12";
        case Term::D32: return "D32";
    }
    return "?";
}

struct Level {
    Term term;
    int twice_j;   // doubled total angular momentum of the term
    int twice_mj;  // doubled magnetic quantum number
};

// One spontaneous-decay channel between two terms.  `rate` is the total
// decay rate of the upper term (rad/us); `branching` the fraction of it
// that goes through this channel.
struct DecayChannel {
    Term upper;
    Term lower;
    double rate;
    double branching;
};

struct LevelScheme {
    std::vector<Level> levels;
    std::vector<DecayChannel> decay_channels;
    std::map<Term, double> lande_g;

    std::size_t dim() const { return levels.size(); }

    int index_of(Term term, int twice_mj) const {
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (levels[i].term == term && levels[i].twice_mj == twice_mj)
                return static_cast<int>(i);
        return -1;
    }

    bool has_term(Term term) const {
        for (const auto& l : levels)
            if (l.term == term) return true;
        return false;
    }

    std::vector<int> indices_of_term(Term term) const {
        std::vector<int> out;
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (levels[i].term == term) out.push_back(static_cast<int>(i));
        return out;
    }

    int twice_j_of(Term term) const {
        for (const auto& l : levels)
            if (l.term == term) return l.twice_j;
        throw ConfigError(std::string("term not present in scheme: ") + term_name(term));
    }

    // Shared sanity checks: positive rates, per-upper-term branching sums to 1.
    void validate() const {
        if (levels.empty()) throw ConfigError("scheme has no levels");
        for (std::size_t i = 0; i < levels.size(); ++i) {
            const auto& l = levels[i];
            if (l.twice_j < 0 || std::abs(l.twice_mj) > l.twice_j)
                throw ConfigError("level " + std::to_string(i) + " has |mJ| > J");
            for (std::size_t k = 0; k < i; ++k)
                if (levels[k].term == l.term && levels[k].twice_mj == l.twice_mj)
                    throw ConfigError("duplicate level (term, mJ)");
        }
        std::map<Term, double> branch_sum;
        for (const auto& c : decay_channels) {
            if (!(c.rate > 0.0) || !std::isfinite(c.rate))
                throw ConfigError("decay rate must be strictly positive");
            if (!(c.branching > 0.0) || !std::isfinite(c.branching))
                throw ConfigError("branching fraction must be strictly positive");
            if (!has_term(c.upper) || !has_term(c.lower))
                throw ConfigError("decay channel references a term not in the scheme");
            branch_sum[c.upper] += c.branching;
        }
        for (const auto& [term, sum] : branch_sum)
            if (std::abs(sum - 1.0) > 1e-12)
                throw ConfigError(std::string("branching fractions of ") + term_name(term) +
                                  " decay must sum to 1");
        for (const auto& [term, g] : lande_g)
            if (!std::isfinite(g)) throw ConfigError("non-finite Lande g-factor");
    }

    // Additional structural requirements of the full 8-level Lambda scheme.
    void validate_eight_level() const {
        validate();
        if (levels.size() != 8) throw ConfigError("expected exactly 8 levels");
        static const std::vector<Level> expected = {
            {Term::S12, 1, -1}, {Term::S12, 1, 1},
            {Term::P12, 1, -1}, {Term::P12, 1, 1},
            {Term::D32, 3, -3}, {Term::D32, 3, -1},
            {Term::D32, 3, 1},  {Term::D32, 3, 3},
        };
        for (const auto& e : expected)
            if (index_of(e.term, e.twice_mj) < 0 ||
                levels[static_cast<std::size_t>(index_of(e.term, e.twice_mj))].twice_j != e.twice_j)
                throw ConfigError("8-level scheme must contain S1/2(+-1/2), P1/2(+-1/2), D3/2(+-1/2,+-3/2)");
    }

    // The standard 8-level Lambda scheme.  Rates in rad/us; `branch_to_s`
    // is the P1/2 -> S1/2 branching fraction.
    static LevelScheme eight_level(double gamma_p, double branch_to_s,
                                   double g_s = 2.0, double g_p = 2.0 / 3.0,
                                   double g_d = 4.0 / 5.0) {
        LevelScheme s;
        s.levels = {
            {Term::S12, 1, -1}, {Term::S12, 1, 1},
            {Term::P12, 1, -1}, {Term::P12, 1, 1},
            {Term::D32, 3, -3}, {Term::D32, 3, -1},
            {Term::D32, 3, 1},  {Term::D32, 3, 3},
        };
        s.decay_channels = {
            {Term::P12, Term::S12, gamma_p, branch_to_s},
            {Term::P12, Term::D32, gamma_p, 1.0 - branch_to_s},
        };
        s.lande_g = {{Term::S12, g_s}, {Term::P12, g_p}, {Term::D32, g_d}};
        s.validate_eight_level();
        return s;
    }

    // Test hook: a textbook two-level atom.  Realized as J=0 ground,
    // J=1 (mJ=0) excited so the single pi coupling coefficient is exactly 1
    // and the only decay path is sqrt(gamma)|g><e|.
    static LevelScheme two_level(double gamma) {
        LevelScheme s;
        s.levels = {{Term::S12, 0, 0}, {Term::P12, 2, 0}};
        s.decay_channels = {{Term::P12, Term::S12, gamma, 1.0}};
        s.lande_g = {{Term::S12, 0.0}, {Term::P12, 0.0}};
        s.validate();
        return s;
    }
};

}  // namespace homsim
