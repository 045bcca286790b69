#pragma once

// Random well-sorted formulas over all three sorts, used by property tests.

#include <random>
#include <string>
#include <vector>

#include "wb/syntax.hpp"

namespace gen {

struct Scope {
    std::vector<std::string> vf, rf, zz;
};

struct FormulaGen {
    std::mt19937_64 rng;
    int counter = 0;
    explicit FormulaGen(std::uint64_t seed) : rng(seed) {}

    int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    template <class T>
    const T& choose(const std::vector<T>& v) { return v[static_cast<std::size_t>(pick(0, static_cast<int>(v.size()) - 1))]; }

    wb::TermPtr vf_term(const Scope& s, int depth)
    {
        using namespace wb::build;
        if (depth <= 0 || pick(0, 2) == 0) {
            if (!s.vf.empty() && pick(0, 3) != 0) return var(choose(s.vf), wb::Sort::VF);
            return pick(0, 4) == 0 ? t_symbol() : lit(pick(-3, 3), wb::Sort::VF);
        }
        switch (pick(0, 2)) {
        case 0: return add(vf_term(s, depth - 1), vf_term(s, depth - 1));
        case 1: return mul(vf_term(s, depth - 1), vf_term(s, depth - 1));
        default: return neg(vf_term(s, depth - 1));
        }
    }

    wb::TermPtr rf_term(const Scope& s)
    {
        using namespace wb::build;
        switch (pick(0, 3)) {
        case 0: return s.rf.empty() ? lit(pick(0, 4), wb::Sort::RF) : var(choose(s.rf), wb::Sort::RF);
        case 1: return lit(pick(0, 4), wb::Sort::RF);
        case 2: return ac(vf_term(s, 1));
        default: return s.rf.empty() ? ac(vf_term(s, 1)) : mul(var(choose(s.rf), wb::Sort::RF), ac(vf_term(s, 1)));
        }
    }

    wb::TermPtr zz_term(const Scope& s)
    {
        using namespace wb::build;
        wb::TermPtr base = (!s.zz.empty() && pick(0, 1)) ? var(choose(s.zz), wb::Sort::ZZ) : ord(vf_term(s, 1));
        switch (pick(0, 2)) {
        case 0: return base;
        case 1: return add(base, lit(pick(-2, 2), wb::Sort::ZZ));
        default: return add(base, s.zz.empty() ? ord(vf_term(s, 1)) : var(choose(s.zz), wb::Sort::ZZ));
        }
    }

    wb::FormulaPtr atom(const Scope& s)
    {
        using namespace wb::build;
        switch (pick(0, 5)) {
        case 5:
            // pins a valuation, so small boxes may miss witnesses
            if (!s.vf.empty()) return eq(ord(var(s.vf.back(), wb::Sort::VF)), lit(pick(-3, 3), wb::Sort::ZZ));
            [[fallthrough]];
        case 0: return eq(vf_term(s, 2), vf_term(s, 1));
        case 1: return eq(rf_term(s), rf_term(s));
        case 2: return le(zz_term(s), zz_term(s));
        case 3: return cong(zz_term(s), lit(pick(0, 2), wb::Sort::ZZ), pick(2, 3));
        default: return eq(zz_term(s), lit(pick(-1, 2), wb::Sort::ZZ));
        }
    }

    /// Exactly `quants` nested quantifiers of random sorts; `allowed` masks
    /// the sorts (bit 0 VF, bit 1 RF, bit 2 ZZ).
    wb::FormulaPtr formula(Scope s, int quants, int depth, int allowed = 7)
    {
        using namespace wb::build;
        int choice;
        if (quants > 0) choice = depth <= 0 ? 5 : pick(2, 6);
        else choice = depth <= 0 ? 0 : pick(0, 4);
        switch (choice) {
        case 0:
        case 1: return atom(s);
        case 2: return conj(formula(s, quants, depth - 1, allowed), formula(s, 0, depth - 1, allowed));
        case 3: return disj(formula(s, 0, depth - 1, allowed), formula(s, quants, depth - 1, allowed));
        case 4: return negate(formula(s, quants, depth - 1, allowed));
        default: {
            std::vector<wb::Sort> sorts;
            if (allowed & 1) sorts.push_back(wb::Sort::VF);
            if (allowed & 2) sorts.push_back(wb::Sort::RF);
            if (allowed & 4) sorts.push_back(wb::Sort::ZZ);
            wb::Sort so = choose(sorts);
            std::string v = "b" + std::to_string(counter++);
            if (so == wb::Sort::VF) s.vf.push_back(v);
            else if (so == wb::Sort::RF) s.rf.push_back(v);
            else s.zz.push_back(v);
            auto body = formula(s, quants - 1, 2, allowed);
            return pick(0, 1) ? exists(v, so, body) : forall(v, so, body);
        }
        }
    }
};

} // namespace gen
