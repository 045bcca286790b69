#pragma once

// Quantifier elimination for the ZZ-sort (Presburger) fragment.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wb/syntax.hpp"

namespace wb {

inline constexpr std::int64_t kMaxModulus = 1000000;

/// One literal over variables x_0..x_{r-1}:
///   Ge:   a.x + c >= 0
///   Eq:   a.x + c  = 0
///   Div:  d |  a.x + c
///   NDiv: d !| a.x + c
struct PresLiteral {
    enum Kind { Ge, Eq, Div, NDiv } kind = Ge;
    std::vector<std::int64_t> a;
    std::int64_t c = 0;
    std::int64_t d = 0;

    bool operator==(const PresLiteral&) const = default;
    auto operator<=>(const PresLiteral&) const = default;
};

using PresConj = std::vector<PresLiteral>;

/// Quantifier-free set in disjunctive normal form. An empty disjunct list is
/// the empty set; a disjunct with no literals is all of Z^r.
struct PresburgerSet {
    std::vector<std::string> vars;
    std::vector<PresConj> disjuncts;

    std::size_t dim() const { return vars.size(); }
    bool contains(const std::vector<std::int64_t>& point) const;
    bool is_empty_syntactically() const { return disjuncts.empty(); }
    bool is_universe_syntactically() const { return disjuncts.size() == 1 && disjuncts[0].empty(); }

    /// Text in the formula grammar, e.g. "(0 <= x + -3 /\ x === 1 mod 2)".
    std::string to_string() const;
    /// Same set as a syntax tree over ZZ variables.
    FormulaPtr to_formula() const;
};

/// Eliminates all quantifiers. `vars` fixes the coordinate order; by default
/// the free variables in signature order. Throws DomainError on non-ZZ
/// symbols and ResourceError when moduli or the normal form outgrow the caps.
PresburgerSet presburger_qe(const Formula& f, const std::vector<std::string>& vars);
PresburgerSet presburger_qe(const Formula& f);

/// Truth of a quantifier-free set at a point.
bool pres_eval(const PresburgerSet& s, const std::vector<std::int64_t>& point);
/// Truth of a (possibly quantified) pure ZZ formula under an assignment of its
/// free variables, decided through elimination.
bool pres_eval(const Formula& f, const std::map<std::string, std::int64_t>& assignment);

struct Progression1D {
    enum Kind { Point, Up, Down } kind = Point;
    std::int64_t base = 0;
    std::int64_t step = 0; ///< >= 1 for Up/Down, 0 for Point

    bool contains(std::int64_t x) const;
    bool operator==(const Progression1D&) const = default;
    std::string to_string() const;
};

/// Points, upward and downward progressions whose union is the set (r = 1).
/// Upward progressions come first (by step, then base), then downward ones,
/// then points in increasing order.
std::vector<Progression1D> normalize_1d(const PresburgerSet& s);

bool progressions_contain(const std::vector<Progression1D>& ps, std::int64_t x);

} // namespace wb
