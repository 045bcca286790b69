#pragma once

// Abstract syntax, concrete grammar and sort checker for the three-sorted
// Denef-Pas language with polynomial constants from Z[t].

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wb/error.hpp"

namespace wb {

enum class Sort { VF, RF, ZZ };

std::string_view sort_name(Sort s);
std::optional<Sort> sort_from_name(std::string_view name);

struct Term;
struct Formula;
using TermPtr = std::shared_ptr<const Term>;
using FormulaPtr = std::shared_ptr<const Formula>;

enum class TermKind {
    Var,   ///< sorted variable
    Lit,   ///< integer literal of sort RF or ZZ
    Const, ///< VF constant: polynomial in t with integer coefficients
    Add,
    Mul,
    Neg,
    Ord, ///< VF -> ZZ
    Ac,  ///< VF -> RF
};

/// Immutable term node. Only Var and Lit carry a sort of their own; the sort
/// of compound nodes is computed by the checker.
struct Term {
    TermKind kind = TermKind::Lit;
    Sort sort = Sort::ZZ;
    std::string name;
    std::int64_t value = 0;
    std::vector<std::int64_t> poly; ///< Const: coefficient of t^i at index i, no trailing zeros
    std::vector<TermPtr> args;
};

enum class FormulaKind { True, False, Eq, Le, Cong, And, Or, Not, Exists, Forall };

struct Formula {
    FormulaKind kind = FormulaKind::True;
    std::vector<TermPtr> terms;   ///< atoms: lhs, rhs
    std::int64_t modulus = 0;     ///< Cong only, >= 2
    std::vector<FormulaPtr> subs; ///< connectives and quantifier body
    std::string var;              ///< bound variable of a quantifier
    Sort var_sort = Sort::ZZ;
};

bool operator==(const Term& a, const Term& b);
bool operator==(const Formula& a, const Formula& b);

// Builders. All of them return shared immutable nodes.
namespace build {
TermPtr var(std::string name, Sort s);
TermPtr lit(std::int64_t v, Sort s); ///< VF literals become constants
TermPtr constant(std::vector<std::int64_t> poly);
TermPtr t_symbol();
TermPtr add(TermPtr a, TermPtr b);
TermPtr mul(TermPtr a, TermPtr b);
TermPtr neg(TermPtr a);
TermPtr ord(TermPtr a);
TermPtr ac(TermPtr a);

FormulaPtr truth(bool value);
FormulaPtr eq(TermPtr a, TermPtr b);
FormulaPtr le(TermPtr a, TermPtr b);
FormulaPtr cong(TermPtr a, TermPtr b, std::int64_t d);
FormulaPtr conj(FormulaPtr a, FormulaPtr b);
FormulaPtr disj(FormulaPtr a, FormulaPtr b);
FormulaPtr negate(FormulaPtr a);
FormulaPtr exists(std::string v, Sort s, FormulaPtr body);
FormulaPtr forall(std::string v, Sort s, FormulaPtr body);
} // namespace build

struct VarDecl {
    std::string name;
    Sort sort = Sort::ZZ;
    bool operator==(const VarDecl&) const = default;
};

/// Free variables of a formula: VF variables first, then RF, then ZZ, each
/// group in order of first occurrence.
struct Signature {
    std::vector<VarDecl> vars;
    int n = 0; ///< VF count
    int m = 0; ///< RF count
    int r = 0; ///< ZZ count
    bool operator==(const Signature&) const = default;
};

using SortEnv = std::map<std::string, Sort, std::less<>>;

/// Parses formula text. Free variables take their sort from `env`; free
/// variables missing from `env` get the sort forced by their context.
/// Throws SyntaxError or SortError.
FormulaPtr parse_formula(std::string_view text, const SortEnv& env = {});

/// Parses a term. When `expected` is given the term is forced to that sort.
TermPtr parse_term(std::string_view text, const SortEnv& env = {},
                   std::optional<Sort> expected = std::nullopt);

/// Checks sorts and the Presburger restriction; returns the free variables.
Signature typecheck(const Formula& f);

/// Sort of a term; variables carry their own sort. Throws SortError.
Sort term_sort(const Term& t);

/// Fully parenthesized text that parses back to the same tree.
std::string format(const Formula& f);
std::string format(const Term& t);

/// Reserved words that cannot be variable names.
bool is_reserved(std::string_view word);

/// `var <name> : <SORT>` header lines followed by `formula <name> := <text>` lines.
struct FormulaFile {
    std::vector<VarDecl> vars;
    std::vector<std::pair<std::string, FormulaPtr>> formulas;

    const FormulaPtr* find(std::string_view name) const;
    SortEnv env() const;
};

FormulaFile parse_formula_file(std::string_view text);

} // namespace wb
