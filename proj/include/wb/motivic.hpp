#pragma once

// Motivic functions, motivic exponential functions and the canonical
// additive character.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "wb/cyclo.hpp"
#include "wb/eval.hpp"

namespace wb {

/// Definable function to ZZ: an explicit term, or the graph {(x, z)} of a
/// formula in which `var` must have exactly one solution in [lo, hi].
struct ZFunction {
    TermPtr term;
    FormulaPtr graph;
    std::string var;
    std::int64_t lo = -64;
    std::int64_t hi = 64;
};

/// Definable function to VF: w^shift times a term, or the unique witness of
/// a graph formula found among exactZero and the search-box representatives.
struct VFFunction {
    TermPtr term;
    FormulaPtr graph;
    std::string var;
    std::int64_t shift = 0;
};

/// Definable function to RF: a term, or the unique solution of a graph formula.
struct RFFunction {
    TermPtr term;
    FormulaPtr graph;
    std::string var;
};

/// One summand p^alpha * #fiber * prod(beta) * prod 1/(1 - p^a).
struct MotivicTerm {
    ZFunction alpha;
    std::vector<ZFunction> betas;
    FormulaPtr fiber;                    ///< over base and fiber variables; null means true
    std::vector<std::string> fiber_vars; ///< RF variables counted in the fiber
    std::vector<std::int64_t> geom;      ///< nonzero exponents a
};

struct MotivicFunction {
    std::string name;
    std::vector<MotivicTerm> terms;
};

/// f(x) * sum over the residue fiber of Lambda(g) * Lambda-bar(e).
struct ExpTerm {
    MotivicFunction f;
    FormulaPtr fiber;
    std::vector<std::string> fiber_vars;
    VFFunction g;
    RFFunction e;
};

struct MotivicExpFunction {
    std::string name;
    std::vector<ExpTerm> terms;
};

using CharacterValue = Cyclo;

/// Lambda(c x): Q_p: exp(2 pi i frac(c x / p)); F_p((t)): exp(2 pi i (sum of
/// the coefficients of t^i, i <= 0) / p). `twist` must be prime to p. Throws
/// PrecisionError when the digits up to index 0 are not known.
CharacterValue canonical_character(const FieldDesc& fd, const VFElem& x, std::int64_t twist = 1);

/// Lambda-bar(c u) = exp(2 pi i c u / p).
CharacterValue residue_character(const FieldDesc& fd, int u, std::int64_t twist = 1);

std::int64_t eval_zfunction(const FieldDesc& fd, const SearchBox& box, const ZFunction& z, const Assignment& x);
VFElem eval_vffunction(const FieldDesc& fd, const SearchBox& box, const VFFunction& g, const Assignment& x);
int eval_rffunction(const FieldDesc& fd, const SearchBox& box, const RFFunction& e, const Assignment& x);

/// Exact value. Throws UnresolvedError when a graph has no or several
/// solutions, or when fiber membership is Unknown.
mpq_class eval_motivic(const FieldDesc& fd, const SearchBox& box, const MotivicFunction& f, const Assignment& x);

Cyclo eval_exp(const FieldDesc& fd, const SearchBox& box, const MotivicExpFunction& f, const Assignment& x,
               std::int64_t twist = 1);

/// Same values; `x` is scratch space and is restored before returning.
mpq_class eval_motivic_in_place(const FieldDesc& fd, const SearchBox& box, const MotivicFunction& f, Assignment& x);
Cyclo eval_exp_in_place(const FieldDesc& fd, const SearchBox& box, const MotivicExpFunction& f, Assignment& x,
                        std::int64_t twist = 1);

/// Variables a function reads, excluding fiber and graph variables.
std::set<std::string> free_variables(const MotivicFunction& f);
std::set<std::string> free_variables(const MotivicExpFunction& f);

/// Throws DomainError when a geometric exponent is zero or a twist is not a
/// unit.
void validate(const MotivicFunction& f);
void validate_twist(const FieldDesc& fd, std::int64_t twist);

} // namespace wb
