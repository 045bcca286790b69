#pragma once

// Three-valued model checking of formulas over a truncated field.

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "wb/localfield.hpp"
#include "wb/syntax.hpp"

namespace wb {

enum class Truth { False, True, Unknown };

std::string_view truth_name(Truth t);
Truth truth_and(Truth a, Truth b);
Truth truth_or(Truth a, Truth b);
Truth truth_not(Truth a);

/// Finite windows for VF and ZZ quantifiers.
struct SearchBox {
    std::int64_t vmin = -2;
    std::int64_t vmax = 4;
    int depth = 2;
    std::int64_t zmin = -20;
    std::int64_t zmax = 20;

    bool operator==(const SearchBox&) const = default;
    std::string to_string() const;
};

/// Throws DomainError for empty windows or depth outside [1, N].
void validate(const FieldDesc& fd, const SearchBox& box);

/// Parses "vmin=-2,vmax=4,depth=2,zmin=-20,zmax=20"; missing keys keep defaults.
SearchBox parse_box_spec(std::string_view text);

using Value = std::variant<VFElem, RFElem, std::int64_t>;
using Assignment = std::map<std::string, Value, std::less<>>;

Sort value_sort(const Value& v);
std::string format_value(const FieldDesc& fd, const Value& v);

/// Parses "x=Qp(5){v=0;7},u=3,z=-1" against the sorts in `env`. A VF value
/// may also be written as an integer.
Assignment parse_assignment(std::string_view text, const FieldDesc& fd, const SortEnv& env);

/// Collects precision notes during evaluation; duplicates are dropped.
struct Diagnostics {
    std::vector<std::string> notes;
    void add(std::string note);
};

struct EvalResult {
    Truth verdict = Truth::Unknown;
    /// For a True verdict on a formula that starts with existential
    /// quantifiers: the first witness found for each of them.
    std::vector<std::pair<std::string, Value>> witnesses;
};

/// Verdict of `f` under `a`. RF quantifiers are exact. A ZZ quantifier whose
/// scope reduces to a pure ZZ formula once outer values are substituted is
/// decided exactly by elimination; other ZZ quantifiers search
/// [zmin, zmax]. VF quantifiers search exactZero plus enumerate_ball. A
/// searched existential is True with a witness and Unknown otherwise; a
/// searched universal is False with a counterexample and Unknown otherwise.
/// An atom mentioning ord of an exact zero is False.
Truth eval_formula(const FieldDesc& fd, const SearchBox& box, const Assignment& a, const Formula& f,
                   Diagnostics* diag = nullptr);
EvalResult eval_formula_detailed(const FieldDesc& fd, const SearchBox& box, const Assignment& a,
                                 const Formula& f, Diagnostics* diag = nullptr);

/// Same verdict without signature checks; `a` is used as scratch space and
/// restored before returning. For hot loops that already validated `a`.
Truth eval_in_place(const FieldDesc& fd, const SearchBox& box, Assignment& a, const Formula& f);

/// Term values. Throw PrecisionError when digits run out, DomainError for
/// ord of an exact zero, SortError on a sort mismatch.
VFElem eval_vf_term(const FieldDesc& fd, const Assignment& a, const Term& t);
int eval_rf_term(const FieldDesc& fd, const Assignment& a, const Term& t);
std::int64_t eval_zz_term(const FieldDesc& fd, const Assignment& a, const Term& t);

inline constexpr std::int64_t kDefaultEnumerationBudget = 1000000;

struct EnumerationResult {
    std::vector<VarDecl> vars; ///< enumerated variables, signature order
    std::vector<std::vector<Value>> true_tuples;
    std::vector<std::vector<Value>> unknown_tuples;
};

/// Enumerates the free variables of `f` not fixed by `fixed`: VF over
/// exactZero plus the ball representatives, RF over F_p, ZZ over
/// [zmin, zmax], first variable outermost. Throws ResourceError when the
/// number of tuples exceeds `budget`.
EnumerationResult enumerate_set(const FieldDesc& fd, const SearchBox& box, const Formula& f, const Assignment& fixed,
                                std::int64_t budget = kDefaultEnumerationBudget);

/// #{y in F_p^r : f(x, y)} for the RF variables `fiber`. Throws DomainError if
/// a fiber variable is not RF-sort, UnresolvedError if membership of some
/// fiber point is Unknown.
std::int64_t count_rf_fiber(const FieldDesc& fd, const SearchBox& box, const Formula& f,
                            const std::vector<std::string>& fiber, const Assignment& base);

} // namespace wb
