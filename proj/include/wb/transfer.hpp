#pragma once

// Runs one statement over Q_p and F_p((t)) for several primes and twists and
// compares the verdicts; fits uniform bounds |f(w, lambda)| <= p^(a + b|lambda|).
//
// Statement lines (in a model file, after "statement NAME :"):
//   integrable F over x, y on D
//   bounded F over x on D
//   bound(a, b) F over x, L on D      L ranges over ZZ, |L| = sum of |L_i|
//   formula <closed formula>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wb/integrate.hpp"
#include "wb/model_file.hpp"

namespace wb {

enum class StatementKind { Integrability, Boundedness, BoundWithExponents, FormulaTruth };
std::string_view statement_kind_name(StatementKind k);

struct StatementSpec {
    std::string name;
    std::string text;
    StatementKind kind = StatementKind::FormulaTruth;
    Integrand function;         ///< unused for FormulaTruth
    std::string function_name;
    std::vector<VarDecl> over;  ///< VF, RF and ZZ coordinates swept by the decision procedure
    FormulaPtr domain;          ///< null for the whole space
    std::int64_t a = 0, b = 0;  ///< BoundWithExponents
    FormulaPtr formula;         ///< FormulaTruth
    std::vector<std::int64_t> twists{1};

    /// Whether the verdict can depend on the character twist.
    bool uses_character() const;
};

/// Parses one statement against the functions, domains and variables of a
/// model file; twists come from the file's "twists" line when present.
/// Throws SyntaxError, SortError or DomainError.
StatementSpec parse_statement(const ModelFile& file, const std::string& name, std::string_view text);
std::vector<StatementSpec> load_statements(const ModelFile& file);

struct TransferRow {
    int p = 0;
    std::int64_t twist = 1;
    Truth qp = Truth::Unknown;
    Truth fpt = Truth::Unknown;
    std::vector<std::string> qp_evidence;
    std::vector<std::string> fpt_evidence;
    /// Set only when both verdicts are definite.
    std::optional<bool> agree;
};

struct TransferReport {
    std::string statement;
    StatementKind kind = StatementKind::FormulaTruth;
    std::vector<TransferRow> rows;             ///< sorted by (p, twist)
    std::optional<int> agreement_from;         ///< smallest tested p after which every definite row agrees
    std::vector<std::size_t> disagreements;    ///< indices into rows
    std::size_t indefinite = 0;                ///< rows left out of the comparison
    bool uninformative = false;                ///< no row had two definite verdicts
    std::vector<std::string> notes;
};

struct TransferOptions {
    IntegrationOptions box;       ///< windows, depth and tail parameters; twist is overridden per row
    int precision = kDefaultPrecision;
};

/// Verdicts per prime and twist: integrability and boundedness through the
/// probes of the integrate module (Unknown when inconclusive), bounds by
/// checking every cell of the window exactly (False with a counterexample),
/// formulas through three-valued evaluation. Throws DomainError for primes
/// below 3 or twists that are not units modulo a prime.
TransferReport transfer_experiment(const StatementSpec& s, const std::vector<int>& primes,
                                   const TransferOptions& opts = {});

/// Matrix with rows p and columns twist, Qp verdict, FpT verdict, agree.
std::string transfer_csv(const TransferReport& r);

struct BoundFit {
    bool hypothesis_ok = true;          ///< no growth in w at fixed lambda across the windows
    std::optional<std::int64_t> a, b;   ///< absent when no fit exists
    double max_slack = 0;               ///< max of log_p|f| - (a + b|lambda|), at most 0
    std::string argmax;                 ///< field and point where it is attained
    std::size_t samples = 0;
    std::vector<std::string> notes;
};

/// Minimal integers, b first, with |f(w, lambda)| <= p^(a + b|lambda|) on
/// every cell of every (field, window): b is the smallest value whose maximum
/// a agrees on the last two windows, so (a, b - 1) and (a - 1, b) both fail
/// on the data. Windows must be nested. The hypothesis check flags a lambda
/// whose supremum over w grows across every pair of consecutive windows with
/// non-decreasing steps. `lambda` lists the ZZ coordinates of `vars`.
BoundFit uniform_bound_fit(const Integrand& f, const Formula* domain, const std::vector<VarDecl>& vars,
                           const std::vector<std::string>& lambda, const std::vector<FieldDesc>& fields,
                           const std::vector<IntegrationOptions>& windows, std::int64_t b_cap = 64);

} // namespace wb
