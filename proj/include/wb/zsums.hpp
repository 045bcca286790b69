#pragma once

// Finite sums of terms c * prod(linear forms) * q^(linear form) over Z^r and
// bounds of the shape |h(q, lambda)| <= q^(a + b |lambda|).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "wb/presburger.hpp"

namespace wb {

/// c0 + sum c_i lambda_i.
struct LinForm {
    std::vector<std::int64_t> c;
    std::int64_t c0 = 0;

    mpz_class eval(const std::vector<std::int64_t>& point) const;
    bool is_constant() const;
    std::string to_string(const std::vector<std::string>& vars) const;
    bool operator==(const LinForm&) const = default;
    auto operator<=>(const LinForm&) const = default;
};

struct TSTerm {
    mpq_class coef;
    std::vector<LinForm> factors; ///< non-constant, primitive, leading coefficient positive, sorted
    LinForm exponent;
};

struct TermSum {
    std::string name;
    std::vector<std::string> vars;
    std::vector<TSTerm> terms;
    PresburgerSet domain;

    std::string to_string() const;
};

/// Parses "tsum h := 3*(L+1)*(2L-1)*q^(L-2) - q^L on {L >= 0}". The name
/// prefix and the domain are optional; an explicit variable order may be
/// given as "tsum h(L, M) := ...". Factors are normalized and merged.
TermSum parse_termsum(std::string_view text);

/// Exact value. Throws DomainError when q < 2 or lambda is not in the domain.
mpq_class tsum_eval(const TermSum& h, const mpz_class& q, const std::vector<std::int64_t>& lambda);

/// Combines terms with the same factors and exponent, drops zeros, sorts.
TermSum tsum_merge(const TermSum& h);

struct BoundOptions {
    std::int64_t q0 = 2;       ///< certificates hold for every integer q >= q0
    std::int64_t t_cap = 1024; ///< largest window half-width tried
    std::int64_t a_cap = 64;   ///< increments of a tried past the window maximum
    std::int64_t window = 20;  ///< half-width of the outer window when r > 1
};

/// Why the bound holds beyond the window in one direction of lambda.
struct TailCertificate {
    std::string direction; ///< "up" (lambda > T) or "down" (lambda < -T)
    std::int64_t slope = 0;  ///< largest exponent slope with a non-vanishing group
    int degree = 0;          ///< degree in lambda of that group
    std::int64_t b_needed = 0;
    std::string dominant;    ///< dominant term
    std::vector<std::string> lines;
};

struct TsumBound {
    std::int64_t a = 0;
    std::int64_t b = 0;
    bool certified = false; ///< proved for all q >= q0 and lambda in the domain
    bool minimal = false;   ///< (a - 1, b) and (a, b - 1) are known to fail
    std::int64_t q0 = 2;
    std::int64_t threshold = 0; ///< T: exact checks on |lambda| <= T, tail argument beyond
    std::vector<std::int64_t> witness_a1; ///< q followed by lambda with |h| > q^(a - 1 + b|lambda|)
    std::string argument_b;               ///< why b - 1 admits no a
    std::vector<TailCertificate> tails;
    std::vector<std::string> notes;
};

/// r = 1: minimal b >= 0 from the dominant slope and degree per direction,
/// then minimal a from exact checks on the window |lambda| <= T and a tail
/// certificate beyond it. r > 1: smallest b whose window maximum of a is
/// stable between half-widths window / 2 and window, not certified. Returns
/// nullopt when no b up to the cap (largest |slope| + total degree) is
/// stable. Throws ResourceError when the caps are exceeded.
std::optional<TsumBound> tsum_bound(const TermSum& h, const BoundOptions& opts = {});

/// Smallest k with |sum_e c_e q^e| <= q^k for every integer q >= q0, and an
/// integer q violating k - 1; nullopt for the zero polynomial.
using Laurent = std::map<std::int64_t, mpq_class>;
struct LevelResult {
    std::int64_t k;
    mpz_class witness;
};
std::optional<LevelResult> laurent_level(const Laurent& f, const mpz_class& q0);

/// Smallest integer q >= q0 with f(q) < 0, or nullopt when f >= 0 there.
std::optional<mpz_class> first_negative(const Laurent& f, const mpz_class& q0);

/// r = 1, slope(hi) > slope(lo): a lambda* >= 0 with |hi(q, l)| >= |lo(q, l)|
/// for all l >= lambda* and q >= q0. Throws DomainError otherwise.
std::int64_t dominance_threshold(const TSTerm& hi, const TSTerm& lo, std::int64_t q0 = 2);

} // namespace wb
