#pragma once

// Truncated models of Q_p and F_p((t)).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wb/error.hpp"

namespace wb {

enum class Family { Qp, FpT };

inline constexpr int kDefaultPrecision = 20;

struct FieldDesc {
    Family family = Family::Qp;
    int p = 5;
    int N = kDefaultPrecision; ///< number of stored digits

    bool operator==(const FieldDesc&) const = default;

    /// "Qp:5:20" style name.
    std::string name() const;
};

std::string_view family_name(Family f);
bool is_prime(std::int64_t n);

/// Throws DomainError unless p is prime and N >= 2.
void validate(const FieldDesc& fd);

/// Parses "Qp:5", "FpT:7:30". Throws SyntaxError.
FieldDesc parse_field_spec(std::string_view text);

/// Element sum_{i} digits[i] * w^(v+i), known modulo w^(v + digits.size()).
///
/// A non-exact element with an empty digit vector is an inexact zero: it is
/// only known to lie in w^v O. Its valuation and angular component are not
/// determined.
struct VFElem {
    bool exact_zero = false;
    std::int64_t v = 0;
    std::vector<int> digits; ///< digits[0] != 0 unless the element is an inexact zero

    bool operator==(const VFElem&) const = default;

    bool inexact_zero() const { return !exact_zero && digits.empty(); }
    /// First absolute index that is not known. Meaningless for exact zero.
    std::int64_t abs_precision() const { return v + static_cast<std::int64_t>(digits.size()); }
};

/// Residue field element, value in [0, p).
struct RFElem {
    int value = 0;
    bool operator==(const RFElem&) const = default;
};

VFElem vf_zero();
VFElem vf_one(const FieldDesc& fd);
/// w^k with full window.
VFElem vf_uniformizer_power(const FieldDesc& fd, std::int64_t k);

/// Image of an integer polynomial in t under the constant embedding.
VFElem embed_constant(const FieldDesc& fd, const std::vector<std::int64_t>& poly);
VFElem embed_integer(const FieldDesc& fd, std::int64_t n);

enum class VFOp { Add, Mul, Neg, Inv };

/// Ring operations. Throws PrecisionError when the result window is empty or
/// an operand is an inexact zero, DomainError for the inverse of exact zero.
VFElem vf_arith(const FieldDesc& fd, VFOp op, const VFElem& x, const VFElem* y = nullptr);
VFElem vf_add(const FieldDesc& fd, const VFElem& x, const VFElem& y);
VFElem vf_sub(const FieldDesc& fd, const VFElem& x, const VFElem& y);
VFElem vf_mul(const FieldDesc& fd, const VFElem& x, const VFElem& y);
VFElem vf_neg(const FieldDesc& fd, const VFElem& x);
VFElem vf_inv(const FieldDesc& fd, const VFElem& x);
/// Multiplies by w^k.
VFElem vf_shift(const VFElem& x, std::int64_t k);

/// Valuation. DomainError for exact zero, PrecisionError for inexact zero.
std::int64_t vf_ord(const VFElem& x);
/// Angular component; ac(0) = 0. PrecisionError for inexact zero.
int vf_ac(const VFElem& x);
/// Reduction mod w of an element of the valuation ring. DomainError if ord < 0.
int vf_residue(const VFElem& x);
/// Digit at absolute index i (coefficient of w^i). PrecisionError if unknown.
int vf_digit(const VFElem& x, std::int64_t i);

/// exactZero, then for each v in [vmin, vmax] the (p-1) p^(d-1)
/// representatives of the classes {ord = v, fixed mod w^(v+d)}: leading digit
/// 1..p-1, next d-1 digits in lexicographic order, remaining digits zero.
std::vector<VFElem> enumerate_ball(const FieldDesc& fd, std::int64_t vmin, std::int64_t vmax, int depth);

/// Calls `fn` on the representatives of valuation v at depth d in the same
/// order as enumerate_ball, without materializing the list.
template <class Fn>
void for_each_cell(const FieldDesc& fd, std::int64_t v, int depth, Fn&& fn);

/// Element literal: "Qp(5,N=12){v=-1; 2,3,0,...}", "FpT(5){v=1; 2}", "0!".
/// Listed coefficients may be any integers and are normalized. When the
/// literal omits the field, `context` supplies it; N defaults to the context
/// precision, else kDefaultPrecision.
struct VFLiteral {
    std::optional<FieldDesc> field; ///< absent for "0!"
    VFElem value;
};
VFLiteral parse_vf_literal(std::string_view text, const std::optional<FieldDesc>& context = std::nullopt);

/// Renders an element in literal syntax (trailing zero digits dropped).
std::string format_vf(const FieldDesc& fd, const VFElem& x);

// ---------------------------------------------------------------------------

template <class Fn>
void for_each_cell(const FieldDesc& fd, std::int64_t v, int depth, Fn&& fn)
{
    VFElem x;
    x.v = v;
    x.digits.assign(static_cast<std::size_t>(fd.N), 0);
    std::vector<int>& d = x.digits;
    for (int lead = 1; lead < fd.p; ++lead) {
        d[0] = lead;
        for (int i = 1; i < depth; ++i)
            d[i] = 0;
        while (true) {
            fn(static_cast<const VFElem&>(x));
            int i = depth - 1;
            while (i >= 1 && d[i] == fd.p - 1) {
                d[i] = 0;
                --i;
            }
            if (i < 1) break;
            ++d[i];
        }
    }
}

} // namespace wb
