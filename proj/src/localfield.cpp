#include "wb/localfield.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace wb {

std::string_view family_name(Family f) { return f == Family::Qp ? "Qp" : "FpT"; }

std::string FieldDesc::name() const
{
    return std::string(family_name(family)) + ":" + std::to_string(p) + ":" + std::to_string(N);
}

bool is_prime(std::int64_t n)
{
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

void validate(const FieldDesc& fd)
{
    if (!is_prime(fd.p) || fd.p > 65521) throw DomainError("residue characteristic must be a prime <= 65521");
    if (fd.N < 2 || fd.N > 4096) throw DomainError("precision N must lie in [2, 4096]");
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

template <class Int>
bool parse_int(std::string_view s, Int& out)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

} // namespace

FieldDesc parse_field_spec(std::string_view text)
{
    FieldDesc fd;
    std::string_view s = trim(text);
    auto c1 = s.find(':');
    if (c1 == std::string_view::npos) throw SyntaxError("field spec must look like Qp:5 or FpT:5:20", 0);
    std::string_view fam = s.substr(0, c1);
    if (fam == "Qp") fd.family = Family::Qp;
    else if (fam == "FpT") fd.family = Family::FpT;
    else throw SyntaxError("unknown field family '" + std::string(fam) + "'", 0);
    std::string_view rest = s.substr(c1 + 1);
    auto c2 = rest.find(':');
    if (!parse_int(rest.substr(0, c2), fd.p)) throw SyntaxError("bad prime in field spec", c1 + 1);
    if (c2 != std::string_view::npos && !parse_int(rest.substr(c2 + 1), fd.N))
        throw SyntaxError("bad precision in field spec", c1 + 1 + c2 + 1);
    validate(fd);
    return fd;
}

// ---------------------------------------------------------------------------
// helpers

namespace {

mpz_class digits_to_mpz(const std::vector<int>& d, std::size_t begin, std::size_t len, int p)
{
    mpz_class acc = 0;
    for (std::size_t i = len; i-- > 0;) {
        acc *= p;
        std::size_t k = begin + i;
        if (k < d.size()) acc += d[k];
    }
    return acc;
}

/// Digits of (value mod p^len), least significant first.
std::vector<int> mpz_to_digits(mpz_class value, std::size_t len, int p)
{
    mpz_class modulus;
    mpz_ui_pow_ui(modulus.get_mpz_t(), static_cast<unsigned long>(p), len);
    value %= modulus;
    if (value < 0) value += modulus;
    std::vector<int> out(len);
    mpz_class q, r;
    for (std::size_t i = 0; i < len; ++i) {
        mpz_fdiv_qr_ui(q.get_mpz_t(), r.get_mpz_t(), value.get_mpz_t(), static_cast<unsigned long>(p));
        out[i] = static_cast<int>(r.get_ui());
        value = q;
    }
    return out;
}

/// Strips leading zero digits and caps the window at N. Throws when nothing
/// is left.
VFElem normalized(const FieldDesc& fd, std::int64_t v, std::vector<int> digits)
{
    std::size_t lead = 0;
    while (lead < digits.size() && digits[lead] == 0)
        ++lead;
    if (lead == digits.size())
        throw PrecisionError("cancellation consumed all known digits (result is 0 mod w^" +
                             std::to_string(v + static_cast<std::int64_t>(digits.size())) + ")");
    VFElem r;
    r.v = v + static_cast<std::int64_t>(lead);
    digits.erase(digits.begin(), digits.begin() + static_cast<std::ptrdiff_t>(lead));
    if (digits.size() > static_cast<std::size_t>(fd.N)) digits.resize(static_cast<std::size_t>(fd.N));
    r.digits = std::move(digits);
    return r;
}

/// Element equal to w^shift * value exactly (window N), or exact zero.
VFElem from_mpz(const FieldDesc& fd, mpz_class value, std::int64_t shift)
{
    if (value == 0) return vf_zero();
    std::int64_t v = shift;
    while (mpz_divisible_ui_p(value.get_mpz_t(), static_cast<unsigned long>(fd.p))) {
        value /= fd.p;
        ++v;
    }
    VFElem r;
    r.v = v;
    r.digits = mpz_to_digits(value, static_cast<std::size_t>(fd.N), fd.p);
    return r;
}

/// Element equal to w^shift * sum c_i t^i with coefficients reduced mod p.
VFElem from_series(const FieldDesc& fd, const std::vector<std::int64_t>& coeffs, std::int64_t shift)
{
    std::vector<int> red(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        std::int64_t c = coeffs[i] % fd.p;
        red[i] = static_cast<int>(c < 0 ? c + fd.p : c);
    }
    std::size_t lead = 0;
    while (lead < red.size() && red[lead] == 0)
        ++lead;
    if (lead == red.size()) return vf_zero();
    VFElem r;
    r.v = shift + static_cast<std::int64_t>(lead);
    r.digits.assign(static_cast<std::size_t>(fd.N), 0);
    for (std::size_t i = lead; i < red.size() && i - lead < r.digits.size(); ++i)
        r.digits[i - lead] = red[i];
    return r;
}

int inverse_mod(int a, int p)
{
    // p is prime and a != 0 mod p
    long long result = 1, base = a % p, e = p - 2;
    while (e > 0) {
        if (e & 1) result = result * base % p;
        base = base * base % p;
        e >>= 1;
    }
    return static_cast<int>(result);
}

} // namespace

// ---------------------------------------------------------------------------
// constructors

VFElem vf_zero()
{
    VFElem z;
    z.exact_zero = true;
    return z;
}

VFElem vf_one(const FieldDesc& fd) { return vf_uniformizer_power(fd, 0); }

VFElem vf_uniformizer_power(const FieldDesc& fd, std::int64_t k)
{
    VFElem r;
    r.v = k;
    r.digits.assign(static_cast<std::size_t>(fd.N), 0);
    r.digits[0] = 1;
    return r;
}

VFElem embed_constant(const FieldDesc& fd, const std::vector<std::int64_t>& poly)
{
    if (fd.family == Family::FpT) return from_series(fd, poly, 0);
    mpz_class value = 0;
    for (std::size_t i = poly.size(); i-- > 0;) {
        value *= fd.p;
        value += mpz_class(static_cast<long>(poly[i]));
    }
    return from_mpz(fd, value, 0);
}

VFElem embed_integer(const FieldDesc& fd, std::int64_t n) { return embed_constant(fd, {n}); }

// ---------------------------------------------------------------------------
// arithmetic

VFElem vf_add(const FieldDesc& fd, const VFElem& x, const VFElem& y)
{
    if (x.exact_zero) return y;
    if (y.exact_zero) return x;
    std::int64_t m = std::min(x.v, y.v);
    std::int64_t P = std::min(x.abs_precision(), y.abs_precision());
    if (P <= m)
        throw PrecisionError("sum has no known digits (both operands only known mod w^" + std::to_string(P) + ")");
    std::size_t L = static_cast<std::size_t>(P - m);
    std::vector<int> out(L, 0);
    auto digit_at = [](const VFElem& e, std::int64_t i) -> int {
        std::int64_t k = i - e.v;
        if (k < 0 || k >= static_cast<std::int64_t>(e.digits.size())) return 0;
        return e.digits[static_cast<std::size_t>(k)];
    };
    if (fd.family == Family::FpT) {
        for (std::size_t i = 0; i < L; ++i) {
            std::int64_t a = m + static_cast<std::int64_t>(i);
            out[i] = (digit_at(x, a) + digit_at(y, a)) % fd.p;
        }
    } else {
        int carry = 0;
        for (std::size_t i = 0; i < L; ++i) {
            std::int64_t a = m + static_cast<std::int64_t>(i);
            int s = digit_at(x, a) + digit_at(y, a) + carry;
            carry = s >= fd.p ? 1 : 0;
            out[i] = s - carry * fd.p;
        }
    }
    return normalized(fd, m, std::move(out));
}

VFElem vf_neg(const FieldDesc& fd, const VFElem& x)
{
    if (x.exact_zero || x.digits.empty()) return x;
    VFElem r = x;
    if (fd.family == Family::FpT) {
        for (int& d : r.digits)
            d = d == 0 ? 0 : fd.p - d;
        return r;
    }
    // p^L - U: first digit p - c0 (c0 != 0), later digits p - 1 - c_i.
    r.digits[0] = fd.p - x.digits[0];
    for (std::size_t i = 1; i < r.digits.size(); ++i)
        r.digits[i] = fd.p - 1 - x.digits[i];
    return r;
}

VFElem vf_sub(const FieldDesc& fd, const VFElem& x, const VFElem& y) { return vf_add(fd, x, vf_neg(fd, y)); }

VFElem vf_mul(const FieldDesc& fd, const VFElem& x, const VFElem& y)
{
    if (x.exact_zero || y.exact_zero) return vf_zero();
    if (x.digits.empty() || y.digits.empty())
        throw PrecisionError("product with an element of undetermined valuation");
    std::size_t L = std::min(x.digits.size(), y.digits.size());
    VFElem r;
    r.v = x.v + y.v;
    if (fd.family == Family::FpT) {
        r.digits.assign(L, 0);
        for (std::size_t k = 0; k < L; ++k) {
            std::int64_t acc = 0;
            for (std::size_t i = 0; i <= k; ++i)
                acc += static_cast<std::int64_t>(x.digits[i]) * y.digits[k - i];
            r.digits[k] = static_cast<int>(acc % fd.p);
        }
        return r;
    }
    // Schoolbook product with carries, truncated to L digits.
    std::vector<std::int64_t> acc(L, 0);
    for (std::size_t i = 0; i < L; ++i) {
        if (x.digits[i] == 0) continue;
        for (std::size_t j = 0; i + j < L; ++j)
            acc[i + j] += static_cast<std::int64_t>(x.digits[i]) * y.digits[j];
        // keep the accumulators small
        if (i % 64 == 63) {
            std::int64_t carry = 0;
            for (std::size_t k = 0; k < L; ++k) {
                acc[k] += carry;
                carry = acc[k] / fd.p;
                acc[k] %= fd.p;
            }
        }
    }
    r.digits.assign(L, 0);
    std::int64_t carry = 0;
    for (std::size_t k = 0; k < L; ++k) {
        std::int64_t s = acc[k] + carry;
        r.digits[k] = static_cast<int>(s % fd.p);
        carry = s / fd.p;
    }
    return r;
}

VFElem vf_inv(const FieldDesc& fd, const VFElem& x)
{
    if (x.exact_zero) throw DomainError("inverse of zero");
    if (x.digits.empty()) throw PrecisionError("inverse of an element of undetermined valuation");
    std::size_t L = x.digits.size();
    VFElem r;
    r.v = -x.v;
    if (fd.family == Family::FpT) {
        int c0inv = inverse_mod(x.digits[0], fd.p);
        r.digits.assign(L, 0);
        r.digits[0] = c0inv;
        for (std::size_t k = 1; k < L; ++k) {
            std::int64_t acc = 0;
            for (std::size_t j = 1; j <= k; ++j)
                acc += static_cast<std::int64_t>(x.digits[j]) * r.digits[k - j];
            acc %= fd.p;
            r.digits[k] = static_cast<int>((fd.p - acc) % fd.p * c0inv % fd.p);
        }
        return r;
    }
    mpz_class u = digits_to_mpz(x.digits, 0, L, fd.p);
    mpz_class modulus;
    mpz_ui_pow_ui(modulus.get_mpz_t(), static_cast<unsigned long>(fd.p), L);
    mpz_class w;
    mpz_invert(w.get_mpz_t(), u.get_mpz_t(), modulus.get_mpz_t());
    r.digits = mpz_to_digits(w, L, fd.p);
    return r;
}

VFElem vf_shift(const VFElem& x, std::int64_t k)
{
    if (x.exact_zero) return x;
    VFElem r = x;
    r.v += k;
    return r;
}

VFElem vf_arith(const FieldDesc& fd, VFOp op, const VFElem& x, const VFElem* y)
{
    switch (op) {
    case VFOp::Add:
        if (!y) throw DomainError("addition needs two operands");
        return vf_add(fd, x, *y);
    case VFOp::Mul:
        if (!y) throw DomainError("multiplication needs two operands");
        return vf_mul(fd, x, *y);
    case VFOp::Neg: return vf_neg(fd, x);
    case VFOp::Inv: return vf_inv(fd, x);
    }
    throw DomainError("unknown operation");
}

// ---------------------------------------------------------------------------
// valuation data

std::int64_t vf_ord(const VFElem& x)
{
    if (x.exact_zero) throw DomainError("ord of zero is undefined");
    if (x.digits.empty())
        throw PrecisionError("valuation undetermined: element only known to be 0 mod w^" + std::to_string(x.v));
    return x.v;
}

int vf_ac(const VFElem& x)
{
    if (x.exact_zero) return 0;
    if (x.digits.empty())
        throw PrecisionError("angular component undetermined: element only known to be 0 mod w^" +
                             std::to_string(x.v));
    return x.digits[0];
}

int vf_residue(const VFElem& x)
{
    if (x.exact_zero) return 0;
    if (x.v < 0 && !x.digits.empty()) throw DomainError("residue of an element outside the valuation ring");
    return vf_digit(x, 0);
}

int vf_digit(const VFElem& x, std::int64_t i)
{
    if (x.exact_zero) return 0;
    if (i < x.v) return 0;
    if (i >= x.abs_precision())
        throw PrecisionError("digit at index " + std::to_string(i) + " is beyond the known window");
    return x.digits[static_cast<std::size_t>(i - x.v)];
}

std::vector<VFElem> enumerate_ball(const FieldDesc& fd, std::int64_t vmin, std::int64_t vmax, int depth)
{
    if (vmin > vmax) throw DomainError("enumerate_ball: vmin > vmax");
    if (depth < 1 || depth > fd.N) throw DomainError("enumerate_ball: depth must lie in [1, N]");
    std::vector<VFElem> out;
    out.push_back(vf_zero());
    for (std::int64_t v = vmin; v <= vmax; ++v)
        for_each_cell(fd, v, depth, [&](const VFElem& x) { out.push_back(x); });
    return out;
}

// ---------------------------------------------------------------------------
// literals

VFLiteral parse_vf_literal(std::string_view text, const std::optional<FieldDesc>& context)
{
    std::string_view s = trim(text);
    VFLiteral lit;
    if (s == "0!") {
        lit.value = vf_zero();
        lit.field = context;
        return lit;
    }
    auto fail = [&](const std::string& what, std::size_t pos) -> SyntaxError {
        return SyntaxError("element literal: " + what, pos);
    };
    FieldDesc fd;
    std::size_t open = s.find('(');
    std::size_t close = s.find(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open)
        throw fail("expected Qp(p[,N=n]) or FpT(p[,N=n])", 0);
    std::string_view fam = trim(s.substr(0, open));
    if (fam == "Qp") fd.family = Family::Qp;
    else if (fam == "FpT") fd.family = Family::FpT;
    else throw fail("unknown family '" + std::string(fam) + "'", 0);
    std::string_view params = s.substr(open + 1, close - open - 1);
    std::string_view pstr = params;
    std::string_view nstr;
    if (auto comma = params.find(','); comma != std::string_view::npos) {
        pstr = params.substr(0, comma);
        nstr = trim(params.substr(comma + 1));
        if (nstr.substr(0, 1) != "N") throw fail("expected N=<precision>", open + comma + 1);
        nstr.remove_prefix(1);
        nstr = trim(nstr);
        if (nstr.substr(0, 1) != "=") throw fail("expected N=<precision>", open + comma + 1);
        nstr.remove_prefix(1);
    }
    if (!parse_int(pstr, fd.p)) throw fail("bad prime", open + 1);
    if (!nstr.empty()) {
        if (!parse_int(nstr, fd.N)) throw fail("bad precision", open + 1);
    } else if (context) {
        fd.N = context->N;
    }
    validate(fd);

    std::string_view body = trim(s.substr(close + 1));
    if (body.size() < 2 || body.front() != '{' || body.back() != '}')
        throw fail("expected {v=<int>; digits}", close + 1);
    body = body.substr(1, body.size() - 2);
    auto semi = body.find(';');
    if (semi == std::string_view::npos) throw fail("expected ';' after the valuation", close + 1);
    std::string_view vpart = trim(body.substr(0, semi));
    if (vpart.substr(0, 1) != "v") throw fail("expected v=<int>", close + 1);
    vpart.remove_prefix(1);
    vpart = trim(vpart);
    if (vpart.substr(0, 1) != "=") throw fail("expected v=<int>", close + 1);
    vpart.remove_prefix(1);
    std::int64_t v = 0;
    if (!parse_int(vpart, v)) throw fail("bad valuation", close + 1);

    std::vector<std::int64_t> coeffs;
    std::string_view list = body.substr(semi + 1);
    bool ellipsis = false;
    while (true) {
        auto comma = list.find(',');
        std::string_view item = trim(list.substr(0, comma));
        if (ellipsis) throw fail("'...' must be the last entry", close + 1);
        if (item == "...") {
            ellipsis = true;
        } else {
            std::int64_t c = 0;
            if (!parse_int(item, c)) throw fail("bad digit '" + std::string(item) + "'", close + 1);
            coeffs.push_back(c);
        }
        if (comma == std::string_view::npos) break;
        list.remove_prefix(comma + 1);
    }
    if (coeffs.empty()) throw fail("no digits given", close + 1);

    if (fd.family == Family::FpT) {
        lit.value = from_series(fd, coeffs, v);
    } else {
        mpz_class value = 0;
        for (std::size_t i = coeffs.size(); i-- > 0;) {
            value *= fd.p;
            value += mpz_class(static_cast<long>(coeffs[i]));
        }
        lit.value = from_mpz(fd, value, v);
    }
    lit.field = fd;
    return lit;
}

std::string format_vf(const FieldDesc& fd, const VFElem& x)
{
    if (x.exact_zero) return "0!";
    std::ostringstream os;
    if (x.digits.empty()) {
        os << "O(w^" << x.v << ")";
        return os.str();
    }
    std::size_t last = x.digits.size();
    while (last > 1 && x.digits[last - 1] == 0)
        --last;
    os << family_name(fd.family) << '(' << fd.p << ",N=" << fd.N << "){v=" << x.v << "; ";
    for (std::size_t i = 0; i < last; ++i)
        os << (i ? "," : "") << x.digits[i];
    os << '}';
    return os.str();
}

} // namespace wb
