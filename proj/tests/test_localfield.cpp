#include <doctest.h>

#include <random>

#include "wb/localfield.hpp"

using namespace wb;

namespace {

FieldDesc qp(int p, int N = 12) { return {Family::Qp, p, N}; }
FieldDesc fpt(int p, int N = 12) { return {Family::FpT, p, N}; }

// Base-p digits of a nonzero integer n = p^v * u, computed independently.
std::pair<std::int64_t, std::vector<int>> expansion(__int128 n, int p, int len)
{
    std::int64_t v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    __int128 m = 1;
    for (int i = 0; i < len; ++i)
        m *= p;
    __int128 u = ((n % m) + m) % m;
    std::vector<int> d(len);
    for (int i = 0; i < len; ++i) {
        d[i] = static_cast<int>(u % p);
        u /= p;
    }
    return {v, d};
}

VFElem random_elem(const FieldDesc& fd, std::mt19937_64& rng, int vlo = -4, int vhi = 4)
{
    VFElem x;
    x.v = std::uniform_int_distribution<int>(vlo, vhi)(rng);
    x.digits.resize(fd.N);
    std::uniform_int_distribution<int> dig(0, fd.p - 1);
    for (auto& d : x.digits)
        d = dig(rng);
    x.digits[0] = std::uniform_int_distribution<int>(1, fd.p - 1)(rng);
    return x;
}

// Digits agree on every index both elements know.
bool agree(const VFElem& a, const VFElem& b)
{
    if (a.exact_zero || b.exact_zero) return a.exact_zero == b.exact_zero;
    std::int64_t hi = std::min(a.abs_precision(), b.abs_precision());
    std::int64_t lo = std::min(a.v, b.v);
    for (std::int64_t i = lo; i < hi; ++i)
        if (vf_digit(a, i) != vf_digit(b, i)) return false;
    return true;
}

} // namespace

TEST_SUITE("localfield")
{
    TEST_CASE("constant embedding")
    {
        auto x = embed_integer(qp(5), 7);
        CHECK(x.v == 0);
        CHECK(x.digits[0] == 2);
        CHECK(x.digits[1] == 1);
        CHECK(x.digits[2] == 0);
        auto y = embed_integer(fpt(5), 7);
        CHECK(y.v == 0);
        CHECK(y.digits[0] == 2);
        CHECK(y.digits[1] == 0);
        CHECK(embed_integer(qp(5), 0).exact_zero);
        CHECK(embed_integer(fpt(7), 0).exact_zero);
        CHECK(embed_integer(fpt(5), 10).exact_zero);
        auto t = embed_constant(fpt(5), {0, 1});
        CHECK(t.v == 1);
        CHECK(t.digits[0] == 1);
        auto tq = embed_constant(qp(5), {0, 1});
        CHECK(tq == vf_uniformizer_power(qp(5), 1));
        auto m1 = embed_integer(qp(3, 4), -1);
        CHECK(m1.digits == std::vector<int>{2, 2, 2, 2});
    }

    TEST_CASE("worked arithmetic")
    {
        FieldDesc f = qp(5);
        auto a = embed_integer(f, 6);
        auto b = embed_integer(f, -4);
        auto prod = vf_mul(f, a, b);
        auto [v, d] = expansion(-24, 5, f.N);
        CHECK(prod.v == v);
        CHECK(prod.digits == d);
        CHECK(prod.digits[0] == 1);
        CHECK(prod.digits[1] == 0);
        CHECK(prod.digits[2] == 4);

        FieldDesc g = fpt(5);
        auto s = vf_add(g, embed_constant(g, {2, 1}), embed_constant(g, {3, 1}));
        CHECK(s.v == 1);
        CHECK(s.digits[0] == 2);
        CHECK(s.digits.size() == static_cast<std::size_t>(g.N - 1));

        auto w = vf_uniformizer_power(f, 1);
        auto wi = vf_inv(f, w);
        CHECK(wi.v == -1);
        CHECK(wi.digits[0] == 1);
        CHECK(wi.digits[1] == 0);
    }

    TEST_CASE("ord, ac, residue")
    {
        FieldDesc f = qp(5);
        CHECK(vf_ord(vf_uniformizer_power(f, 1)) == 1);
        CHECK(vf_ord(embed_integer(f, 7)) == 0);
        CHECK(vf_ord(embed_integer(f, 25)) == 2);
        CHECK(vf_ac(vf_zero()) == 0);
        CHECK(vf_ac(embed_integer(f, 7)) == 2);
        // x with 5x = 17, i.e. 17/5 = 2*5^-1 + 3
        auto x = vf_mul(f, embed_integer(f, 17), vf_inv(f, embed_integer(f, 5)));
        CHECK(x.v == -1);
        CHECK(vf_ac(x) == 2);
        CHECK(vf_digit(x, 0) == 3);
        CHECK_THROWS_AS(vf_ord(vf_zero()), DomainError);
        CHECK(vf_residue(embed_integer(f, 7)) == 2);
        CHECK(vf_residue(embed_integer(f, 5)) == 0);
        CHECK_THROWS_AS(vf_residue(x), DomainError);
    }

    TEST_CASE("precision exhaustion")
    {
        FieldDesc f = qp(5, 4);
        auto a = embed_integer(f, 1);
        auto b = embed_integer(f, -1);
        CHECK_THROWS_AS(vf_add(f, a, b), PrecisionError);
        CHECK_THROWS_AS(vf_inv(f, vf_zero()), DomainError);
        VFElem unknown;
        unknown.v = 3;
        CHECK(unknown.inexact_zero());
        CHECK_THROWS_AS(vf_ord(unknown), PrecisionError);
        CHECK_THROWS_AS(vf_ac(unknown), PrecisionError);
        CHECK_THROWS_AS(vf_mul(f, a, unknown), PrecisionError);
        auto sum = vf_add(f, a, unknown);
        CHECK(sum.v == 0);
        CHECK(sum.digits == std::vector<int>{1, 0, 0});
    }

    TEST_CASE("ball enumeration")
    {
        auto q2 = enumerate_ball(qp(2), 0, 0, 2);
        REQUIRE(q2.size() == 3);
        CHECK(q2[0].exact_zero);
        CHECK(q2[1] == embed_integer(qp(2), 1));
        CHECK(q2[2] == embed_integer(qp(2), 3));
        auto q5 = enumerate_ball(qp(5), 0, 0, 1);
        REQUIRE(q5.size() == 5);
        for (int a = 1; a <= 4; ++a)
            CHECK(q5[a] == embed_integer(qp(5), a));
        for (int p : {3, 5, 7}) {
            auto e = enumerate_ball(fpt(p), 0, 1, 1);
            CHECK(e.size() == static_cast<std::size_t>(2 * (p - 1) + 1));
            auto e3 = enumerate_ball(qp(p), -1, 1, 3);
            CHECK(e3.size() == static_cast<std::size_t>(3 * (p - 1) * p * p + 1));
        }
        CHECK_THROWS_AS(enumerate_ball(qp(5), 1, 0, 1), DomainError);
    }

    TEST_CASE("literals")
    {
        auto a = parse_vf_literal("Qp(5,N=12){v=-1; 2,3,0,...}");
        REQUIRE(a.field);
        CHECK(a.field->N == 12);
        CHECK(a.value.v == -1);
        CHECK(a.value.digits[0] == 2);
        CHECK(a.value.digits[1] == 3);
        auto b = parse_vf_literal("Qp(5){v=0;7}", qp(5, 9));
        CHECK(b.field->N == 9);
        CHECK(b.value == embed_integer(qp(5, 9), 7));
        auto c = parse_vf_literal("FpT(5,N=12){v=1; 2,0,...}");
        CHECK(c.field->family == Family::FpT);
        CHECK(c.value.v == 1);
        CHECK(parse_vf_literal("0!").value.exact_zero);
        CHECK(parse_vf_literal("Qp(3){v=2; 0}").value.exact_zero);
        CHECK_THROWS_AS(parse_vf_literal("Qp(4){v=0;1}"), DomainError);
        CHECK_THROWS_AS(parse_vf_literal("Qq(5){v=0;1}"), SyntaxError);
        auto round = parse_vf_literal(format_vf(*a.field, a.value));
        CHECK(round.value == a.value);
        CHECK(parse_field_spec("FpT:7:30") == FieldDesc{Family::FpT, 7, 30});
        CHECK(parse_field_spec("Qp:5").N == kDefaultPrecision);
        CHECK_THROWS(parse_field_spec("Qp:6"));
    }

    TEST_CASE("integer oracle for Qp and polynomial oracle for FpT")
    {
        std::mt19937_64 rng(99);
        for (int p : {3, 5, 7, 11, 13}) {
            FieldDesc f = qp(p, 10);
            std::uniform_int_distribution<std::int64_t> dist(-1000000, 1000000);
            for (int i = 0; i < 300; ++i) {
                std::int64_t a = dist(rng), b = dist(rng);
                if (a == 0 || b == 0) continue;
                auto ea = embed_integer(f, a), eb = embed_integer(f, b);
                auto prod = vf_mul(f, ea, eb);
                auto [v, d] = expansion(static_cast<__int128>(a) * b, p, f.N);
                CHECK(prod.v == v);
                CHECK(prod.digits == d);
                if (a + b != 0) {
                    auto sum = vf_add(f, ea, eb);
                    auto [vs, ds] = expansion(static_cast<__int128>(a) + b, p, f.N);
                    CHECK(sum.v == vs);
                    for (std::size_t k = 0; k < sum.digits.size(); ++k)
                        CHECK(sum.digits[k] == ds[k]);
                }
                auto neg = vf_neg(f, ea);
                CHECK(neg == embed_integer(f, -a));
            }
            FieldDesc g = fpt(p, 10);
            std::uniform_int_distribution<int> cd(0, p - 1);
            for (int i = 0; i < 200; ++i) {
                std::vector<std::int64_t> pa(4), pb(4);
                for (auto& c : pa)
                    c = cd(rng);
                for (auto& c : pb)
                    c = cd(rng);
                std::vector<std::int64_t> pp(7, 0), ps(4);
                for (int x = 0; x < 4; ++x) {
                    ps[x] = (pa[x] + pb[x]) % p;
                    for (int y = 0; y < 4; ++y)
                        pp[x + y] = (pp[x + y] + pa[x] * pb[y]) % p;
                }
                auto ea = embed_constant(g, pa), eb = embed_constant(g, pb);
                if (ea.exact_zero || eb.exact_zero) continue;
                CHECK(vf_mul(g, ea, eb) == embed_constant(g, pp));
                auto want = embed_constant(g, ps);
                if (!want.exact_zero) CHECK(agree(vf_add(g, ea, eb), want));
            }
        }
    }

    TEST_CASE("valuation and angular component laws")
    {
        std::mt19937_64 rng(7);
        for (Family fam : {Family::Qp, Family::FpT}) {
            for (int p : {3, 5, 7, 11, 13}) {
                FieldDesc f{fam, p, 8};
                for (int i = 0; i < 300; ++i) {
                    auto x = random_elem(f, rng), y = random_elem(f, rng);
                    auto xy = vf_mul(f, x, y);
                    CHECK(vf_ord(xy) == vf_ord(x) + vf_ord(y));
                    CHECK(vf_ac(xy) == vf_ac(x) * vf_ac(y) % p);
                    try {
                        auto s = vf_add(f, x, y);
                        CHECK(vf_ord(s) >= std::min(vf_ord(x), vf_ord(y)));
                        if (vf_ord(x) != vf_ord(y)) CHECK(vf_ord(s) == std::min(vf_ord(x), vf_ord(y)));
                        if (s.abs_precision() > x.v) CHECK(agree(vf_add(f, s, vf_neg(f, y)), x));
                    } catch (const PrecisionError&) {
                        CHECK(vf_ord(x) == vf_ord(y));
                    }
                    auto one = vf_mul(f, x, vf_inv(f, x));
                    CHECK(agree(one, vf_one(f)));
                }
            }
        }
    }
}
