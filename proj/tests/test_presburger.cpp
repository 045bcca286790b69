#include <doctest.h>

#include "pres_oracle.hpp"
#include "wb/presburger.hpp"

using namespace wb;

namespace {

SortEnv zz(std::initializer_list<const char*> names)
{
    SortEnv e;
    for (auto n : names)
        e[n] = Sort::ZZ;
    return e;
}

bool window_equivalent(const PresburgerSet& s, const Formula& f, std::int64_t lo, std::int64_t hi)
{
    for (std::int64_t x = lo; x <= hi; ++x) {
        oracle::Env env{{s.vars[0], x}};
        if (s.contains({x}) != oracle::holds(f, env)) return false;
    }
    return true;
}

} // namespace

TEST_SUITE("presburger")
{
    TEST_CASE("parity")
    {
        auto f = parse_formula("exists y:ZZ (x = y + y)", zz({"x"}));
        auto s = presburger_qe(*f);
        CHECK(s.to_string() == "x === 0 mod 2");
        CHECK(window_equivalent(s, *f, -100, 100));
        CHECK(pres_eval(s, {4}));
        CHECK_FALSE(pres_eval(s, {7}));
        CHECK(pres_eval(*f, {{"x", 6}}));
        CHECK_FALSE(pres_eval(*f, {{"x", -3}}));
    }

    TEST_CASE("unbounded witness")
    {
        auto f = parse_formula("exists y:ZZ (y <= x)", zz({"x"}));
        auto s = presburger_qe(*f);
        CHECK(s.is_universe_syntactically());
        CHECK(s.to_string() == "true");
    }

    TEST_CASE("nonnegative multiples of three")
    {
        auto f = parse_formula("exists y:ZZ (x = y + y + y /\\ 0 <= y)", zz({"x"}));
        auto s = presburger_qe(*f);
        CHECK(s.to_string() == "0 <= x /\\ x === 0 mod 3");
        CHECK(window_equivalent(s, *f, -100, 100));
    }

    TEST_CASE("quantifier-free input is unchanged in meaning")
    {
        auto f = parse_formula("(x <= 3 \\/ x === 1 mod 4) /\\ ~(x = 7)", zz({"x"}));
        auto s = presburger_qe(*f);
        CHECK(window_equivalent(s, *f, -100, 100));
        auto again = presburger_qe(*s.to_formula());
        CHECK(window_equivalent(again, *f, -100, 100));
        CHECK(again.to_string() == s.to_string());
    }

    TEST_CASE("universal quantifier and two variables")
    {
        auto f = parse_formula("forall z:ZZ (z <= x \\/ y <= z)", zz({"x", "y"}));
        auto s = presburger_qe(*f, {"x", "y"});
        for (int x = -10; x <= 10; ++x)
            for (int y = -10; y <= 10; ++y)
                CHECK(s.contains({x, y}) == (y <= x + 1));
    }

    TEST_CASE("errors")
    {
        auto f = parse_formula("ord(v) = 0", {{"v", Sort::VF}});
        CHECK_THROWS_AS(presburger_qe(*f), DomainError);
        CHECK_THROWS_AS(presburger_qe(*parse_formula("x === 0 mod 2000000", zz({"x"}))), ResourceError);
        auto big = parse_formula("exists y:ZZ (y === 1 mod 1009 /\\ y === 2 mod 1013 /\\ 0 <= y + x)", zz({"x"}));
        CHECK_THROWS_AS(presburger_qe(*big), ResourceError);
    }

    TEST_CASE("normalize_1d examples")
    {
        auto a = presburger_qe(*parse_formula("x >= 3 /\\ x === 1 mod 2", zz({"x"})));
        auto pa = normalize_1d(a);
        REQUIRE(pa.size() == 1);
        CHECK(pa[0] == Progression1D{Progression1D::Up, 3, 2});

        auto b = presburger_qe(*parse_formula("x = 5", zz({"x"})));
        auto pb = normalize_1d(b);
        REQUIRE(pb.size() == 1);
        CHECK(pb[0] == Progression1D{Progression1D::Point, 5, 0});

        auto c = presburger_qe(*parse_formula("x === 0 mod 2", zz({"x"})));
        auto pc = normalize_1d(c);
        REQUIRE(pc.size() == 2);
        CHECK(pc[0] == Progression1D{Progression1D::Up, 0, 2});
        CHECK(pc[1] == Progression1D{Progression1D::Down, -2, 2});

        auto d = presburger_qe(*parse_formula("false", zz({"x"})), {"x"});
        CHECK(normalize_1d(d).empty());
        auto e = presburger_qe(*parse_formula("(x <= -4 /\\ x === 1 mod 3) \\/ x = 0 \\/ (7 <= x /\\ x <= 9)", zz({"x"})));
        auto pe = normalize_1d(e);
        for (std::int64_t x = -1000; x <= 1000; ++x)
            CHECK(progressions_contain(pe, x) == e.contains({x}));
        CHECK(pe.size() == 5);
    }

    TEST_CASE("normalize_1d reconstructs generated sets")
    {
        oracle::PresGen gen(2024);
        for (int i = 0; i < 150; ++i) {
            int counter = 0;
            auto f = gen.formula({"x"}, nullptr, gen.pick(0, 2), 3, counter);
            auto s = presburger_qe(*f, {"x"});
            auto ps = normalize_1d(s);
            for (std::int64_t x = -1000; x <= 1000; ++x)
                if (progressions_contain(ps, x) != s.contains({x})) {
                    FAIL_CHECK("mismatch at " << x << " for " << s.to_string());
                    break;
                }
            for (std::size_t j = 0; j < ps.size(); ++j)
                if (ps[j].kind != Progression1D::Point) CHECK(ps[j].step >= 1);
        }
    }

    TEST_CASE("elimination agrees with brute force")
    {
        oracle::PresGen gen(31337);
        int checked = 0;
        for (int i = 0; i < 120; ++i) {
            int nfree = gen.pick(1, 2);
            int quants = std::min(2, 3 - nfree);
            std::vector<std::string> free = nfree == 1 ? std::vector<std::string>{"x"}
                                                       : std::vector<std::string>{"x", "w"};
            int counter = 0;
            auto f = gen.formula(free, nullptr, gen.pick(1, quants), 3, counter);
            auto s = presburger_qe(*f, free);
            ++checked;
            bool ok = true;
            std::int64_t wlo = nfree == 1 ? -50 : -12, whi = -wlo;
            for (std::int64_t x = wlo; x <= whi && ok; ++x)
                for (std::int64_t w = (nfree == 1 ? 0 : wlo); w <= (nfree == 1 ? 0 : whi) && ok; ++w) {
                    oracle::Env env{{"x", x}};
                    std::vector<std::int64_t> pt{x};
                    if (nfree == 2) {
                        env["w"] = w;
                        pt.push_back(w);
                    }
                    if (s.contains(pt) != oracle::holds(*f, env)) {
                        ok = false;
                        FAIL_CHECK("disagreement at x=" << x << " w=" << w << "\n  formula: " << format(*f)
                                                        << "\n  set: " << s.to_string());
                    }
                }
        }
        CHECK(checked == 120);
    }
}
