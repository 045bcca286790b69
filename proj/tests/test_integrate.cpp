#include <doctest.h>

#include <cstdlib>

#include "closure_suite.hpp"
#include "wb/integrate.hpp"
#include "wb/model_file.hpp"

using namespace wb;

namespace {

FieldDesc qp(int p) { return {Family::Qp, p, kDefaultPrecision}; }
FieldDesc fpt(int p) { return {Family::FpT, p, kDefaultPrecision}; }

const char* kModels = R"(
    var x : VF
    var y : VF
    var a : VF
    var z : ZZ
    var u : RF
    motivic one { term { } }
    motivic three { term { beta: 3 } }
    motivic qinv { term { alpha: -ord(x) } }
    motivic qpos { term { alpha: ord(x) } }
    motivic q2pos { term { alpha: 2 * ord(x) } }
    motivic qinvz { term { alpha: -z } }
    motivic both { term { alpha: -ord(x) } term { beta: 3 } }
    motivic ordx { term { beta: ord(x) } }
    exp lam { term { f: 1; g: x; gshift: -2 } }
    exp lamxy { term { f: 1; g: x * y } }
)";

struct Fixture {
    ModelFile m = parse_model_file(kModels);
    IntegrationOptions opts;

    Integrand fn(const char* name) const
    {
        if (auto* f = m.find_motivic(name)) return *f;
        return *m.find_exp(name);
    }
    FormulaPtr dom(const char* text) const { return parse_formula(text, m.env()); }
    std::vector<VarDecl> vars(std::initializer_list<VarDecl> v) const { return v; }
};

VarDecl vf(const char* n) { return {n, Sort::VF}; }

mpq_class rational(const IntegralResult& r)
{
    REQUIRE(r.value.exact);
    return r.value.value.rational();
}

} // namespace

TEST_SUITE("integrate")
{
    TEST_CASE("valuation ring has mass one")
    {
        Fixture fx;
        auto o = fx.dom("0 <= ord(x)");
        for (int p : {3, 5, 7}) {
            for (auto fd : {qp(p), fpt(p)}) {
                for (int d : {1, 2, 3}) {
                    fx.opts.depth = d;
                    auto r = integrate(fd, fx.fn("one"), o.get(), {vf("x")}, {}, fx.opts);
                    CHECK(r.status == TailStatus::ResolvedGeometric);
                    CHECK(rational(r) == 1);
                    CHECK(r.unknown_cells == 0);
                }
            }
        }
    }

    TEST_CASE("geometric integrand")
    {
        Fixture fx;
        auto o = fx.dom("0 <= ord(x)");
        for (int p : {3, 5, 11}) {
            for (auto fd : {qp(p), fpt(p)}) {
                auto r = integrate(fd, fx.fn("qinv"), o.get(), {vf("x")}, {}, fx.opts);
                CHECK(r.status == TailStatus::ResolvedGeometric);
                CHECK(rational(r) == mpq_class(p, p + 1));
                CHECK(r.upper_tail->ratio == mpq_class(1, p * p).get_str());
            }
        }
    }

    TEST_CASE("scaling, translation and depth refinement")
    {
        Fixture fx;
        auto fd = qp(5);
        auto r = integrate(fd, fx.fn("one"), fx.dom("1 <= ord(x)").get(), {vf("x")}, {}, fx.opts);
        CHECK(rational(r) == mpq_class(1, 5));
        fx.opts.depth = 3;
        auto shifted = fx.dom("x = a \\/ 0 <= ord(x - a)");
        for (auto fdd : {qp(5), fpt(3)}) {
            for (std::int64_t k : {-3, -2, -1, 0, 2}) {
                VFElem a = vf_mul(fdd, vf_uniformizer_power(fdd, k), embed_integer(fdd, 7));
                auto t = integrate(fdd, fx.fn("one"), shifted.get(), {vf("x")}, {{"a", a}}, fx.opts);
                CHECK(rational(t) == 1);
                CHECK(t.unknown_cells == 0);
            }
        }
        std::optional<mpq_class> first;
        for (int d : {1, 2, 3, 4}) {
            fx.opts.depth = d;
            auto v = rational(integrate(fd, fx.fn("qinv"), fx.dom("0 <= ord(x)").get(), {vf("x")}, {}, fx.opts));
            if (first) CHECK(v == *first);
            first = v;
        }
    }

    TEST_CASE("linearity")
    {
        Fixture fx;
        auto fd = fpt(7);
        auto o = fx.dom("0 <= ord(x)");
        auto a = rational(integrate(fd, fx.fn("qinv"), o.get(), {vf("x")}, {}, fx.opts));
        auto b = rational(integrate(fd, fx.fn("three"), o.get(), {vf("x")}, {}, fx.opts));
        auto c = rational(integrate(fd, fx.fn("both"), o.get(), {vf("x")}, {}, fx.opts));
        CHECK(c == a + b);
        CHECK(b == 3);
    }

    TEST_CASE("character integral cancels")
    {
        Fixture fx;
        auto o = fx.dom("0 <= ord(x)");
        fx.opts.depth = 3;
        for (auto fd : {qp(5), fpt(5), qp(3)}) {
            auto r = integrate(fd, fx.fn("lam"), o.get(), {vf("x")}, {}, fx.opts);
            CHECK(r.value.exact);
            CHECK(r.value.value.is_zero());
            CHECK(r.unknown_cells == 0);
        }
        // Two digits do not reach index 0 of w^-2 x on the units.
        fx.opts.depth = 2;
        auto r = integrate(qp(5), fx.fn("lam"), o.get(), {vf("x")}, {}, fx.opts);
        CHECK(r.unknown_cells > 0);
        CHECK(r.unknown_mass > 0);
        CHECK_FALSE(r.notes.empty());
    }

    TEST_CASE("integer and residue coordinates use counting measure")
    {
        Fixture fx;
        auto fd = qp(5);
        auto r = integrate(fd, fx.fn("qinvz"), fx.dom("0 <= z").get(), {{"z", Sort::ZZ}}, {}, fx.opts);
        CHECK(rational(r) == mpq_class(5, 4));
        auto s = integrate(fd, fx.fn("one"), fx.dom("u * u = 1").get(), {{"u", Sort::RF}}, {}, fx.opts);
        CHECK(rational(s) == 2);
        auto w = integrate(fd, fx.fn("one"), fx.dom("0 <= ord(x) /\\ ac(x) = u").get(), {vf("x"), {"u", Sort::RF}},
                           {}, fx.opts);
        CHECK(rational(w) == 1);
    }

    TEST_CASE("two valued coordinates")
    {
        Fixture fx;
        fx.opts.vmin = 0;
        fx.opts.vmax = 10;
        auto fd = qp(3);
        auto r = integrate(fd, fx.fn("qinv"), fx.dom("0 <= ord(x) /\\ 0 <= ord(y)").get(), {vf("x"), vf("y")}, {},
                           fx.opts);
        CHECK(rational(r) == mpq_class(3, 4));
    }

    TEST_CASE("tail status")
    {
        Fixture fx;
        auto fd = qp(5);
        auto o = fx.dom("0 <= ord(x)");
        auto r = integrate(fd, fx.fn("qpos"), o.get(), {vf("x")}, {}, fx.opts);
        CHECK(r.status == TailStatus::DivergentSuspected);
        auto t = integrate(fd, fx.fn("ordx"), o.get(), {vf("x")}, {}, fx.opts);
        CHECK(t.status == TailStatus::ResolvedGeometric);
        CHECK(t.upper_tail->order == 2);
        CHECK(rational(t) == mpq_class(1, 4));
        auto u = integrate(fd, fx.fn("qinvz"), fx.dom("0 <= z /\\ ~(z === 0 mod 5)").get(), {{"z", Sort::ZZ}}, {},
                           fx.opts);
        CHECK(u.status == TailStatus::Truncated);
    }

    TEST_CASE("integrability probe")
    {
        Fixture fx;
        auto fd = fpt(5);
        auto o = fx.dom("0 <= ord(x)");
        auto a = check_integrable(fd, fx.fn("qinv"), o.get(), {vf("x")}, {}, fx.opts);
        CHECK(a.kind == IntegrabilityKind::LikelyIntegrable);
        CHECK(std::abs(a.partial_sums.back() - 5.0 / 6) < 1e-12);
        CHECK(check_integrable(fd, fx.fn("qpos"), o.get(), {vf("x")}, {}, fx.opts).kind ==
              IntegrabilityKind::LikelyDivergent);
        auto g = check_integrable(fd, fx.fn("q2pos"), o.get(), {vf("x")}, {}, fx.opts);
        CHECK(g.kind == IntegrabilityKind::LikelyDivergent);
        CHECK(g.upper.ratios.back() == doctest::Approx(5.0));
        CHECK_THROWS_AS(integrate_out(fd, fx.fn("qpos"), o.get(), {vf("x")}, {}, fx.opts), NotIntegrableError);
    }

    TEST_CASE("boundedness probe")
    {
        Fixture fx;
        auto fd = qp(7);
        auto o = fx.dom("0 <= ord(x)");
        auto a = check_bounded(fd, fx.fn("qinv"), o.get(), {vf("x")}, {}, fx.opts);
        CHECK_FALSE(a.unbounded_suspected);
        CHECK(*a.sup.exact == 1);
        CHECK(vf_ord(std::get<VFElem>(a.witness->at("x"))) == 0);
        auto b = check_bounded(fd, fx.fn("qpos"), fx.dom("~(x = 0) /\\ 0 <= ord(x)").get(), {vf("x")}, {}, fx.opts);
        CHECK(b.unbounded_suspected);
        auto c = check_bounded(fd, fx.fn("three"), nullptr, {vf("x")}, {}, fx.opts);
        CHECK_FALSE(c.unbounded_suspected);
        CHECK(*c.sup.exact == 3);
    }

    TEST_CASE("errors")
    {
        Fixture fx;
        auto fd = qp(5);
        auto o = fx.dom("0 <= ord(x)");
        CHECK_THROWS_AS(integrate(fd, fx.fn("qinv"), o.get(), {vf("y")}, {}, fx.opts), DomainError);
        CHECK_THROWS_AS(integrate(fd, fx.fn("qinv"), o.get(), {vf("x")}, {{"x", vf_one(fd)}}, fx.opts), DomainError);
        fx.opts.budget = 100;
        CHECK_THROWS_AS(integrate(fd, fx.fn("qinv"), o.get(), {vf("x")}, {}, fx.opts), ResourceError);
        fx.opts.budget = 5000000;
        setenv("WB_BUDGET_CELLS", "10", 1);
        CHECK_THROWS_AS(integrate(fd, fx.fn("qinv"), o.get(), {vf("x")}, {}, fx.opts), ResourceError);
        unsetenv("WB_BUDGET_CELLS");
        fx.opts.twist = 10;
        CHECK_THROWS_AS(integrate(fd, fx.fn("lam"), o.get(), {vf("x")}, {}, fx.opts), DomainError);
    }

    TEST_CASE("integrating out matches closed forms")
    {
        auto m = wb::parse_model_file(closure::kModels);
        std::mt19937_64 rng(11);
        for (auto& pair : closure::pairs()) {
            for (int p : {3, 5}) {
                for (auto fd : {qp(p), fpt(p)}) {
                    for (int i = 0; i < 4; ++i) {
                        auto o = closure::check(fd, m, pair, closure::sample_point(fd, pair.sample, rng));
                        INFO(o.detail);
                        CHECK(o.ok);
                    }
                }
            }
        }
    }
}
