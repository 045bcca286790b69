#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "wb/syntax.hpp"

using namespace wb;

TEST_SUITE("syntax")
{
    TEST_CASE("units formula parses, checks and prints")
    {
        SortEnv env{{"x", Sort::VF}};
        auto f = parse_formula("exists y:VF (y*x = 1)", env);
        Signature sig = typecheck(*f);
        CHECK(sig.n == 1);
        CHECK(sig.m == 0);
        CHECK(sig.r == 0);
        REQUIRE(sig.vars.size() == 1);
        CHECK(sig.vars[0].name == "x");
        CHECK(format(*f) == "exists y:VF ((y * x) = 1)");
    }

    TEST_CASE("parity formula")
    {
        auto f = parse_formula("exists y:ZZ (x = y + y)");
        CHECK(format(*f) == "exists y:ZZ (x = (y + y))");
        Signature sig = typecheck(*f);
        CHECK(sig.r == 1);
        CHECK(sig.vars[0] == VarDecl{"x", Sort::ZZ});
    }

    TEST_CASE("ac of zero is RF-valued")
    {
        auto f = parse_formula("ac(x) = 0", {{"x", Sort::VF}});
        CHECK(f->terms[1]->kind == TermKind::Lit);
        CHECK(f->terms[1]->sort == Sort::RF);
        auto g = parse_formula("ac(0) = 0");
        CHECK(g->terms[0]->args[0]->kind == TermKind::Const);
        CHECK(typecheck(*g).vars.empty());
    }

    TEST_CASE("signature ordering")
    {
        auto f = parse_formula("ord(x) = z", {{"x", Sort::VF}, {"z", Sort::ZZ}});
        Signature sig = typecheck(*f);
        CHECK(sig.n == 1);
        CHECK(sig.m == 0);
        CHECK(sig.r == 1);
        auto g = parse_formula("z <= ord(x) /\\ ac(x) = u /\\ ord(w) = z",
                               {{"x", Sort::VF}, {"w", Sort::VF}, {"u", Sort::RF}, {"z", Sort::ZZ}});
        Signature s2 = typecheck(*g);
        std::vector<VarDecl> want = {{"x", Sort::VF}, {"w", Sort::VF}, {"u", Sort::RF}, {"z", Sort::ZZ}};
        CHECK(s2.vars == want);
    }

    TEST_CASE("sort errors")
    {
        SortEnv env{{"x", Sort::VF}};
        CHECK_THROWS_AS(parse_formula("x + ord(x) = 0", env), SortError);
        CHECK_THROWS_AS(parse_formula("x <= 1", env), SortError);
        CHECK_THROWS_AS(parse_formula("ac(x) = ord(x)", env), SortError);
        CHECK_THROWS_AS(parse_formula("z * w = 1", {{"z", Sort::ZZ}, {"w", Sort::ZZ}}), SortError);
        CHECK_THROWS_AS(parse_formula("y = y"), SortError);
        try {
            parse_formula("x + ord(x) = 0", env);
        } catch (const SortError& e) {
            CHECK(e.subterm() == "x + ord(x)");
        }
    }

    TEST_CASE("syntax errors carry positions")
    {
        try {
            parse_formula("x = = 1");
            FAIL("expected a syntax error");
        } catch (const SyntaxError& e) {
            CHECK(e.position() == 4);
        }
        CHECK_THROWS_AS(parse_formula("x === y mod 1"), SyntaxError);
        CHECK_THROWS_AS(parse_formula("exists ord:ZZ (ord = 1)"), SyntaxError);
        CHECK_THROWS_AS(parse_formula("(x = 1"), SyntaxError);
    }

    TEST_CASE("sugar: scalar multiples, comparisons, subtraction")
    {
        auto f = parse_formula("3*z >= 2", {{"z", Sort::ZZ}});
        CHECK(format(*f) == "2 <= ((z + z) + z)");
        auto g = parse_formula("z < w", {{"z", Sort::ZZ}, {"w", Sort::ZZ}});
        CHECK(format(*g) == "(z + 1) <= w");
        auto h = parse_formula("x - 1 = t*x", {{"x", Sort::VF}});
        CHECK(format(*h) == "(x + -(1)) = (t * x)");
        auto k = parse_formula("-2*z = 0", {{"z", Sort::ZZ}});
        CHECK(format(*k) == "-(z + z) = 0");
        auto c = parse_formula("x = poly(1, 0, 3)", {{"x", Sort::VF}});
        CHECK(c->terms[1]->poly == std::vector<std::int64_t>{1, 0, 3});
    }

    TEST_CASE("unanchored literals keep their sort through format")
    {
        auto f = parse_formula("1:RF + 1:RF = 2:RF");
        CHECK(format(*f) == "(1:RF + 1:RF) = 2:RF");
        CHECK(*parse_formula(format(*f)) == *f);
        auto g = parse_formula("1:VF = 0:VF");
        CHECK(*parse_formula(format(*g)) == *g);
    }

    TEST_CASE("formula files")
    {
        auto file = parse_formula_file("# units of the valuation ring\n"
                                       "var x : VF\n"
                                       "formula units := exists y:VF (y*x = 1)\n"
                                       "formula inO := x = 0 \\/ 0 <= ord(x)   # comment\n");
        REQUIRE(file.formulas.size() == 2);
        CHECK(file.find("units") != nullptr);
        CHECK(file.find("nope") == nullptr);
        CHECK(typecheck(**file.find("inO")).n == 1);
        CHECK_THROWS_AS(parse_formula_file("var x : QQ\n"), SyntaxError);
        CHECK_THROWS_AS(parse_formula_file("formula a := x = = 1\n"), SyntaxError);
    }
}

// ---------------------------------------------------------------------------
// generated ASTs

namespace {

struct Gen {
    std::mt19937_64 rng;
    std::vector<std::pair<std::string, Sort>> bound;
    int fresh = 0;

    explicit Gen(std::uint64_t seed) : rng(seed) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

    TermPtr var_of(Sort s)
    {
        static const char* vf[] = {"x", "y"};
        static const char* rf[] = {"u", "w"};
        static const char* zz[] = {"a", "b"};
        std::vector<std::string> names;
        for (auto& [n, bs] : bound)
            if (bs == s) names.push_back(n);
        const char** pool = s == Sort::VF ? vf : s == Sort::RF ? rf : zz;
        names.push_back(pool[0]);
        names.push_back(pool[1]);
        return build::var(names[pick(static_cast<int>(names.size()))], s);
    }

    TermPtr term(Sort s, int depth)
    {
        int choice = depth <= 0 ? pick(2) : pick(7);
        switch (choice) {
        case 0: return var_of(s);
        case 1:
            if (s == Sort::VF) {
                std::vector<std::int64_t> poly(pick(4));
                for (auto& c : poly)
                    c = pick(11) - 5;
                return build::constant(poly);
            }
            return build::lit(pick(21) - 10, s);
        case 2: return build::add(term(s, depth - 1), term(s, depth - 1));
        case 3:
            if (s == Sort::ZZ) return build::add(term(s, depth - 1), build::lit(pick(5), s));
            return build::mul(term(s, depth - 1), term(s, depth - 1));
        case 4: return build::neg(term(s, depth - 1));
        default:
            if (s == Sort::ZZ) return build::ord(term(Sort::VF, depth - 1));
            if (s == Sort::RF) return build::ac(term(Sort::VF, depth - 1));
            return term(s, depth - 1);
        }
    }

    Sort any_sort() { return static_cast<Sort>(pick(3)); }

    FormulaPtr formula(int depth)
    {
        int choice = depth <= 0 ? pick(4) : pick(10);
        switch (choice) {
        case 0: {
            Sort s = any_sort();
            return build::eq(term(s, 2), term(s, 2));
        }
        case 1: return build::le(term(Sort::ZZ, 2), term(Sort::ZZ, 2));
        case 2: return build::cong(term(Sort::ZZ, 2), term(Sort::ZZ, 1), 2 + pick(5));
        case 3: return build::truth(pick(2) == 0);
        case 4: return build::conj(formula(depth - 1), formula(depth - 1));
        case 5: return build::disj(formula(depth - 1), formula(depth - 1));
        case 6: return build::negate(formula(depth - 1));
        default: {
            std::string v = "v" + std::to_string(fresh++);
            Sort s = any_sort();
            bound.emplace_back(v, s);
            auto body = formula(depth - 1);
            bound.pop_back();
            return pick(2) ? build::exists(v, s, body) : build::forall(v, s, body);
        }
        }
    }
};

void reference_free(const Term& t, std::vector<std::string>& scope, std::set<std::string>& out)
{
    if (t.kind == TermKind::Var) {
        if (std::find(scope.begin(), scope.end(), t.name) == scope.end()) out.insert(t.name);
        return;
    }
    for (auto& a : t.args)
        reference_free(*a, scope, out);
}

void reference_free(const Formula& f, std::vector<std::string>& scope, std::set<std::string>& out)
{
    for (auto& t : f.terms)
        reference_free(*t, scope, out);
    if (f.kind == FormulaKind::Exists || f.kind == FormulaKind::Forall) scope.push_back(f.var);
    for (auto& s : f.subs)
        reference_free(*s, scope, out);
    if (f.kind == FormulaKind::Exists || f.kind == FormulaKind::Forall) scope.pop_back();
}

SortEnv free_env()
{
    return {{"x", Sort::VF}, {"y", Sort::VF}, {"u", Sort::RF}, {"w", Sort::RF}, {"a", Sort::ZZ}, {"b", Sort::ZZ}};
}

// Replaces one random term node by a term of a different sort.
TermPtr corrupt(const TermPtr& t, Gen& g, bool& done)
{
    if (done) return t;
    if (t->args.empty() || g.pick(3) == 0) {
        Sort s = term_sort(*t);
        Sort other = static_cast<Sort>((static_cast<int>(s) + 1 + g.pick(2)) % 3);
        done = true;
        return g.term(other, 1);
    }
    auto copy = std::make_shared<Term>(*t);
    int i = g.pick(static_cast<int>(copy->args.size()));
    copy->args[i] = corrupt(copy->args[i], g, done);
    return copy;
}

FormulaPtr corrupt(const FormulaPtr& f, Gen& g, bool& done)
{
    if (done) return f;
    auto copy = std::make_shared<Formula>(*f);
    if (!copy->terms.empty()) {
        int i = g.pick(2);
        copy->terms[i] = corrupt(copy->terms[i], g, done);
    } else if (!copy->subs.empty()) {
        int i = g.pick(static_cast<int>(copy->subs.size()));
        copy->subs[i] = corrupt(copy->subs[i], g, done);
    }
    return copy;
}

} // namespace

TEST_SUITE("syntax")
{
    TEST_CASE("round trip on generated formulas")
    {
        Gen g(12345);
        for (int i = 0; i < 2000; ++i) {
            auto f = g.formula(3);
            typecheck(*f);
            std::string text = format(*f);
            FormulaPtr back;
            try {
                back = parse_formula(text, free_env());
            } catch (const Error& e) {
                FAIL_CHECK(text << " : " << e.what());
                continue;
            }
            if (!(*back == *f)) FAIL_CHECK("round trip changed " << text << " into " << format(*back));
        }
    }

    TEST_CASE("free variables match a reference scan")
    {
        Gen g(777);
        for (int i = 0; i < 1000; ++i) {
            auto f = g.formula(3);
            Signature sig = typecheck(*f);
            std::vector<std::string> scope;
            std::set<std::string> ref;
            reference_free(*f, scope, ref);
            std::set<std::string> got;
            for (auto& d : sig.vars)
                got.insert(d.name);
            CHECK(got == ref);
            CHECK(sig.n + sig.m + sig.r == static_cast<int>(sig.vars.size()));
            for (std::size_t k = 1; k < sig.vars.size(); ++k)
                CHECK(static_cast<int>(sig.vars[k - 1].sort) <= static_cast<int>(sig.vars[k].sort));
        }
    }

    TEST_CASE("ill-sorted trees are rejected")
    {
        Gen g(4242);
        int tested = 0;
        for (int i = 0; i < 2000 && tested < 500; ++i) {
            auto f = g.formula(2);
            bool done = false;
            auto bad = corrupt(f, g, done);
            if (!done) continue;
            ++tested;
            CHECK_THROWS_AS(typecheck(*bad), SortError);
        }
        CHECK(tested >= 300);
    }
}
