#include "wb/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <set>
#include <sstream>

namespace wb {

std::string_view sort_name(Sort s)
{
    switch (s) {
    case Sort::VF: return "VF";
    case Sort::RF: return "RF";
    case Sort::ZZ: return "ZZ";
    }
    return "?";
}

std::optional<Sort> sort_from_name(std::string_view name)
{
    if (name == "VF") return Sort::VF;
    if (name == "RF") return Sort::RF;
    if (name == "ZZ") return Sort::ZZ;
    return std::nullopt;
}

bool is_reserved(std::string_view w)
{
    static const std::set<std::string_view> words = {
        "exists", "forall", "ord", "ac", "mod", "t", "poly", "true", "false", "VF", "RF", "ZZ"};
    return words.count(w) > 0;
}

// ---------------------------------------------------------------------------
// equality and builders

bool operator==(const Term& a, const Term& b)
{
    if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
    switch (a.kind) {
    case TermKind::Var:
        if (a.name != b.name || a.sort != b.sort) return false;
        break;
    case TermKind::Lit:
        if (a.value != b.value || a.sort != b.sort) return false;
        break;
    case TermKind::Const:
        if (a.poly != b.poly) return false;
        break;
    default: break;
    }
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!(*a.args[i] == *b.args[i])) return false;
    return true;
}

bool operator==(const Formula& a, const Formula& b)
{
    if (a.kind != b.kind || a.terms.size() != b.terms.size() || a.subs.size() != b.subs.size())
        return false;
    if (a.kind == FormulaKind::Cong && a.modulus != b.modulus) return false;
    if ((a.kind == FormulaKind::Exists || a.kind == FormulaKind::Forall) &&
        (a.var != b.var || a.var_sort != b.var_sort))
        return false;
    for (std::size_t i = 0; i < a.terms.size(); ++i)
        if (!(*a.terms[i] == *b.terms[i])) return false;
    for (std::size_t i = 0; i < a.subs.size(); ++i)
        if (!(*a.subs[i] == *b.subs[i])) return false;
    return true;
}

namespace build {

static TermPtr node(TermKind k, std::vector<TermPtr> args)
{
    auto t = std::make_shared<Term>();
    t->kind = k;
    t->args = std::move(args);
    return t;
}

TermPtr var(std::string name, Sort s)
{
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Var;
    t->name = std::move(name);
    t->sort = s;
    return t;
}

TermPtr lit(std::int64_t v, Sort s)
{
    if (s == Sort::VF) return constant({v});
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Lit;
    t->value = v;
    t->sort = s;
    return t;
}

TermPtr constant(std::vector<std::int64_t> poly)
{
    while (!poly.empty() && poly.back() == 0)
        poly.pop_back();
    auto t = std::make_shared<Term>();
    t->kind = TermKind::Const;
    t->sort = Sort::VF;
    t->poly = std::move(poly);
    return t;
}

TermPtr t_symbol() { return constant({0, 1}); }
TermPtr add(TermPtr a, TermPtr b) { return node(TermKind::Add, {std::move(a), std::move(b)}); }
TermPtr mul(TermPtr a, TermPtr b) { return node(TermKind::Mul, {std::move(a), std::move(b)}); }
TermPtr neg(TermPtr a) { return node(TermKind::Neg, {std::move(a)}); }
TermPtr ord(TermPtr a) { return node(TermKind::Ord, {std::move(a)}); }
TermPtr ac(TermPtr a) { return node(TermKind::Ac, {std::move(a)}); }

static FormulaPtr fnode(FormulaKind k)
{
    auto f = std::make_shared<Formula>();
    f->kind = k;
    return f;
}

FormulaPtr truth(bool value) { return fnode(value ? FormulaKind::True : FormulaKind::False); }

FormulaPtr eq(TermPtr a, TermPtr b)
{
    auto f = std::make_shared<Formula>();
    f->kind = FormulaKind::Eq;
    f->terms = {std::move(a), std::move(b)};
    return f;
}

FormulaPtr le(TermPtr a, TermPtr b)
{
    auto f = std::make_shared<Formula>();
    f->kind = FormulaKind::Le;
    f->terms = {std::move(a), std::move(b)};
    return f;
}

FormulaPtr cong(TermPtr a, TermPtr b, std::int64_t d)
{
    auto f = std::make_shared<Formula>();
    f->kind = FormulaKind::Cong;
    f->terms = {std::move(a), std::move(b)};
    f->modulus = d;
    return f;
}

static FormulaPtr connective(FormulaKind k, std::vector<FormulaPtr> subs)
{
    auto f = std::make_shared<Formula>();
    f->kind = k;
    f->subs = std::move(subs);
    return f;
}

FormulaPtr conj(FormulaPtr a, FormulaPtr b) { return connective(FormulaKind::And, {std::move(a), std::move(b)}); }
FormulaPtr disj(FormulaPtr a, FormulaPtr b) { return connective(FormulaKind::Or, {std::move(a), std::move(b)}); }
FormulaPtr negate(FormulaPtr a) { return connective(FormulaKind::Not, {std::move(a)}); }

static FormulaPtr quant(FormulaKind k, std::string v, Sort s, FormulaPtr body)
{
    auto f = std::make_shared<Formula>();
    f->kind = k;
    f->var = std::move(v);
    f->var_sort = s;
    f->subs = {std::move(body)};
    return f;
}

FormulaPtr exists(std::string v, Sort s, FormulaPtr body) { return quant(FormulaKind::Exists, std::move(v), s, std::move(body)); }
FormulaPtr forall(std::string v, Sort s, FormulaPtr body) { return quant(FormulaKind::Forall, std::move(v), s, std::move(body)); }

} // namespace build

// ---------------------------------------------------------------------------
// lexer

namespace {

enum class Tok { Int, Ident, Sym, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::int64_t value = 0;
    std::size_t pos = 0;
    std::size_t end = 0;
};

std::vector<Token> lex(std::string_view src)
{
    static const char* const symbols[] = {"===", "/\\", "\\/", "<=", ">=", ":=", "+", "-", "*", "=", "<",
                                          ">",   "~",   "(",   ")",  ":",  ",",  "[", "]", "{", "}", ";", "^", "!"};
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token tok;
        tok.pos = i;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
                ++j;
            tok.kind = Tok::Int;
            tok.text = std::string(src.substr(i, j - i));
            auto [p, ec] = std::from_chars(src.data() + i, src.data() + j, tok.value);
            if (ec != std::errc()) throw SyntaxError("integer literal out of range", i);
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
                ++j;
            tok.kind = Tok::Ident;
            tok.text = std::string(src.substr(i, j - i));
            i = j;
        } else {
            bool found = false;
            for (const char* s : symbols) {
                std::string_view sv(s);
                if (src.substr(i, sv.size()) == sv) {
                    tok.kind = Tok::Sym;
                    tok.text = std::string(sv);
                    i += sv.size();
                    found = true;
                    break;
                }
            }
            if (!found) throw SyntaxError(std::string("unexpected character '") + c + "'", i);
        }
        tok.end = i;
        out.push_back(std::move(tok));
    }
    Token end;
    end.kind = Tok::End;
    end.pos = end.end = src.size();
    out.push_back(end);
    return out;
}

// ---------------------------------------------------------------------------
// raw (unsorted) trees

struct RawTerm {
    enum Kind { Var, Num, T, Poly, Add, Sub, Mul, Neg, Ord, Ac } kind = Num;
    std::string name;
    std::int64_t value = 0;
    std::optional<Sort> annot;
    std::vector<std::int64_t> poly;
    std::vector<std::unique_ptr<RawTerm>> kids;
    std::size_t begin = 0, end = 0;
    int slot = -1;
};

struct RawFormula {
    enum Kind { True, False, Eq, Le, Ge, Lt, Gt, Cong, And, Or, Not, Exists, Forall } kind = True;
    std::unique_ptr<RawTerm> lhs, rhs;
    std::int64_t modulus = 0;
    std::vector<std::unique_ptr<RawFormula>> kids;
    std::string var;
    Sort var_sort = Sort::ZZ;
    std::size_t begin = 0, end = 0;
};

class Parser {
public:
    Parser(std::string_view src) : src_(src), toks_(lex(src)) {}

    std::unique_ptr<RawFormula> formula_all()
    {
        auto f = formula();
        expect_end();
        return f;
    }

    std::unique_ptr<RawTerm> term_all()
    {
        auto t = term();
        expect_end();
        return t;
    }

private:
    std::string_view src_;
    std::vector<Token> toks_;
    std::size_t k_ = 0;

    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(k_ + ahead, toks_.size() - 1)]; }
    bool is_sym(std::string_view s, std::size_t ahead = 0) const
    {
        const Token& t = peek(ahead);
        return t.kind == Tok::Sym && t.text == s;
    }
    bool is_word(std::string_view s) const
    {
        const Token& t = peek();
        return t.kind == Tok::Ident && t.text == s;
    }
    std::size_t prev_end() const { return k_ == 0 ? 0 : toks_[k_ - 1].end; }

    [[noreturn]] void fail(const std::string& what) const
    {
        const Token& t = peek();
        std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
        throw SyntaxError(what + ", found " + got, t.pos);
    }

    void expect_sym(std::string_view s)
    {
        if (!is_sym(s)) fail("expected '" + std::string(s) + "'");
        ++k_;
    }

    void expect_end()
    {
        if (peek().kind != Tok::End) fail("unexpected trailing input");
    }

    std::int64_t integer()
    {
        bool negative = false;
        if (is_sym("-")) {
            negative = true;
            ++k_;
        }
        if (peek().kind != Tok::Int) fail("expected integer");
        std::int64_t v = peek().value;
        ++k_;
        return negative ? -v : v;
    }

    Sort sort()
    {
        if (peek().kind == Tok::Ident) {
            if (auto s = sort_from_name(peek().text)) {
                ++k_;
                return *s;
            }
        }
        fail("expected sort VF, RF or ZZ");
    }

    std::unique_ptr<RawFormula> formula()
    {
        auto lhs = conjunction();
        while (is_sym("\\/")) {
            ++k_;
            auto rhs = conjunction();
            auto f = std::make_unique<RawFormula>();
            f->kind = RawFormula::Or;
            f->begin = lhs->begin;
            f->kids.push_back(std::move(lhs));
            f->kids.push_back(std::move(rhs));
            f->end = prev_end();
            lhs = std::move(f);
        }
        return lhs;
    }

    std::unique_ptr<RawFormula> conjunction()
    {
        auto lhs = unary();
        while (is_sym("/\\")) {
            ++k_;
            auto rhs = unary();
            auto f = std::make_unique<RawFormula>();
            f->kind = RawFormula::And;
            f->begin = lhs->begin;
            f->kids.push_back(std::move(lhs));
            f->kids.push_back(std::move(rhs));
            f->end = prev_end();
            lhs = std::move(f);
        }
        return lhs;
    }

    std::unique_ptr<RawFormula> unary()
    {
        std::size_t begin = peek().pos;
        if (is_sym("~")) {
            ++k_;
            auto f = std::make_unique<RawFormula>();
            f->kind = RawFormula::Not;
            f->begin = begin;
            f->kids.push_back(unary());
            f->end = prev_end();
            return f;
        }
        if (is_word("exists") || is_word("forall")) {
            auto f = std::make_unique<RawFormula>();
            f->kind = is_word("exists") ? RawFormula::Exists : RawFormula::Forall;
            f->begin = begin;
            ++k_;
            if (peek().kind != Tok::Ident || is_reserved(peek().text)) fail("expected bound variable name");
            f->var = peek().text;
            ++k_;
            expect_sym(":");
            f->var_sort = sort();
            f->kids.push_back(unary());
            f->end = prev_end();
            return f;
        }
        return primary();
    }

    std::unique_ptr<RawFormula> primary()
    {
        std::size_t begin = peek().pos;
        if (is_word("true") || is_word("false")) {
            auto f = std::make_unique<RawFormula>();
            f->kind = is_word("true") ? RawFormula::True : RawFormula::False;
            f->begin = begin;
            ++k_;
            f->end = prev_end();
            return f;
        }
        if (is_sym("(")) {
            // Either a parenthesized formula or an atom whose left term starts
            // with a parenthesis; try the atom first.
            std::size_t save = k_;
            try {
                return atom();
            } catch (const SyntaxError& atom_error) {
                k_ = save;
                ++k_;
                try {
                    auto f = formula();
                    expect_sym(")");
                    return f;
                } catch (const SyntaxError& paren_error) {
                    throw paren_error.position() >= atom_error.position() ? paren_error : atom_error;
                }
            }
        }
        return atom();
    }

    std::unique_ptr<RawFormula> atom()
    {
        auto f = std::make_unique<RawFormula>();
        f->begin = peek().pos;
        f->lhs = term();
        if (is_sym("=")) f->kind = RawFormula::Eq;
        else if (is_sym("<=")) f->kind = RawFormula::Le;
        else if (is_sym(">=")) f->kind = RawFormula::Ge;
        else if (is_sym("<")) f->kind = RawFormula::Lt;
        else if (is_sym(">")) f->kind = RawFormula::Gt;
        else if (is_sym("===")) f->kind = RawFormula::Cong;
        else fail("expected relation (=, <=, >=, <, >, ===)");
        ++k_;
        f->rhs = term();
        if (f->kind == RawFormula::Cong) {
            if (!is_word("mod")) fail("expected 'mod' after congruence");
            ++k_;
            if (peek().kind != Tok::Int) fail("congruence modulus must be an integer literal");
            f->modulus = peek().value;
            if (f->modulus < 2) throw SyntaxError("congruence modulus must be at least 2", peek().pos);
            ++k_;
        }
        f->end = prev_end();
        return f;
    }

    std::unique_ptr<RawTerm> binary(RawTerm::Kind k, std::unique_ptr<RawTerm> a, std::unique_ptr<RawTerm> b)
    {
        auto t = std::make_unique<RawTerm>();
        t->kind = k;
        t->begin = a->begin;
        t->kids.push_back(std::move(a));
        t->kids.push_back(std::move(b));
        t->end = prev_end();
        return t;
    }

    std::unique_ptr<RawTerm> term()
    {
        auto lhs = product();
        while (is_sym("+") || is_sym("-")) {
            auto k = is_sym("+") ? RawTerm::Add : RawTerm::Sub;
            ++k_;
            auto rhs = product();
            lhs = binary(k, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    std::unique_ptr<RawTerm> product()
    {
        auto lhs = unary_term();
        while (is_sym("*")) {
            ++k_;
            auto rhs = unary_term();
            lhs = binary(RawTerm::Mul, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    std::unique_ptr<RawTerm> unary_term()
    {
        std::size_t begin = peek().pos;
        if (is_sym("-")) {
            if (peek(1).kind == Tok::Int) {
                ++k_;
                auto t = number_literal();
                t->value = -t->value;
                t->begin = begin;
                return t;
            }
            ++k_;
            auto t = std::make_unique<RawTerm>();
            t->kind = RawTerm::Neg;
            t->begin = begin;
            t->kids.push_back(unary_term());
            t->end = prev_end();
            return t;
        }
        return primary_term();
    }

    std::unique_ptr<RawTerm> number_literal()
    {
        auto t = std::make_unique<RawTerm>();
        t->kind = RawTerm::Num;
        t->begin = peek().pos;
        t->value = peek().value;
        ++k_;
        if (is_sym(":")) {
            ++k_;
            t->annot = sort();
        }
        t->end = prev_end();
        return t;
    }

    std::unique_ptr<RawTerm> primary_term()
    {
        const Token& tok = peek();
        if (tok.kind == Tok::Int) return number_literal();
        if (is_sym("(")) {
            ++k_;
            auto t = term();
            expect_sym(")");
            return t;
        }
        if (tok.kind != Tok::Ident) fail("expected term");
        auto t = std::make_unique<RawTerm>();
        t->begin = tok.pos;
        if (tok.text == "t") {
            t->kind = RawTerm::T;
            ++k_;
        } else if (tok.text == "poly") {
            t->kind = RawTerm::Poly;
            ++k_;
            expect_sym("(");
            t->poly.push_back(integer());
            while (is_sym(",")) {
                ++k_;
                t->poly.push_back(integer());
            }
            expect_sym(")");
        } else if (tok.text == "ord" || tok.text == "ac") {
            t->kind = tok.text == "ord" ? RawTerm::Ord : RawTerm::Ac;
            ++k_;
            expect_sym("(");
            t->kids.push_back(term());
            expect_sym(")");
        } else if (is_reserved(tok.text)) {
            fail("unexpected keyword");
        } else {
            t->kind = RawTerm::Var;
            t->name = tok.text;
            ++k_;
        }
        t->end = prev_end();
        return t;
    }
};

// ---------------------------------------------------------------------------
// sort inference on raw trees

class Elaborator {
public:
    Elaborator(std::string_view src, const SortEnv& env) : src_(src), env_(env) {}

    FormulaPtr run(RawFormula& f)
    {
        constrain(f);
        return build_formula(f);
    }

    TermPtr run(RawTerm& t, std::optional<Sort> expected)
    {
        int s = constrain(t);
        if (expected) fix(s, *expected, t);
        return build_term(t, expected.value_or(Sort::ZZ));
    }

private:
    std::string_view src_;
    const SortEnv& env_;
    std::vector<int> parent_;
    std::vector<std::optional<Sort>> fixed_;
    std::vector<std::pair<std::string, int>> scope_;
    std::map<std::string, int> free_slots_;
    std::map<const RawTerm*, int> var_slots_;

    std::string text(std::size_t b, std::size_t e) const { return std::string(src_.substr(b, e - b)); }

    int fresh()
    {
        parent_.push_back(static_cast<int>(parent_.size()));
        fixed_.push_back(std::nullopt);
        return parent_.back();
    }

    int find(int s)
    {
        while (parent_[s] != s) {
            parent_[s] = parent_[parent_[s]];
            s = parent_[s];
        }
        return s;
    }

    void fix(int s, Sort sort, const RawTerm& at)
    {
        s = find(s);
        if (fixed_[s] && *fixed_[s] != sort)
            throw SortError("sort mismatch: expected " + std::string(sort_name(sort)) + ", found " +
                                std::string(sort_name(*fixed_[s])),
                            text(at.begin, at.end));
        fixed_[s] = sort;
    }

    void unify(int a, int b, std::size_t begin, std::size_t end)
    {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (fixed_[a] && fixed_[b] && *fixed_[a] != *fixed_[b])
            throw SortError("sort mismatch: " + std::string(sort_name(*fixed_[a])) + " against " +
                                std::string(sort_name(*fixed_[b])),
                            text(begin, end));
        if (!fixed_[a]) fixed_[a] = fixed_[b];
        parent_[b] = a;
    }

    int lookup_var(const RawTerm& t)
    {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->first == t.name) return it->second;
        auto fs = free_slots_.find(t.name);
        if (fs != free_slots_.end()) return fs->second;
        int s = fresh();
        if (auto e = env_.find(t.name); e != env_.end()) fixed_[s] = e->second;
        free_slots_[t.name] = s;
        return s;
    }

    int constrain(RawTerm& t)
    {
        t.slot = fresh();
        switch (t.kind) {
        case RawTerm::Var: {
            int v = lookup_var(t);
            var_slots_[&t] = v;
            unify(v, t.slot, t.begin, t.end);
            break;
        }
        case RawTerm::Num:
            if (t.annot) fix(t.slot, *t.annot, t);
            break;
        case RawTerm::T:
        case RawTerm::Poly: fix(t.slot, Sort::VF, t); break;
        case RawTerm::Add:
        case RawTerm::Sub:
        case RawTerm::Mul:
            for (auto& k : t.kids)
                unify(t.slot, constrain(*k), t.begin, t.end);
            break;
        case RawTerm::Neg: unify(t.slot, constrain(*t.kids[0]), t.begin, t.end); break;
        case RawTerm::Ord:
            fix(constrain(*t.kids[0]), Sort::VF, *t.kids[0]);
            fix(t.slot, Sort::ZZ, t);
            break;
        case RawTerm::Ac:
            fix(constrain(*t.kids[0]), Sort::VF, *t.kids[0]);
            fix(t.slot, Sort::RF, t);
            break;
        }
        return t.slot;
    }

    void constrain(RawFormula& f)
    {
        switch (f.kind) {
        case RawFormula::True:
        case RawFormula::False: break;
        case RawFormula::Eq: unify(constrain(*f.lhs), constrain(*f.rhs), f.begin, f.end); break;
        case RawFormula::Le:
        case RawFormula::Ge:
        case RawFormula::Lt:
        case RawFormula::Gt:
        case RawFormula::Cong:
            fix(constrain(*f.lhs), Sort::ZZ, *f.lhs);
            fix(constrain(*f.rhs), Sort::ZZ, *f.rhs);
            break;
        case RawFormula::And:
        case RawFormula::Or:
        case RawFormula::Not:
            for (auto& k : f.kids)
                constrain(*k);
            break;
        case RawFormula::Exists:
        case RawFormula::Forall: {
            int s = fresh();
            fixed_[s] = f.var_sort;
            scope_.emplace_back(f.var, s);
            constrain(*f.kids[0]);
            scope_.pop_back();
            break;
        }
        }
    }

    Sort resolved(const RawTerm& t)
    {
        auto s = fixed_[find(t.slot)];
        if (s) return *s;
        if (t.kind == RawTerm::Var)
            throw SortError("cannot infer the sort of free variable '" + t.name + "'; declare it", t.name);
        return Sort::ZZ;
    }

    static const RawTerm* literal_factor(const RawTerm& t)
    {
        return t.kind == RawTerm::Num ? &t : nullptr;
    }

    TermPtr repeat_sum(std::int64_t n, const RawTerm& other, Sort s, const RawTerm& at)
    {
        if (n > 1000 || n < -1000)
            throw SortError("ZZ-sort scalar multiple too large to expand (|n| > 1000)", text(at.begin, at.end));
        if (n == 0) return build::lit(0, Sort::ZZ);
        TermPtr unit = build_term(other, s);
        TermPtr acc = unit;
        for (std::int64_t i = 1; i < (n < 0 ? -n : n); ++i)
            acc = build::add(acc, unit);
        return n < 0 ? build::neg(acc) : acc;
    }

    TermPtr build_term(const RawTerm& t, Sort)
    {
        Sort s = resolved(t);
        switch (t.kind) {
        case RawTerm::Var: return build::var(t.name, s);
        case RawTerm::Num: return build::lit(t.value, s);
        case RawTerm::T: return build::t_symbol();
        case RawTerm::Poly: return build::constant(t.poly);
        case RawTerm::Add: return build::add(build_term(*t.kids[0], s), build_term(*t.kids[1], s));
        case RawTerm::Sub: return build::add(build_term(*t.kids[0], s), build::neg(build_term(*t.kids[1], s)));
        case RawTerm::Mul: {
            if (s != Sort::ZZ) return build::mul(build_term(*t.kids[0], s), build_term(*t.kids[1], s));
            if (auto n = literal_factor(*t.kids[0])) return repeat_sum(n->value, *t.kids[1], s, t);
            if (auto n = literal_factor(*t.kids[1])) return repeat_sum(n->value, *t.kids[0], s, t);
            throw SortError("ZZ-sort multiplication needs a literal factor (Presburger restriction)",
                            text(t.begin, t.end));
        }
        case RawTerm::Neg: return build::neg(build_term(*t.kids[0], s));
        case RawTerm::Ord: return build::ord(build_term(*t.kids[0], Sort::VF));
        case RawTerm::Ac: return build::ac(build_term(*t.kids[0], Sort::VF));
        }
        return nullptr;
    }

    FormulaPtr build_formula(const RawFormula& f)
    {
        auto term = [&](const std::unique_ptr<RawTerm>& t) { return build_term(*t, resolved(*t)); };
        switch (f.kind) {
        case RawFormula::True: return build::truth(true);
        case RawFormula::False: return build::truth(false);
        case RawFormula::Eq: return build::eq(term(f.lhs), term(f.rhs));
        case RawFormula::Le: return build::le(term(f.lhs), term(f.rhs));
        case RawFormula::Ge: return build::le(term(f.rhs), term(f.lhs));
        case RawFormula::Lt: return build::le(build::add(term(f.lhs), build::lit(1, Sort::ZZ)), term(f.rhs));
        case RawFormula::Gt: return build::le(build::add(term(f.rhs), build::lit(1, Sort::ZZ)), term(f.lhs));
        case RawFormula::Cong: return build::cong(term(f.lhs), term(f.rhs), f.modulus);
        case RawFormula::And: return build::conj(build_formula(*f.kids[0]), build_formula(*f.kids[1]));
        case RawFormula::Or: return build::disj(build_formula(*f.kids[0]), build_formula(*f.kids[1]));
        case RawFormula::Not: return build::negate(build_formula(*f.kids[0]));
        case RawFormula::Exists: return build::exists(f.var, f.var_sort, build_formula(*f.kids[0]));
        case RawFormula::Forall: return build::forall(f.var, f.var_sort, build_formula(*f.kids[0]));
        }
        return nullptr;
    }
};

} // namespace

FormulaPtr parse_formula(std::string_view text, const SortEnv& env)
{
    Parser p(text);
    auto raw = p.formula_all();
    Elaborator e(text, env);
    auto f = e.run(*raw);
    typecheck(*f);
    return f;
}

TermPtr parse_term(std::string_view text, const SortEnv& env, std::optional<Sort> expected)
{
    Parser p(text);
    auto raw = p.term_all();
    Elaborator e(text, env);
    auto t = e.run(*raw, expected);
    term_sort(*t);
    return t;
}

// ---------------------------------------------------------------------------
// checker

Sort term_sort(const Term& t)
{
    auto same = [&](Sort want, const Term& child, const char* op) {
        Sort got = term_sort(child);
        if (got != want)
            throw SortError(std::string("operand of ") + op + " has sort " + std::string(sort_name(got)) +
                                ", expected " + std::string(sort_name(want)),
                            format(t));
    };
    switch (t.kind) {
    case TermKind::Var: return t.sort;
    case TermKind::Lit:
        if (t.sort == Sort::VF) throw SortError("VF literals must be constants", format(t));
        return t.sort;
    case TermKind::Const: return Sort::VF;
    case TermKind::Add:
    case TermKind::Mul: {
        if (t.args.size() != 2) throw SortError("binary operator with wrong arity", "");
        Sort s = term_sort(*t.args[0]);
        same(s, *t.args[1], t.kind == TermKind::Add ? "+" : "*");
        if (t.kind == TermKind::Mul && s == Sort::ZZ)
            throw SortError("multiplication is not available in the ZZ sort", format(t));
        return s;
    }
    case TermKind::Neg:
        if (t.args.size() != 1) throw SortError("negation with wrong arity", "");
        return term_sort(*t.args[0]);
    case TermKind::Ord:
        if (t.args.size() != 1) throw SortError("ord with wrong arity", "");
        same(Sort::VF, *t.args[0], "ord");
        return Sort::ZZ;
    case TermKind::Ac:
        if (t.args.size() != 1) throw SortError("ac with wrong arity", "");
        same(Sort::VF, *t.args[0], "ac");
        return Sort::RF;
    }
    throw SortError("unknown term kind", "");
}

namespace {

struct FreeScan {
    std::vector<std::pair<std::string, Sort>> scope;
    std::vector<VarDecl> seen;

    void term(const Term& t)
    {
        if (t.kind == TermKind::Var) {
            for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
                if (it->first == t.name) {
                    if (it->second != t.sort)
                        throw SortError("variable '" + t.name + "' is bound with sort " +
                                            std::string(sort_name(it->second)) + " but used with sort " +
                                            std::string(sort_name(t.sort)),
                                        t.name);
                    return;
                }
            }
            for (const auto& d : seen) {
                if (d.name == t.name) {
                    if (d.sort != t.sort)
                        throw SortError("free variable '" + t.name + "' used with two sorts", t.name);
                    return;
                }
            }
            seen.push_back({t.name, t.sort});
            return;
        }
        for (const auto& a : t.args)
            term(*a);
    }

    void formula(const Formula& f)
    {
        for (const auto& t : f.terms)
            term(*t);
        if (f.kind == FormulaKind::Exists || f.kind == FormulaKind::Forall) {
            scope.emplace_back(f.var, f.var_sort);
            formula(*f.subs[0]);
            scope.pop_back();
            return;
        }
        for (const auto& s : f.subs)
            formula(*s);
    }
};

void check_formula(const Formula& f)
{
    auto need = [&](std::size_t nt, std::size_t ns) {
        if (f.terms.size() != nt || f.subs.size() != ns) throw SortError("formula node with wrong arity", "");
    };
    switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::False: need(0, 0); break;
    case FormulaKind::Eq: {
        need(2, 0);
        Sort a = term_sort(*f.terms[0]);
        Sort b = term_sort(*f.terms[1]);
        if (a != b)
            throw SortError("equality between sorts " + std::string(sort_name(a)) + " and " +
                                std::string(sort_name(b)),
                            format(f));
        break;
    }
    case FormulaKind::Le:
    case FormulaKind::Cong:
        need(2, 0);
        for (const auto& t : f.terms)
            if (term_sort(*t) != Sort::ZZ)
                throw SortError(f.kind == FormulaKind::Le ? "<= needs ZZ-sort operands"
                                                          : "congruence needs ZZ-sort operands",
                                format(f));
        if (f.kind == FormulaKind::Cong && f.modulus < 2)
            throw SortError("congruence modulus must be a literal >= 2", format(f));
        break;
    case FormulaKind::And:
    case FormulaKind::Or:
        need(0, 2);
        check_formula(*f.subs[0]);
        check_formula(*f.subs[1]);
        break;
    case FormulaKind::Not:
        need(0, 1);
        check_formula(*f.subs[0]);
        break;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
        need(0, 1);
        if (f.var.empty() || is_reserved(f.var)) throw SortError("invalid bound variable name", f.var);
        check_formula(*f.subs[0]);
        break;
    }
}

} // namespace

Signature typecheck(const Formula& f)
{
    check_formula(f);
    FreeScan scan;
    scan.formula(f);
    Signature sig;
    for (Sort s : {Sort::VF, Sort::RF, Sort::ZZ})
        for (const auto& d : scan.seen)
            if (d.sort == s) sig.vars.push_back(d);
    for (const auto& d : sig.vars) {
        if (d.sort == Sort::VF) ++sig.n;
        else if (d.sort == Sort::RF) ++sig.m;
        else ++sig.r;
    }
    return sig;
}

// ---------------------------------------------------------------------------
// printer

namespace {

// True when the printed term pins down its own sort (so bare literals next to
// it get the right sort back on reparse).
bool anchored(const Term& t)
{
    switch (t.kind) {
    case TermKind::Var:
    case TermKind::Ord:
    case TermKind::Ac: return true;
    case TermKind::Lit: return false;
    case TermKind::Const: return t.poly.size() > 1;
    default:
        return std::any_of(t.args.begin(), t.args.end(), [](const TermPtr& a) { return anchored(*a); });
    }
}

void print_term(std::ostream& os, const Term& t, std::optional<Sort> annotate)
{
    switch (t.kind) {
    case TermKind::Var: os << t.name; return;
    case TermKind::Lit:
        os << t.value;
        if (annotate) os << ':' << sort_name(*annotate);
        return;
    case TermKind::Const:
        if (t.poly.size() <= 1) {
            os << (t.poly.empty() ? 0 : t.poly[0]);
            if (annotate) os << ":VF";
        } else if (t.poly.size() == 2 && t.poly[0] == 0 && t.poly[1] == 1) {
            os << 't';
        } else {
            os << "poly(";
            for (std::size_t i = 0; i < t.poly.size(); ++i)
                os << (i ? "," : "") << t.poly[i];
            os << ')';
        }
        return;
    case TermKind::Add:
    case TermKind::Mul:
        os << '(';
        print_term(os, *t.args[0], annotate);
        os << (t.kind == TermKind::Add ? " + " : " * ");
        print_term(os, *t.args[1], annotate);
        os << ')';
        return;
    case TermKind::Neg: {
        const Term& c = *t.args[0];
        os << '-';
        bool wrap = c.kind == TermKind::Lit || (c.kind == TermKind::Const && c.poly.size() <= 1);
        if (wrap) os << '(';
        print_term(os, c, annotate);
        if (wrap) os << ')';
        return;
    }
    case TermKind::Ord:
    case TermKind::Ac:
        os << (t.kind == TermKind::Ord ? "ord(" : "ac(");
        print_term(os, *t.args[0], std::nullopt);
        os << ')';
        return;
    }
}

void print_formula(std::ostream& os, const Formula& f)
{
    switch (f.kind) {
    case FormulaKind::True: os << "true"; return;
    case FormulaKind::False: os << "false"; return;
    case FormulaKind::Eq: {
        std::optional<Sort> annotate;
        if (!anchored(*f.terms[0]) && !anchored(*f.terms[1])) {
            Sort s = term_sort(*f.terms[0]);
            if (s != Sort::ZZ) annotate = s;
        }
        print_term(os, *f.terms[0], annotate);
        os << " = ";
        print_term(os, *f.terms[1], annotate);
        return;
    }
    case FormulaKind::Le:
        print_term(os, *f.terms[0], std::nullopt);
        os << " <= ";
        print_term(os, *f.terms[1], std::nullopt);
        return;
    case FormulaKind::Cong:
        print_term(os, *f.terms[0], std::nullopt);
        os << " === ";
        print_term(os, *f.terms[1], std::nullopt);
        os << " mod " << f.modulus;
        return;
    case FormulaKind::And:
    case FormulaKind::Or:
        os << '(';
        print_formula(os, *f.subs[0]);
        os << (f.kind == FormulaKind::And ? " /\\ " : " \\/ ");
        print_formula(os, *f.subs[1]);
        os << ')';
        return;
    case FormulaKind::Not:
        os << "~(";
        print_formula(os, *f.subs[0]);
        os << ')';
        return;
    case FormulaKind::Exists:
    case FormulaKind::Forall:
        os << (f.kind == FormulaKind::Exists ? "exists " : "forall ") << f.var << ':' << sort_name(f.var_sort)
           << " (";
        print_formula(os, *f.subs[0]);
        os << ')';
        return;
    }
}

} // namespace

std::string format(const Formula& f)
{
    std::ostringstream os;
    print_formula(os, f);
    return os.str();
}

std::string format(const Term& t)
{
    std::ostringstream os;
    std::optional<Sort> annotate;
    if (!anchored(t) && t.kind != TermKind::Var) {
        if (t.kind == TermKind::Lit && t.sort != Sort::ZZ) annotate = t.sort;
        if (t.kind == TermKind::Const) annotate = Sort::VF;
    }
    print_term(os, t, annotate);
    return os.str();
}

// ---------------------------------------------------------------------------
// formula files

const FormulaPtr* FormulaFile::find(std::string_view name) const
{
    for (const auto& [n, f] : formulas)
        if (n == name) return &f;
    return nullptr;
}

SortEnv FormulaFile::env() const
{
    SortEnv e;
    for (const auto& d : vars)
        e[d.name] = d.sort;
    return e;
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

bool valid_identifier(std::string_view s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')) return false;
    return !is_reserved(s);
}

} // namespace

FormulaFile parse_formula_file(std::string_view text)
{
    FormulaFile file;
    std::size_t offset = 0;
    while (offset <= text.size()) {
        std::size_t nl = text.find('\n', offset);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(offset, nl - offset);
        std::size_t line_start = offset;
        offset = nl + 1;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::string_view body = trim(line);
        if (body.empty()) continue;
        std::size_t body_pos = line_start + static_cast<std::size_t>(body.data() - line.data());
        if (body.substr(0, 4) == "var " || body.substr(0, 4) == "var\t") {
            std::string_view rest = trim(body.substr(4));
            auto colon = rest.find(':');
            if (colon == std::string_view::npos) throw SyntaxError("expected 'var <name> : <sort>'", body_pos);
            std::string name(trim(rest.substr(0, colon)));
            auto sort = sort_from_name(trim(rest.substr(colon + 1)));
            if (!valid_identifier(name)) throw SyntaxError("invalid variable name '" + name + "'", body_pos);
            if (!sort) throw SyntaxError("unknown sort in declaration of '" + name + "'", body_pos);
            for (const auto& d : file.vars)
                if (d.name == name) throw SyntaxError("variable '" + name + "' declared twice", body_pos);
            file.vars.push_back({name, *sort});
        } else if (body.substr(0, 8) == "formula ") {
            std::string_view rest = body.substr(8);
            auto def = rest.find(":=");
            if (def == std::string_view::npos) throw SyntaxError("expected 'formula <name> := <text>'", body_pos);
            std::string name(trim(rest.substr(0, def)));
            if (!valid_identifier(name)) throw SyntaxError("invalid formula name '" + name + "'", body_pos);
            if (file.find(name)) throw SyntaxError("formula '" + name + "' defined twice", body_pos);
            std::string_view src = rest.substr(def + 2);
            std::size_t src_pos = body_pos + 8 + def + 2;
            try {
                file.formulas.emplace_back(name, parse_formula(src, file.env()));
            } catch (const SyntaxError& e) {
                throw SyntaxError("in formula '" + name + "': " + e.what(), src_pos + e.position());
            }
        } else {
            throw SyntaxError("expected 'var' or 'formula' line", body_pos);
        }
    }
    return file;
}

} // namespace wb
