#include "wb/zsums.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "wb/error.hpp"

namespace wb {

namespace {

mpq_class q_power(const mpz_class& q, std::int64_t e)
{
    mpz_class n;
    mpz_pow_ui(n.get_mpz_t(), q.get_mpz_t(), static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? mpq_class(mpz_class(1), n) : mpq_class(n);
}

mpq_class eval_laurent(const Laurent& f, const mpz_class& q)
{
    mpq_class s = 0;
    for (auto& [e, c] : f)
        s += c * q_power(q, e);
    return s;
}

void add_to(Laurent& f, std::int64_t e, const mpq_class& c)
{
    if (c == 0) return;
    auto& slot = f[e];
    slot += c;
    if (slot == 0) f.erase(e);
}

// Splits off the integer content: f = scale * primitive, primitive has a
// positive leading variable coefficient. A constant form returns no factor.
std::pair<mpz_class, std::optional<LinForm>> normalize_factor(LinForm f)
{
    std::int64_t g = 0;
    for (auto c : f.c)
        g = std::gcd(g, c);
    if (g == 0) return {mpz_class(static_cast<long>(f.c0)), std::nullopt};
    g = std::gcd(g, f.c0);
    auto lead = std::find_if(f.c.begin(), f.c.end(), [](std::int64_t c) { return c != 0; });
    if (*lead < 0) g = -g;
    for (auto& c : f.c)
        c /= g;
    f.c0 /= g;
    return {mpz_class(static_cast<long>(g)), f};
}

// ---------------------------------------------------------------------------
// Parsing

struct Token {
    enum Kind { Num, Ident, Sym, End } kind;
    std::string text;
    std::size_t pos;
};

std::vector<Token> tokenize(std::string_view s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char ch = s[i];
        if (std::isspace(static_cast<unsigned char>(ch))) {
            ++i;
        } else if (std::isdigit(static_cast<unsigned char>(ch))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
                ++j;
            out.push_back({Token::Num, std::string(s.substr(i, j - i)), i});
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
                ++j;
            out.push_back({Token::Ident, std::string(s.substr(i, j - i)), i});
            i = j;
        } else if (std::string_view("+-*/^(),").find(ch) != std::string_view::npos) {
            out.push_back({Token::Sym, std::string(1, ch), i});
            ++i;
        } else {
            throw SyntaxError(std::string("unexpected character '") + ch + "'", i);
        }
    }
    out.push_back({Token::End, "", s.size()});
    return out;
}

class ExprParser {
public:
    ExprParser(std::string_view text, std::size_t offset, std::vector<std::string>& vars, bool fixed_vars)
        : toks_(tokenize(text)), offset_(offset), vars_(vars), fixed_(fixed_vars)
    {
    }

    std::vector<TSTerm> sum()
    {
        std::vector<TSTerm> terms;
        int sign = 1;
        if (sym("-")) sign = -1;
        else sym("+");
        while (true) {
            TSTerm t = product();
            t.coef *= sign;
            terms.push_back(std::move(t));
            if (sym("+")) sign = 1;
            else if (sym("-")) sign = -1;
            else break;
        }
        if (peek().kind != Token::End) fail("unexpected '" + peek().text + "'");
        return terms;
    }

private:
    std::vector<Token> toks_;
    std::size_t i_ = 0;
    std::size_t offset_;
    std::vector<std::string>& vars_;
    bool fixed_;

    const Token& peek() const { return toks_[i_]; }
    [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, offset_ + peek().pos); }

    bool sym(const char* s)
    {
        if (peek().kind == Token::Sym && peek().text == s) {
            ++i_;
            return true;
        }
        return false;
    }

    std::int64_t number()
    {
        if (peek().kind != Token::Num) fail("expected a number");
        try {
            return std::stoll(toks_[i_++].text);
        } catch (const std::out_of_range&) {
            fail("number out of range");
        }
    }

    std::size_t var_index(const std::string& name)
    {
        auto it = std::find(vars_.begin(), vars_.end(), name);
        if (it != vars_.end()) return static_cast<std::size_t>(it - vars_.begin());
        if (fixed_) fail("undeclared variable '" + name + "'");
        vars_.push_back(name);
        return vars_.size() - 1;
    }

    LinForm var_form(const std::string& name, std::int64_t coef)
    {
        if (name == "q") fail("q may only appear as q^(...)");
        LinForm f;
        std::size_t k = var_index(name);
        f.c.assign(k + 1, 0);
        f.c[k] = coef;
        return f;
    }

    static void add_form(LinForm& a, const LinForm& b, std::int64_t sign)
    {
        if (a.c.size() < b.c.size()) a.c.resize(b.c.size(), 0);
        for (std::size_t i = 0; i < b.c.size(); ++i)
            a.c[i] += sign * b.c[i];
        a.c0 += sign * b.c0;
    }

    // [-] lterm (+|- lterm)*, lterm = INT [[*] VAR] | VAR
    LinForm linform()
    {
        LinForm f;
        std::int64_t sign = 1;
        if (sym("-")) sign = -1;
        else sym("+");
        while (true) {
            if (peek().kind == Token::Num) {
                std::int64_t n = number();
                bool star = sym("*");
                if (peek().kind == Token::Ident) add_form(f, var_form(toks_[i_++].text, n), sign);
                else if (star) fail("expected a variable");
                else f.c0 += sign * n;
            } else if (peek().kind == Token::Ident) {
                add_form(f, var_form(toks_[i_++].text, 1), sign);
            } else {
                fail("expected a linear term");
            }
            if (sym("+")) sign = 1;
            else if (sym("-")) sign = -1;
            else break;
        }
        return f;
    }

    LinForm exponent()
    {
        if (sym("(")) {
            LinForm f = linform();
            if (!sym(")")) fail("expected ')'");
            return f;
        }
        LinForm f;
        std::int64_t sign = sym("-") ? -1 : 1;
        if (peek().kind == Token::Num) {
            std::int64_t n = number();
            if (peek().kind == Token::Ident) add_form(f, var_form(toks_[i_++].text, n), sign);
            else f.c0 = sign * n;
        } else if (peek().kind == Token::Ident) {
            add_form(f, var_form(toks_[i_++].text, 1), sign);
        } else {
            fail("expected an exponent");
        }
        return f;
    }

    std::int64_t repeat()
    {
        if (!sym("^")) return 1;
        std::int64_t n = number();
        if (n < 0 || n > 64) fail("factor power must lie in [0, 64]");
        return n;
    }

    void push_factor(TSTerm& t, const LinForm& f, std::int64_t times)
    {
        for (std::int64_t k = 0; k < times; ++k) {
            if (f.is_constant()) t.coef *= mpq_class(static_cast<long>(f.c0));
            else t.factors.push_back(f);
        }
    }

    bool starts_factor() const
    {
        auto& t = peek();
        return t.kind == Token::Num || t.kind == Token::Ident || (t.kind == Token::Sym && t.text == "(");
    }

    void factor(TSTerm& t)
    {
        if (peek().kind == Token::Num) {
            std::int64_t n = number();
            if (sym("/")) {
                std::int64_t d = number();
                if (d == 0) fail("division by zero");
                t.coef *= mpq_class(static_cast<long>(n), static_cast<long>(d));
            } else {
                mpz_class v = static_cast<long>(n);
                std::int64_t k = repeat();
                mpz_class pw;
                mpz_pow_ui(pw.get_mpz_t(), v.get_mpz_t(), static_cast<unsigned long>(k));
                t.coef *= mpq_class(pw);
            }
            t.coef.canonicalize();
        } else if (peek().kind == Token::Ident && peek().text == "q") {
            ++i_;
            if (!sym("^")) fail("expected '^' after q");
            add_form(t.exponent, exponent(), 1);
        } else if (peek().kind == Token::Ident) {
            LinForm f = var_form(toks_[i_++].text, 1);
            push_factor(t, f, repeat());
        } else if (sym("(")) {
            LinForm f = linform();
            if (!sym(")")) fail("expected ')'");
            push_factor(t, f, repeat());
        } else {
            fail("expected a factor");
        }
    }

    TSTerm product()
    {
        TSTerm t;
        t.coef = 1;
        while (true) {
            factor(t);
            if (sym("*")) continue;
            if (starts_factor()) continue;
            break;
        }
        return t;
    }
};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// Position of the standalone word "on" outside parentheses.
std::size_t find_on(std::string_view s)
{
    int depth = 0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        else if (s[i] == ')') --depth;
        else if (depth == 0 && s.compare(i, 2, "on") == 0 &&
                 (i == 0 || std::isspace(static_cast<unsigned char>(s[i - 1]))) &&
                 (i + 2 == s.size() || !std::isalnum(static_cast<unsigned char>(s[i + 2]))))
            return i;
    }
    return std::string_view::npos;
}

// ---------------------------------------------------------------------------
// Bound analysis for r = 1

using Poly = std::vector<mpq_class>; // coefficients by degree

void poly_trim(Poly& p)
{
    while (!p.empty() && p.back() == 0)
        p.pop_back();
}

Poly poly_mul_linear(const Poly& p, std::int64_t a, std::int64_t b)
{
    Poly r(p.size() + 1);
    for (std::size_t i = 0; i < p.size(); ++i) {
        r[i] += p[i] * static_cast<long>(b);
        r[i + 1] += p[i] * static_cast<long>(a);
    }
    poly_trim(r);
    return r;
}

// One term of a one-variable sum.
struct Term1 {
    mpq_class coef;
    std::vector<std::pair<std::int64_t, std::int64_t>> factors; // a lambda + b
    std::int64_t slope = 0;
    std::int64_t shift = 0;

    mpq_class poly_at(std::int64_t l) const
    {
        mpq_class v = coef;
        for (auto [a, b] : factors)
            v *= mpz_class(static_cast<long>(a)) * static_cast<long>(l) + static_cast<long>(b);
        return v;
    }
    Poly expanded() const
    {
        Poly p{coef};
        for (auto [a, b] : factors)
            p = poly_mul_linear(p, a, b);
        poly_trim(p);
        return p;
    }
    int degree() const
    {
        int d = 0;
        for (auto [a, b] : factors)
            d += a != 0;
        return d;
    }
};

std::vector<Term1> one_variable_terms(const TermSum& h, int sign)
{
    std::vector<Term1> out;
    for (auto& t : h.terms) {
        Term1 u;
        u.coef = t.coef;
        for (auto& f : t.factors)
            u.factors.emplace_back(sign * (f.c.empty() ? 0 : f.c[0]), f.c0);
        u.slope = sign * (t.exponent.c.empty() ? 0 : t.exponent.c[0]);
        u.shift = t.exponent.c0;
        out.push_back(std::move(u));
    }
    return out;
}

std::string term_text(const Term1& t)
{
    std::vector<std::string> v{"|lambda|"};
    std::string s = t.coef.get_str();
    for (auto [a, b] : t.factors)
        s += "*(" + LinForm{{a}, b}.to_string(v) + ")";
    return s + "*q^(" + LinForm{{t.slope}, t.shift}.to_string(v) + ")";
}

// True when h is the zero function of (q, lambda): every exponent group
// expands to the zero polynomial.
bool vanishes(const TermSum& h)
{
    using Mono = std::vector<int>;
    std::map<LinForm, std::map<Mono, mpq_class>> groups;
    for (auto& t : h.terms) {
        std::map<Mono, mpq_class> p{{Mono(h.vars.size(), 0), t.coef}};
        for (auto& f : t.factors) {
            std::map<Mono, mpq_class> next;
            for (auto& [m, c] : p) {
                next[m] += c * static_cast<long>(f.c0);
                for (std::size_t i = 0; i < f.c.size(); ++i) {
                    if (f.c[i] == 0) continue;
                    Mono n = m;
                    ++n[i];
                    next[n] += c * static_cast<long>(f.c[i]);
                }
            }
            p = std::move(next);
        }
        auto& g = groups[t.exponent];
        for (auto& [m, c] : p)
            g[m] += c;
    }
    for (auto& [e, g] : groups)
        for (auto& [m, c] : g)
            if (c != 0) return false;
    return true;
}

std::string laurent_text(const Laurent& f)
{
    if (f.empty()) return "0";
    std::string s;
    for (auto it = f.rbegin(); it != f.rend(); ++it) {
        if (!s.empty()) s += " + ";
        s += it->second.get_str() + "*q^" + std::to_string(it->first);
    }
    return s;
}

struct Dominance {
    bool zero = true;
    std::int64_t slope = 0;
    int degree = 0;
    std::size_t dominant = 0;
};

// Largest slope whose terms do not cancel as functions of (q, lambda).
Dominance dominance(const std::vector<Term1>& terms)
{
    std::map<std::int64_t, std::map<std::int64_t, Poly>, std::greater<>> groups;
    for (auto& t : terms) {
        Poly p = t.expanded();
        Poly& g = groups[t.slope][t.shift];
        if (g.size() < p.size()) g.resize(p.size());
        for (std::size_t i = 0; i < p.size(); ++i)
            g[i] += p[i];
        poly_trim(g);
    }
    Dominance d;
    for (auto& [slope, by_shift] : groups) {
        int deg = -1;
        for (auto& [shift, p] : by_shift)
            deg = std::max(deg, static_cast<int>(p.size()) - 1);
        if (deg < 0) continue;
        d.zero = false;
        d.slope = slope;
        d.degree = deg;
        // Representative: highest degree, then largest coefficient sum.
        std::optional<std::size_t> best;
        for (std::size_t j = 0; j < terms.size(); ++j) {
            if (terms[j].slope != slope) continue;
            if (!best) {
                best = j;
                continue;
            }
            auto& b = terms[*best];
            if (terms[j].degree() > b.degree() ||
                (terms[j].degree() == b.degree() && terms[j].poly_at(1) > b.poly_at(1)))
                best = j;
        }
        d.dominant = *best;
        return d;
    }
    return d;
}

// Tail argument for lambda >= lambda0 in one direction (lambda already
// reflected for the downward direction). Empty on success, else the reason.
std::string tail_check(const std::vector<Term1>& terms, std::int64_t a, std::int64_t b, std::int64_t lambda0,
                       std::int64_t q0, std::vector<std::string>& lines)
{
    Laurent up{{a, 1}}, lo{{a, 1}};
    Laurent D;
    for (auto& t : terms) {
        if (t.slope > b) return "a term grows faster than q^(b lambda)";
        mpq_class v = t.poly_at(lambda0);
        if (t.slope == b) {
            add_to(D, t.shift, v);
            continue;
        }
        for (auto [fa, fb] : t.factors) {
            if (fa == 0) continue;
            // fa * l + fb must keep the sign of fa for l >= lambda0.
            __int128 at = static_cast<__int128>(fa) * lambda0 + fb;
            if (at == 0 || (at > 0) != (fa > 0)) return "lambda0 does not clear the roots of the factors";
        }
        mpq_class growth = 1;
        for (auto [fa, fb] : t.factors) {
            if (fa == 0) continue;
            mpz_class now = mpz_class(static_cast<long>(fa)) * static_cast<long>(lambda0) + static_cast<long>(fb);
            mpz_class next = now + static_cast<long>(fa);
            growth *= mpq_class(abs(next), abs(now));
        }
        growth.canonicalize();
        if (growth > q_power(mpz_class(static_cast<long>(q0)), b - t.slope))
            return "factor growth at lambda0 exceeds q0^(b - slope)";
        std::int64_t e = (t.slope - b) * lambda0 + t.shift;
        if (v > 0) add_to(up, e, -v);
        else add_to(lo, e, v);
    }
    for (auto& [e, c] : D) {
        add_to(up, e, -c);
        add_to(lo, e, c);
    }
    mpz_class q0z = static_cast<long>(q0);
    if (auto q = first_negative(up, q0z)) return "upper check fails at q = " + q->get_str();
    if (auto q = first_negative(lo, q0z)) return "lower check fails at q = " + q->get_str();
    lines.push_back("beyond lambda0 = " + std::to_string(lambda0) +
                    " every lower term is non-increasing in |lambda| (factor growth <= q0^(b - slope))");
    lines.push_back("dominant part D(q) = " + laurent_text(D));
    lines.push_back("q^a - D(q) - R+(q) >= 0 and q^a + D(q) + R-(q) >= 0 for all integers q >= " +
                    std::to_string(q0) + ", R+- the lower terms of each sign at lambda0");
    return "";
}

std::int64_t ceil_abs_root(std::int64_t a, std::int64_t b)
{
    if (a == 0) return 0;
    std::int64_t n = b < 0 ? -b : b, d = a < 0 ? -a : a;
    return (n + d - 1) / d;
}

} // namespace

// ---------------------------------------------------------------------------

mpz_class LinForm::eval(const std::vector<std::int64_t>& point) const
{
    mpz_class v = static_cast<long>(c0);
    for (std::size_t i = 0; i < c.size() && i < point.size(); ++i)
        v += mpz_class(static_cast<long>(c[i])) * static_cast<long>(point[i]);
    return v;
}

bool LinForm::is_constant() const
{
    return std::all_of(c.begin(), c.end(), [](std::int64_t x) { return x == 0; });
}

std::string LinForm::to_string(const std::vector<std::string>& vars) const
{
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == 0) continue;
        std::int64_t m = c[i] < 0 ? -c[i] : c[i];
        if (s.empty()) s = c[i] < 0 ? "-" : "";
        else s += c[i] < 0 ? " - " : " + ";
        if (m != 1) s += std::to_string(m) + "*";
        s += i < vars.size() ? vars[i] : "x" + std::to_string(i);
    }
    if (s.empty()) return std::to_string(c0);
    if (c0 != 0) s += (c0 < 0 ? " - " : " + ") + std::to_string(c0 < 0 ? -c0 : c0);
    return s;
}

std::string TermSum::to_string() const
{
    std::string s = "tsum " + (name.empty() ? std::string("h") : name) + "(";
    for (std::size_t i = 0; i < vars.size(); ++i)
        s += (i ? ", " : "") + vars[i];
    s += ") := ";
    if (terms.empty()) s += "0";
    for (std::size_t k = 0; k < terms.size(); ++k) {
        auto& t = terms[k];
        mpq_class c = t.coef;
        if (k > 0) {
            s += c < 0 ? " - " : " + ";
            c = abs(c);
        } else if (c < 0 && (t.factors.size() || !t.exponent.is_constant() || t.exponent.c0 != 0) && c == -1) {
            s += "-";
            c = 1;
        }
        std::vector<std::string> parts;
        bool bare = t.factors.empty() && t.exponent.is_constant() && t.exponent.c0 == 0;
        if (c != 1 || bare) parts.push_back(c.get_str());
        for (auto& f : t.factors)
            parts.push_back("(" + f.to_string(vars) + ")");
        if (!t.exponent.is_constant() || t.exponent.c0 != 0) parts.push_back("q^(" + t.exponent.to_string(vars) + ")");
        for (std::size_t i = 0; i < parts.size(); ++i)
            s += (i ? "*" : "") + parts[i];
    }
    if (!domain.is_universe_syntactically()) s += " on {" + domain.to_string() + "}";
    return s;
}

TermSum parse_termsum(std::string_view text)
{
    TermSum h;
    std::string_view s = trim(text);
    std::size_t offset = static_cast<std::size_t>(s.data() - text.data());
    bool fixed = false;
    if (s.substr(0, 5) == "tsum ") {
        std::size_t def = s.find(":=");
        if (def == std::string_view::npos) throw SyntaxError("expected ':='", offset);
        std::string_view head = trim(s.substr(5, def - 5));
        std::size_t paren = head.find('(');
        h.name = std::string(trim(head.substr(0, paren)));
        if (paren != std::string_view::npos) {
            if (head.back() != ')') throw SyntaxError("expected ')' after the variable list", offset);
            std::string_view list = head.substr(paren + 1, head.size() - paren - 2);
            std::size_t start = 0;
            while (start <= list.size()) {
                std::size_t comma = list.find(',', start);
                if (comma == std::string_view::npos) comma = list.size();
                auto v = trim(list.substr(start, comma - start));
                if (!v.empty()) {
                    if (v == "q") throw SyntaxError("q is reserved", offset);
                    h.vars.emplace_back(v);
                }
                start = comma + 1;
            }
            fixed = true;
        }
        offset += def + 2;
        s = s.substr(def + 2);
    }
    std::string_view expr = s, dom;
    std::size_t on = find_on(s);
    if (on != std::string_view::npos) {
        expr = s.substr(0, on);
        dom = trim(s.substr(on + 2));
        if (dom.size() < 2 || dom.front() != '{' || dom.back() != '}')
            throw SyntaxError("domain must be written {formula}", offset + on);
        dom = dom.substr(1, dom.size() - 2);
    }
    ExprParser p(expr, offset, h.vars, fixed);
    h.terms = p.sum();
    SortEnv env;
    for (auto& v : h.vars)
        env[v] = Sort::ZZ;
    if (!dom.empty()) {
        auto f = parse_formula(dom, env);
        for (auto& d : typecheck(*f).vars)
            if (std::find(h.vars.begin(), h.vars.end(), d.name) == h.vars.end())
                throw SyntaxError("domain variable '" + d.name + "' does not occur in the sum", offset + on);
        h.domain = presburger_qe(*f, h.vars);
    } else {
        h.domain.vars = h.vars;
        h.domain.disjuncts = {PresConj{}};
    }
    for (auto& t : h.terms) {
        for (auto& f : t.factors)
            f.c.resize(h.vars.size(), 0);
        t.exponent.c.resize(h.vars.size(), 0);
    }
    return tsum_merge(h);
}

mpq_class tsum_eval(const TermSum& h, const mpz_class& q, const std::vector<std::int64_t>& lambda)
{
    if (q < 2) throw DomainError("q must be at least 2");
    if (lambda.size() != h.vars.size())
        throw DomainError("expected " + std::to_string(h.vars.size()) + " coordinates");
    if (!h.domain.contains(lambda)) throw DomainError("point lies outside the domain");
    mpq_class s = 0;
    for (auto& t : h.terms) {
        mpq_class v = t.coef;
        for (auto& f : t.factors)
            v *= f.eval(lambda);
        mpz_class e = t.exponent.eval(lambda);
        if (!e.fits_slong_p()) throw ResourceError("exponent too large");
        s += v * q_power(q, e.get_si());
    }
    return s;
}

TermSum tsum_merge(const TermSum& h)
{
    std::map<std::pair<std::vector<LinForm>, LinForm>, mpq_class> acc;
    for (auto& t : h.terms) {
        mpq_class coef = t.coef;
        std::vector<LinForm> fs;
        for (auto& f : t.factors) {
            auto [scale, g] = normalize_factor(f);
            coef *= scale;
            if (g) fs.push_back(*g);
        }
        std::sort(fs.begin(), fs.end());
        LinForm e = t.exponent;
        e.c.resize(h.vars.size(), 0);
        for (auto& f : fs)
            f.c.resize(h.vars.size(), 0);
        acc[{fs, e}] += coef;
    }
    TermSum out;
    out.name = h.name;
    out.vars = h.vars;
    out.domain = h.domain;
    for (auto& [key, coef] : acc)
        if (coef != 0) out.terms.push_back({coef, key.first, key.second});
    // Largest exponent first, then by factors.
    std::stable_sort(out.terms.begin(), out.terms.end(),
                     [](const TSTerm& x, const TSTerm& y) { return y.exponent < x.exponent; });
    return out;
}

std::optional<mpz_class> first_negative(const Laurent& f, const mpz_class& q0)
{
    if (f.empty()) return std::nullopt;
    auto [en, an] = *f.rbegin();
    if (an < 0) {
        for (mpz_class q = q0; q < q0 + 4096; ++q)
            if (eval_laurent(f, q) < 0) return q;
        for (mpz_class q = q0 + 4096;; q *= 2)
            if (eval_laurent(f, q) < 0) return q;
    }
    mpq_class neg = 0;
    for (auto& [e, c] : f)
        if (c < 0) neg -= c;
    mpq_class ratio = neg / an;
    mpz_class top = ratio.get_num() / ratio.get_den() + 1;
    if (top < q0) return std::nullopt;
    // G(q) = f(q) / q^en on [l, u] is at least an + sum of positive terms at u
    // + negative terms at l.
    std::vector<std::pair<mpz_class, mpz_class>> stack{{q0, top}};
    while (!stack.empty()) {
        auto [l, u] = stack.back();
        stack.pop_back();
        if (u - l <= 16) {
            for (mpz_class q = l; q <= u; ++q)
                if (eval_laurent(f, q) < 0) return q;
            continue;
        }
        mpq_class lb = an;
        for (auto& [e, c] : f) {
            if (e == en) continue;
            lb += c * q_power(c > 0 ? u : l, e - en);
        }
        if (lb >= 0) continue;
        mpz_class mid = (l + u) / 2;
        stack.push_back({mid + 1, u});
        stack.push_back({l, mid});
    }
    return std::nullopt;
}

std::optional<LevelResult> laurent_level(const Laurent& f, const mpz_class& q0)
{
    if (f.empty()) return std::nullopt;
    std::int64_t e = f.rbegin()->first;
    auto violated = [&](std::int64_t k) -> std::optional<mpz_class> {
        Laurent up = f, lo = f;
        for (auto& [x, c] : up)
            c = -c;
        add_to(up, k, 1);
        add_to(lo, k, 1);
        if (auto q = first_negative(up, q0)) return q;
        return first_negative(lo, q0);
    };
    auto w = violated(e - 1);
    if (!w) throw std::logic_error("level below the leading exponent");
    for (std::int64_t k = e; k < e + 4096; ++k) {
        auto v = violated(k);
        if (!v) return LevelResult{k, *w};
        w = v;
    }
    throw ResourceError("level search exceeded 4096 steps");
}

std::int64_t dominance_threshold(const TSTerm& hi, const TSTerm& lo, std::int64_t q0)
{
    TermSum wrap;
    wrap.vars = {"l"};
    wrap.terms = {hi, lo};
    auto t = one_variable_terms(wrap, 1);
    const Term1& h = t[0];
    const Term1& l = t[1];
    std::int64_t d = h.slope - l.slope;
    if (d < 1) throw DomainError("the first term must have the larger exponent slope");
    std::int64_t start = 0;
    for (auto* term : {&h, &l})
        for (auto [a, b] : term->factors)
            start = std::max(start, ceil_abs_root(a, b) + 1);
    mpz_class q0z = static_cast<long>(q0);
    for (std::int64_t x = start; x < start + 100000; ++x) {
        mpq_class growth = 1;
        for (auto [a, b] : l.factors) {
            if (a == 0) continue;
            mpz_class now = mpz_class(static_cast<long>(a)) * static_cast<long>(x) + static_cast<long>(b);
            growth *= mpq_class(abs(now + static_cast<long>(a)), abs(now));
        }
        growth.canonicalize();
        if (growth > q_power(q0z, d)) continue;
        std::int64_t e = l.shift - h.shift - d * x;
        if (e > 0) continue;
        if (abs(l.poly_at(x)) * q_power(q0z, e) <= abs(h.poly_at(x))) return x;
    }
    throw ResourceError("no dominance threshold below the search cap");
}

std::optional<TsumBound> tsum_bound(const TermSum& input, const BoundOptions& opts)
{
    if (opts.q0 < 2) throw DomainError("q0 must be at least 2");
    TermSum h = tsum_merge(input);
    TsumBound out;
    out.q0 = opts.q0;
    mpz_class q0z = static_cast<long>(opts.q0);
    std::size_t r = h.vars.size();

    if (vanishes(h) || h.domain.is_empty_syntactically()) {
        out.certified = true;
        out.notes.push_back(vanishes(h) ? "the sum vanishes identically; every (a, b) holds"
                                            : "the domain is empty; every (a, b) holds");
        return out;
    }

    auto level_at = [&](const std::vector<std::int64_t>& pt) -> std::optional<LevelResult> {
        Laurent f;
        for (auto& t : h.terms) {
            mpq_class v = t.coef;
            for (auto& fac : t.factors)
                v *= fac.eval(pt);
            mpz_class e = t.exponent.eval(pt);
            add_to(f, e.get_si(), v);
        }
        return laurent_level(f, q0z);
    };

    if (r != 1) {
        std::int64_t slope_cap = 0, degree = 0;
        for (auto& t : h.terms) {
            std::int64_t s = 0;
            for (auto c : t.exponent.c)
                s += c < 0 ? -c : c;
            slope_cap = std::max(slope_cap, s);
            degree = std::max<std::int64_t>(degree, static_cast<std::int64_t>(t.factors.size()));
        }
        std::int64_t cap = slope_cap + degree;
        std::int64_t w2 = std::max<std::int64_t>(2, opts.window), w1 = w2 / 2;
        // level and norm per point, tagged with the smaller window.
        struct Point {
            std::int64_t level, norm;
            bool inner;
        };
        std::vector<Point> pts;
        std::vector<std::int64_t> pt(r, -w2);
        std::int64_t count = 1;
        for (std::size_t i = 0; i < r; ++i) {
            count *= 2 * w2 + 1;
            if (count > 200000) throw ResourceError("window holds too many points");
        }
        for (std::int64_t n = 0; n < count; ++n) {
            std::int64_t rest = n, norm = 0;
            bool inner = true;
            for (std::size_t i = 0; i < r; ++i) {
                pt[i] = rest % (2 * w2 + 1) - w2;
                rest /= 2 * w2 + 1;
                norm += pt[i] < 0 ? -pt[i] : pt[i];
                inner &= (pt[i] < 0 ? -pt[i] : pt[i]) <= w1;
            }
            if (!h.domain.contains(pt)) continue;
            if (auto lv = level_at(pt)) pts.push_back({lv->k, norm, inner});
        }
        if (pts.empty()) {
            out.notes.push_back("the sum vanishes on the window");
            return out;
        }
        for (std::int64_t b = 0; b <= cap; ++b) {
            std::optional<std::int64_t> a1, a2;
            for (auto& p : pts) {
                std::int64_t k = p.level - b * p.norm;
                a2 = a2 ? std::max(*a2, k) : k;
                if (p.inner) a1 = a1 ? std::max(*a1, k) : k;
            }
            if (a1 && a1 == a2) {
                out.a = *a2;
                out.b = b;
                out.threshold = w2;
                out.notes.push_back("window-verified on |lambda_i| <= " + std::to_string(w2) +
                                    "; a is stable between half-widths " + std::to_string(w1) + " and " +
                                    std::to_string(w2) + "; not certified");
                return out;
            }
        }
        return std::nullopt;
    }

    // r = 1.
    auto progs = normalize_1d(h.domain);
    bool has_up = false, has_down = false;
    std::int64_t reach = 0;
    for (auto& p : progs) {
        has_up |= p.kind == Progression1D::Up;
        has_down |= p.kind == Progression1D::Down;
        reach = std::max(reach, p.base < 0 ? -p.base : p.base);
    }
    struct Direction {
        std::string name;
        int sign;
        std::vector<Term1> terms;
        Dominance dom;
    };
    std::vector<Direction> dirs;
    if (has_up) dirs.push_back({"up", 1, one_variable_terms(h, 1), {}});
    if (has_down) dirs.push_back({"down", -1, one_variable_terms(h, -1), {}});
    std::int64_t b = 0;
    std::string why_b;
    for (auto& d : dirs) {
        d.dom = dominance(d.terms);
        if (d.dom.zero) continue;
        std::int64_t need = d.dom.slope + (d.dom.degree >= 1 ? 1 : 0);
        if (need > b) {
            b = need;
            why_b = "direction " + d.name + ": the terms of slope " + std::to_string(d.dom.slope) +
                    " do not cancel and have degree " + std::to_string(d.dom.degree) +
                    " in |lambda|, so |h| grows like |lambda|^" + std::to_string(d.dom.degree) + " q^(" +
                    std::to_string(d.dom.slope) + "|lambda|) along the progression and exceeds q^(a + " +
                    std::to_string(b - 1) + "|lambda|) for every a";
        }
    }
    out.b = b;
    out.argument_b = b > 0 ? why_b : "b = 0 is the smallest exponent considered";

    std::int64_t T = std::max<std::int64_t>(60, reach + 1);
    int maxdeg = 0;
    for (auto& t : one_variable_terms(h, 1)) {
        maxdeg = std::max(maxdeg, t.degree());
        for (auto [fa, fb] : t.factors)
            T = std::max(T, ceil_abs_root(fa, fb) + 1);
    }
    T = std::max<std::int64_t>(T, static_cast<std::int64_t>(std::ceil(1.45 * maxdeg)) + 1);

    std::map<std::int64_t, std::optional<LevelResult>> cache;
    while (true) {
        std::optional<std::int64_t> a;
        std::int64_t arg = 0;
        std::size_t checked = 0;
        for (std::int64_t l = -T; l <= T; ++l) {
            if (!progressions_contain(progs, l)) continue;
            ++checked;
            auto it = cache.find(l);
            if (it == cache.end()) it = cache.emplace(l, level_at({l})).first;
            if (!it->second) continue;
            std::int64_t k = it->second->k - b * (l < 0 ? -l : l);
            if (!a || k > *a) {
                a = k;
                arg = l;
            }
        }
        if (!a) {
            out.notes.push_back("the sum vanishes on the window");
            a = 0;
        }
        for (std::int64_t extra = 0; extra <= opts.a_cap; ++extra) {
            std::int64_t cand = *a + extra;
            std::vector<TailCertificate> certs;
            std::string failure;
            for (auto& d : dirs) {
                TailCertificate c;
                c.direction = d.name;
                c.slope = d.dom.slope;
                c.degree = d.dom.degree;
                c.b_needed = d.dom.zero ? 0 : std::max<std::int64_t>(0, d.dom.slope + (d.dom.degree >= 1 ? 1 : 0));
                c.dominant = d.dom.zero ? "none" : term_text(d.terms[d.dom.dominant]);
                for (auto& t : d.terms) {
                    if (d.dom.zero || t.slope >= d.dom.slope) continue;
                    TSTerm hi{d.terms[d.dom.dominant].coef, {}, {{d.dom.slope}, d.terms[d.dom.dominant].shift}};
                    for (auto [fa, fb] : d.terms[d.dom.dominant].factors)
                        hi.factors.push_back({{fa}, fb});
                    TSTerm lo{t.coef, {}, {{t.slope}, t.shift}};
                    for (auto [fa, fb] : t.factors)
                        lo.factors.push_back({{fa}, fb});
                    c.lines.push_back("dominates " + term_text(t) + " for |lambda| >= " +
                                      std::to_string(dominance_threshold(hi, lo, opts.q0)));
                }
                failure = tail_check(d.terms, cand, b, T + 1, opts.q0, c.lines);
                if (!failure.empty()) break;
                certs.push_back(std::move(c));
            }
            if (!failure.empty()) {
                if (T * 2 <= opts.t_cap) break;
                continue;
            }
            out.a = cand;
            out.certified = true;
            out.minimal = extra == 0;
            out.threshold = T;
            out.tails = std::move(certs);
            if (extra == 0 && cache[arg]) {
                out.witness_a1 = {cache[arg]->witness.get_si(), arg};
                if (!cache[arg]->witness.fits_slong_p()) out.witness_a1.clear();
            }
            out.notes.push_back("exact level checks at " + std::to_string(checked) + " domain points with |lambda| <= " +
                                std::to_string(T) + "; maximum at lambda = " + std::to_string(arg));
            if (extra > 0)
                out.notes.push_back("tail certificate needed a = window maximum + " + std::to_string(extra));
            return out;
        }
        if (T * 2 > opts.t_cap) throw ResourceError("bound search exceeded its caps");
        T *= 2;
    }
}

} // namespace wb
