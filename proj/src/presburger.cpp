#include "wb/presburger.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

namespace wb {

namespace {

constexpr std::size_t kMaxDisjuncts = 20000;

std::int64_t ck_mul(std::int64_t a, std::int64_t b)
{
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw ResourceError("integer overflow during quantifier elimination");
    return r;
}

std::int64_t ck_add(std::int64_t a, std::int64_t b)
{
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw ResourceError("integer overflow during quantifier elimination");
    return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t mod_floor(std::int64_t a, std::int64_t d)
{
    std::int64_t r = a % d;
    return r < 0 ? r + d : r;
}

std::int64_t lcm_ck(std::int64_t a, std::int64_t b)
{
    std::int64_t l = ck_mul(a / std::gcd(a, b), b);
    if (l > kMaxModulus) throw ResourceError("modulus exceeds the cap of 10^6 during elimination");
    return l;
}

bool all_zero(const std::vector<std::int64_t>& a)
{
    return std::all_of(a.begin(), a.end(), [](std::int64_t v) { return v == 0; });
}

std::int64_t content(const std::vector<std::int64_t>& a)
{
    std::int64_t g = 0;
    for (auto v : a)
        g = std::gcd(g, v < 0 ? -v : v);
    return g;
}

std::vector<std::int64_t> negated(const std::vector<std::int64_t>& a)
{
    std::vector<std::int64_t> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        r[i] = -a[i];
    return r;
}

std::int64_t inverse_mod(std::int64_t a, std::int64_t m)
{
    // extended Euclid; gcd(a, m) = 1
    std::int64_t g = m, x = 0, x1 = 1, r = mod_floor(a, m);
    while (r != 0) {
        std::int64_t q = g / r;
        std::tie(g, r) = std::make_pair(r, g - q * r);
        std::tie(x, x1) = std::make_pair(x1, x - q * x1);
    }
    return mod_floor(x, m);
}

// Normalizes one literal. Returns 1 if it is trivially true, 0 if trivially
// false, -1 if it must be kept.
int normalize(PresLiteral& l)
{
    switch (l.kind) {
    case PresLiteral::Ge: {
        if (all_zero(l.a)) return l.c >= 0 ? 1 : 0;
        std::int64_t g = content(l.a);
        if (g > 1) {
            for (auto& v : l.a)
                v /= g;
            l.c = floor_div(l.c, g);
        }
        return -1;
    }
    case PresLiteral::Eq: {
        if (all_zero(l.a)) return l.c == 0 ? 1 : 0;
        std::int64_t g = content(l.a);
        if (l.c % g != 0) return 0;
        for (auto& v : l.a)
            v /= g;
        l.c /= g;
        auto first = std::find_if(l.a.begin(), l.a.end(), [](std::int64_t v) { return v != 0; });
        if (*first < 0) {
            for (auto& v : l.a)
                v = -v;
            l.c = -l.c;
        }
        return -1;
    }
    case PresLiteral::Div:
    case PresLiteral::NDiv: {
        if (l.d > kMaxModulus) throw ResourceError("modulus exceeds the cap of 10^6 during elimination");
        for (auto& v : l.a)
            v = mod_floor(v, l.d);
        l.c = mod_floor(l.c, l.d);
        std::int64_t g = std::gcd(content(l.a), std::gcd(l.c, l.d));
        if (g > 1) {
            for (auto& v : l.a)
                v /= g;
            l.c /= g;
            l.d /= g;
        }
        if (l.d > 1 && !all_zero(l.a)) {
            // scale by a unit mod d so the first coefficient divides d
            auto first = std::find_if(l.a.begin(), l.a.end(), [](std::int64_t v) { return v != 0; });
            std::int64_t a1 = *first, h = std::gcd(a1, l.d), m = l.d / h;
            std::int64_t u = m == 1 ? 1 : inverse_mod(a1 / h, m);
            while (std::gcd(u, l.d) != 1)
                u += m;
            if (u != 1) {
                for (auto& v : l.a)
                    v = static_cast<std::int64_t>(static_cast<__int128>(v) * u % l.d);
                l.c = static_cast<std::int64_t>(static_cast<__int128>(l.c) * u % l.d);
            }
        }
        bool holds_always = l.d == 1;
        if (!holds_always && all_zero(l.a)) {
            bool divides = l.c % l.d == 0;
            return (divides == (l.kind == PresLiteral::Div)) ? 1 : 0;
        }
        if (holds_always) return l.kind == PresLiteral::Div ? 1 : 0;
        return -1;
    }
    }
    return -1;
}

std::optional<PresConj> simplify(PresConj conj)
{
    std::map<std::vector<std::int64_t>, std::int64_t> ge;
    std::map<std::vector<std::int64_t>, std::int64_t> eq;
    std::set<PresLiteral> divs;
    for (auto& l : conj) {
        int r = normalize(l);
        if (r == 1) continue;
        if (r == 0) return std::nullopt;
        if (l.kind == PresLiteral::Ge) {
            auto it = ge.find(l.a);
            if (it == ge.end()) ge.emplace(l.a, l.c);
            else it->second = std::min(it->second, l.c);
        } else if (l.kind == PresLiteral::Eq) {
            auto it = eq.find(l.a);
            if (it == eq.end()) eq.emplace(l.a, l.c);
            else if (it->second != l.c) return std::nullopt;
        } else {
            divs.insert(l);
        }
    }
    // Equalities decide inequalities over the same direction.
    for (const auto& [a, c] : eq) {
        if (auto it = ge.find(a); it != ge.end()) {
            if (it->second - c < 0) return std::nullopt;
            ge.erase(it);
        }
        if (auto it = ge.find(negated(a)); it != ge.end()) {
            if (ck_add(it->second, c) < 0) return std::nullopt;
            ge.erase(it);
        }
    }
    // Opposite inequalities: -c1 <= a.x <= c2.
    for (auto it = ge.begin(); it != ge.end();) {
        auto opp = ge.find(negated(it->first));
        if (opp == ge.end()) {
            ++it;
            continue;
        }
        std::int64_t sum = ck_add(it->second, opp->second);
        if (sum < 0) return std::nullopt;
        if (sum == 0) {
            PresLiteral e{PresLiteral::Eq, it->first, it->second, 0};
            normalize(e);
            auto ex = eq.find(e.a);
            if (ex != eq.end() && ex->second != e.c) return std::nullopt;
            eq.emplace(e.a, e.c);
            ge.erase(opp);
            it = ge.erase(it);
            continue;
        }
        ++it;
    }
    // Divisibility consistency.
    std::map<std::pair<std::vector<std::int64_t>, std::int64_t>, std::int64_t> residue;
    for (const auto& l : divs) {
        if (l.kind == PresLiteral::NDiv) {
            PresLiteral pos = l;
            pos.kind = PresLiteral::Div;
            if (divs.count(pos)) return std::nullopt;
            continue;
        }
        auto [it, fresh] = residue.emplace(std::make_pair(l.a, l.d), l.c);
        if (!fresh && it->second != l.c) return std::nullopt;
    }
    PresConj out;
    for (const auto& [a, c] : ge)
        out.push_back({PresLiteral::Ge, a, c, 0});
    for (const auto& [a, c] : eq)
        out.push_back({PresLiteral::Eq, a, c, 0});
    for (const auto& l : divs)
        out.push_back(l);
    std::sort(out.begin(), out.end());
    return out;
}

using DNF = std::vector<PresConj>;

DNF tidy(DNF d)
{
    DNF out;
    for (auto& c : d) {
        auto s = simplify(std::move(c));
        if (!s) continue;
        if (s->empty()) return DNF{PresConj{}};
        out.push_back(std::move(*s));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (out.size() <= 2000) {
        // Drop disjuncts implied by a smaller one (literal subset).
        std::vector<bool> dead(out.size(), false);
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (dead[i]) continue;
            for (std::size_t j = 0; j < out.size(); ++j) {
                if (i == j || dead[j] || out[i].size() > out[j].size()) continue;
                if (out[i].size() == out[j].size() && i > j) continue;
                if (std::includes(out[j].begin(), out[j].end(), out[i].begin(), out[i].end())) dead[j] = true;
            }
        }
        DNF kept;
        for (std::size_t i = 0; i < out.size(); ++i)
            if (!dead[i]) kept.push_back(std::move(out[i]));
        out = std::move(kept);
    }
    if (out.size() > kMaxDisjuncts) throw ResourceError("normal form exceeds the disjunct cap during elimination");
    return out;
}

DNF dnf_and(const DNF& x, const DNF& y)
{
    if (x.size() * y.size() > kMaxDisjuncts * 4)
        throw ResourceError("normal form exceeds the disjunct cap during elimination");
    DNF out;
    out.reserve(x.size() * y.size());
    for (const auto& a : x)
        for (const auto& b : y) {
            PresConj c = a;
            c.insert(c.end(), b.begin(), b.end());
            out.push_back(std::move(c));
        }
    return tidy(std::move(out));
}

DNF dnf_or(DNF x, const DNF& y)
{
    x.insert(x.end(), y.begin(), y.end());
    return tidy(std::move(x));
}

DNF negate_literal(const PresLiteral& l)
{
    switch (l.kind) {
    case PresLiteral::Ge: {
        // not (e >= 0)  <=>  -e - 1 >= 0
        PresLiteral n{PresLiteral::Ge, negated(l.a), ck_add(-l.c, -1), 0};
        return {{n}};
    }
    case PresLiteral::Eq: {
        PresLiteral lo{PresLiteral::Ge, l.a, ck_add(l.c, -1), 0};
        PresLiteral hi{PresLiteral::Ge, negated(l.a), ck_add(-l.c, -1), 0};
        return {{lo}, {hi}};
    }
    case PresLiteral::Div: {
        PresLiteral n = l;
        n.kind = PresLiteral::NDiv;
        return {{n}};
    }
    case PresLiteral::NDiv: {
        PresLiteral n = l;
        n.kind = PresLiteral::Div;
        return {{n}};
    }
    }
    return {};
}

DNF dnf_not(const DNF& x)
{
    DNF acc{PresConj{}};
    for (const auto& conj : x) {
        DNF alt;
        for (const auto& l : conj) {
            DNF n = negate_literal(l);
            alt.insert(alt.end(), n.begin(), n.end());
        }
        acc = dnf_and(acc, tidy(std::move(alt)));
        if (acc.empty()) break;
    }
    return acc;
}

// Replaces x_k (with coefficient s = +-1 in l) by the linear expression t.x + tc.
PresLiteral substitute(const PresLiteral& l, std::size_t k, const std::vector<std::int64_t>& t, std::int64_t tc)
{
    PresLiteral r = l;
    std::int64_t s = l.a[k];
    r.a[k] = 0;
    for (std::size_t i = 0; i < r.a.size(); ++i)
        r.a[i] = ck_add(r.a[i], ck_mul(s, t[i]));
    r.c = ck_add(r.c, ck_mul(s, tc));
    return r;
}

DNF eliminate(const PresConj& conj, std::size_t k)
{
    PresConj rest, with;
    for (const auto& l : conj)
        (l.a[k] == 0 ? rest : with).push_back(l);
    if (with.empty()) return {conj};

    // An equality pins the variable down: multiply everything through.
    const PresLiteral* pivot = nullptr;
    for (const auto& l : with)
        if (l.kind == PresLiteral::Eq &&
            (!pivot || std::abs(l.a[k]) < std::abs(pivot->a[k])))
            pivot = &l;
    if (pivot) {
        std::int64_t a = pivot->a[k];
        std::vector<std::int64_t> e = pivot->a;
        std::int64_t ce = pivot->c;
        if (a < 0) {
            a = -a;
            e = negated(e);
            ce = -ce;
        }
        e[k] = 0;
        PresConj out = rest;
        bool skipped = false;
        for (const auto& l : with) {
            if (!skipped && &l == pivot) {
                skipped = true;
                continue;
            }
            std::int64_t b = l.a[k];
            PresLiteral r = l;
            for (std::size_t i = 0; i < r.a.size(); ++i)
                r.a[i] = ck_add(ck_mul(a, l.a[i]), -ck_mul(b, e[i]));
            r.a[k] = 0;
            r.c = ck_add(ck_mul(a, l.c), -ck_mul(b, ce));
            if (r.kind == PresLiteral::Div || r.kind == PresLiteral::NDiv) {
                r.d = ck_mul(a, l.d);
                if (r.d > kMaxModulus) throw ResourceError("modulus exceeds the cap of 10^6 during elimination");
            }
            out.push_back(std::move(r));
        }
        if (a > 1) {
            if (a > kMaxModulus) throw ResourceError("modulus exceeds the cap of 10^6 during elimination");
            out.push_back({PresLiteral::Div, e, ce, a});
        }
        return tidy({out});
    }

    // Cooper: scale the variable's coefficients to +-1.
    std::int64_t L = 1;
    for (const auto& l : with)
        L = lcm_ck(L, std::abs(l.a[k]));
    std::vector<PresLiteral> scaled;
    for (const auto& l : with) {
        std::int64_t m = L / std::abs(l.a[k]);
        PresLiteral r = l;
        for (auto& v : r.a)
            v = ck_mul(v, m);
        r.c = ck_mul(r.c, m);
        if (r.kind == PresLiteral::Div || r.kind == PresLiteral::NDiv) {
            r.d = ck_mul(r.d, m);
            if (r.d > kMaxModulus) throw ResourceError("modulus exceeds the cap of 10^6 during elimination");
        }
        r.a[k] = r.a[k] > 0 ? 1 : -1;
        scaled.push_back(std::move(r));
    }
    if (L > 1) {
        std::vector<std::int64_t> unit(conj.front().a.size(), 0);
        unit[k] = 1;
        scaled.push_back({PresLiteral::Div, unit, 0, L});
    }
    std::int64_t delta = 1;
    std::vector<const PresLiteral*> lowers, uppers;
    for (const auto& l : scaled) {
        if (l.kind == PresLiteral::Ge) (l.a[k] > 0 ? lowers : uppers).push_back(&l);
        else delta = lcm_ck(delta, l.d);
    }
    std::size_t dim = conj.front().a.size();
    DNF out;
    auto emit = [&](const std::vector<std::int64_t>& t, std::int64_t tc, bool divs_only) {
        PresConj c = rest;
        for (const auto& l : scaled) {
            if (divs_only && l.kind == PresLiteral::Ge) continue;
            c.push_back(substitute(l, k, t, tc));
        }
        out.push_back(std::move(c));
        if (out.size() > kMaxDisjuncts * 4)
            throw ResourceError("normal form exceeds the disjunct cap during elimination");
    };
    std::vector<std::int64_t> zero(dim, 0);
    if (lowers.empty() || uppers.empty()) {
        for (std::int64_t j = 0; j < delta; ++j)
            emit(zero, j, true);
    } else if (lowers.size() <= uppers.size()) {
        // x + f >= 0: try x = -f + j
        for (const auto* b : lowers) {
            std::vector<std::int64_t> t = negated(b->a);
            t[k] = 0;
            for (std::int64_t j = 0; j < delta; ++j)
                emit(t, ck_add(-b->c, j), false);
        }
    } else {
        // -x + f >= 0: try x = f - j
        for (const auto* u : uppers) {
            std::vector<std::int64_t> t = u->a;
            t[k] = 0;
            for (std::int64_t j = 0; j < delta; ++j)
                emit(t, ck_add(u->c, -j), false);
        }
    }
    return tidy(std::move(out));
}

struct Eliminator {
    std::size_t dim = 0;
    std::vector<std::pair<std::string, std::size_t>> scope;
    std::map<std::string, std::size_t> free_index;
    std::size_t next_bound = 0;

    std::size_t index_of(const std::string& name)
    {
        for (auto it = scope.rbegin(); it != scope.rend(); ++it)
            if (it->first == name) return it->second;
        auto f = free_index.find(name);
        if (f == free_index.end()) throw DomainError("variable '" + name + "' is not in the coordinate list");
        return f->second;
    }

    void linear(const Term& t, std::int64_t sign, std::vector<std::int64_t>& a, std::int64_t& c)
    {
        switch (t.kind) {
        case TermKind::Var:
            if (t.sort != Sort::ZZ) throw DomainError("Presburger elimination got a non-ZZ variable '" + t.name + "'");
            {
                std::size_t i = index_of(t.name);
                a[i] = ck_add(a[i], sign);
            }
            return;
        case TermKind::Lit:
            if (t.sort != Sort::ZZ) throw DomainError("Presburger elimination got a non-ZZ literal");
            c = ck_add(c, ck_mul(sign, t.value));
            return;
        case TermKind::Add:
            linear(*t.args[0], sign, a, c);
            linear(*t.args[1], sign, a, c);
            return;
        case TermKind::Neg: linear(*t.args[0], -sign, a, c); return;
        default: throw DomainError("Presburger elimination got a non-ZZ term: " + format(t));
        }
    }

    PresLiteral difference(PresLiteral::Kind kind, const Term& lhs, const Term& rhs, std::int64_t d)
    {
        PresLiteral l{kind, std::vector<std::int64_t>(dim, 0), 0, d};
        linear(lhs, 1, l.a, l.c);
        linear(rhs, -1, l.a, l.c);
        return l;
    }

    DNF run(const Formula& f)
    {
        switch (f.kind) {
        case FormulaKind::True: return {PresConj{}};
        case FormulaKind::False: return {};
        case FormulaKind::Eq:
            if (term_sort(*f.terms[0]) != Sort::ZZ) throw DomainError("Presburger elimination got a non-ZZ equation");
            return tidy({{difference(PresLiteral::Eq, *f.terms[0], *f.terms[1], 0)}});
        case FormulaKind::Le:
            // rhs - lhs >= 0
            return tidy({{difference(PresLiteral::Ge, *f.terms[1], *f.terms[0], 0)}});
        case FormulaKind::Cong:
            return tidy({{difference(PresLiteral::Div, *f.terms[0], *f.terms[1], f.modulus)}});
        case FormulaKind::And: return dnf_and(run(*f.subs[0]), run(*f.subs[1]));
        case FormulaKind::Or: return dnf_or(run(*f.subs[0]), run(*f.subs[1]));
        case FormulaKind::Not: return dnf_not(run(*f.subs[0]));
        case FormulaKind::Exists:
        case FormulaKind::Forall: {
            if (f.var_sort != Sort::ZZ) throw DomainError("Presburger elimination got a non-ZZ quantifier");
            std::size_t k = next_bound++;
            scope.emplace_back(f.var, k);
            DNF body = run(*f.subs[0]);
            scope.pop_back();
            bool universal = f.kind == FormulaKind::Forall;
            if (universal) body = dnf_not(body);
            DNF out;
            for (const auto& conj : body) {
                DNF e = eliminate(conj, k);
                out.insert(out.end(), e.begin(), e.end());
                if (out.size() > kMaxDisjuncts * 4)
                    throw ResourceError("normal form exceeds the disjunct cap during elimination");
            }
            out = tidy(std::move(out));
            return universal ? dnf_not(out) : out;
        }
        }
        return {};
    }
};

std::size_t count_quantifiers(const Formula& f)
{
    std::size_t n = (f.kind == FormulaKind::Exists || f.kind == FormulaKind::Forall) ? 1 : 0;
    for (const auto& s : f.subs)
        n += count_quantifiers(*s);
    return n;
}

std::string linear_text(const std::vector<std::int64_t>& a, std::int64_t c, const std::vector<std::string>& vars,
                        bool with_constant)
{
    std::ostringstream os;
    bool first = true;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (a[i] == 0) continue;
        if (!first) os << " + ";
        first = false;
        if (a[i] == 1) os << vars[i];
        else if (a[i] == -1) os << '-' << vars[i];
        else os << a[i] << '*' << vars[i];
    }
    if (with_constant && (c != 0 || first)) {
        if (!first) os << " + ";
        os << c;
    } else if (first) {
        os << 0;
    }
    return os.str();
}

std::string literal_text(const PresLiteral& l, const std::vector<std::string>& vars)
{
    switch (l.kind) {
    case PresLiteral::Ge: return "0 <= " + linear_text(l.a, l.c, vars, true);
    case PresLiteral::Eq: return linear_text(l.a, l.c, vars, true) + " = 0";
    case PresLiteral::Div:
    case PresLiteral::NDiv: {
        std::string s = linear_text(l.a, 0, vars, false) + " === " + std::to_string(mod_floor(-l.c, l.d)) +
                        " mod " + std::to_string(l.d);
        return l.kind == PresLiteral::Div ? s : "~(" + s + ")";
    }
    }
    return "";
}

bool literal_holds(const PresLiteral& l, const std::vector<std::int64_t>& x)
{
    __int128 v = l.c;
    for (std::size_t i = 0; i < l.a.size(); ++i)
        v += static_cast<__int128>(l.a[i]) * x[i];
    switch (l.kind) {
    case PresLiteral::Ge: return v >= 0;
    case PresLiteral::Eq: return v == 0;
    case PresLiteral::Div: return v % l.d == 0;
    case PresLiteral::NDiv: return v % l.d != 0;
    }
    return false;
}

} // namespace

bool PresburgerSet::contains(const std::vector<std::int64_t>& point) const
{
    if (point.size() != vars.size()) throw DomainError("point dimension does not match the set");
    for (const auto& conj : disjuncts) {
        bool ok = true;
        for (const auto& l : conj)
            if (!literal_holds(l, point)) {
                ok = false;
                break;
            }
        if (ok) return true;
    }
    return false;
}

std::string PresburgerSet::to_string() const
{
    if (disjuncts.empty()) return "false";
    std::ostringstream os;
    for (std::size_t i = 0; i < disjuncts.size(); ++i) {
        if (i) os << " \\/ ";
        const auto& conj = disjuncts[i];
        if (conj.empty()) {
            os << "true";
            continue;
        }
        bool paren = conj.size() > 1 && disjuncts.size() > 1;
        if (paren) os << '(';
        for (std::size_t j = 0; j < conj.size(); ++j) {
            if (j) os << " /\\ ";
            os << literal_text(conj[j], vars);
        }
        if (paren) os << ')';
    }
    return os.str();
}

FormulaPtr PresburgerSet::to_formula() const
{
    SortEnv env;
    for (const auto& v : vars)
        env[v] = Sort::ZZ;
    return parse_formula(to_string(), env);
}

PresburgerSet presburger_qe(const Formula& f, const std::vector<std::string>& vars)
{
    Eliminator e;
    e.dim = vars.size() + count_quantifiers(f);
    for (std::size_t i = 0; i < vars.size(); ++i)
        e.free_index[vars[i]] = i;
    e.next_bound = vars.size();
    DNF d = e.run(f);
    PresburgerSet s;
    s.vars = vars;
    for (auto& conj : d) {
        PresConj c;
        for (auto& l : conj) {
            PresLiteral r = l;
            r.a.resize(vars.size());
            c.push_back(std::move(r));
        }
        s.disjuncts.push_back(std::move(c));
    }
    // Two-valued residue tests are clearer as positive congruences.
    for (auto& conj : s.disjuncts)
        for (auto& l : conj)
            if (l.kind == PresLiteral::NDiv && l.d == 2) {
                l.kind = PresLiteral::Div;
                l.c = ck_add(l.c, 1);
            }
    s.disjuncts = tidy(std::move(s.disjuncts));
    return s;
}

PresburgerSet presburger_qe(const Formula& f)
{
    Signature sig = typecheck(f);
    std::vector<std::string> vars;
    for (const auto& d : sig.vars) {
        if (d.sort != Sort::ZZ) throw DomainError("Presburger elimination got a non-ZZ free variable '" + d.name + "'");
        vars.push_back(d.name);
    }
    return presburger_qe(f, vars);
}

bool pres_eval(const PresburgerSet& s, const std::vector<std::int64_t>& point) { return s.contains(point); }

bool pres_eval(const Formula& f, const std::map<std::string, std::int64_t>& assignment)
{
    std::vector<std::string> vars;
    std::vector<std::int64_t> point;
    for (const auto& [k, v] : assignment) {
        vars.push_back(k);
        point.push_back(v);
    }
    return presburger_qe(f, vars).contains(point);
}

// ---------------------------------------------------------------------------
// one-dimensional normal form

bool Progression1D::contains(std::int64_t x) const
{
    switch (kind) {
    case Point: return x == base;
    case Up: return x >= base && (x - base) % step == 0;
    case Down: return x <= base && (base - x) % step == 0;
    }
    return false;
}

std::string Progression1D::to_string() const
{
    switch (kind) {
    case Point: return "{" + std::to_string(base) + "}";
    case Up: return std::to_string(base) + " + " + std::to_string(step) + "N";
    case Down: return std::to_string(base) + " - " + std::to_string(step) + "N";
    }
    return "";
}

bool progressions_contain(const std::vector<Progression1D>& ps, std::int64_t x)
{
    return std::any_of(ps.begin(), ps.end(), [&](const Progression1D& p) { return p.contains(x); });
}

std::vector<Progression1D> normalize_1d(const PresburgerSet& s)
{
    if (s.dim() != 1) throw DomainError("normalize_1d needs a set in one variable");
    std::int64_t L = 1, T = 0;
    for (const auto& conj : s.disjuncts)
        for (const auto& l : conj) {
            if (l.kind == PresLiteral::Div || l.kind == PresLiteral::NDiv) L = lcm_ck(L, l.d);
            else T = std::max(T, std::abs(l.c) + 1);
        }
    if (T > 10000000) throw ResourceError("normalize_1d: thresholds too large");
    auto member = [&](std::int64_t x) { return s.contains({x}); };

    // Minimal period of a tail pattern, checked inside the tail.
    auto tail_period = [&](std::int64_t start, std::int64_t dir) {
        for (std::int64_t p = 1; p <= L; ++p) {
            if (L % p != 0) continue;
            bool ok = true;
            for (std::int64_t x = start; x < start + L && ok; ++x)
                ok = member(x) == member(x + dir * p);
            if (ok) return p;
        }
        return L;
    };
    const std::int64_t lo_edge = -T - L; // below: periodic down tail
    const std::int64_t hi_edge = T + L;
    std::vector<Progression1D> ups, downs, points;

    std::int64_t pu = tail_period(T, 1);
    std::vector<std::int64_t> bi_classes; // residues mod pu covered in both directions
    for (std::int64_t x0 = T; x0 < T + pu; ++x0) {
        if (!member(x0)) continue;
        std::int64_t x = x0;
        bool infinite_down = false;
        while (member(x - pu)) {
            x -= pu;
            if (x < lo_edge) {
                infinite_down = true;
                break;
            }
        }
        if (infinite_down) {
            bi_classes.push_back(mod_floor(x0, pu));
            std::int64_t r = mod_floor(x0, pu);
            ups.push_back({Progression1D::Up, r, pu});
            downs.push_back({Progression1D::Down, r - pu, pu});
        } else {
            ups.push_back({Progression1D::Up, x, pu});
        }
    }

    std::int64_t pd = tail_period(-T - L, -1);
    auto covered_by_bi = [&](std::int64_t x) {
        for (auto r : bi_classes)
            if (mod_floor(x - r, pu) == 0) return true;
        return false;
    };
    for (std::int64_t x0 = -T - pd; x0 < -T; ++x0) {
        if (!member(x0)) continue;
        // skip classes already represented by a two-sided progression
        bool all_covered = true;
        std::int64_t span = pd / std::gcd(pd, pu) * pu;
        for (std::int64_t k = 0; k < span / pd && all_covered; ++k)
            all_covered = covered_by_bi(x0 - k * pd);
        if (all_covered) continue;
        std::int64_t x = x0;
        while (member(x + pd) && x + pd <= hi_edge)
            x += pd;
        downs.push_back({Progression1D::Down, x, pd});
    }

    std::vector<Progression1D> all = ups;
    all.insert(all.end(), downs.begin(), downs.end());
    for (std::int64_t x = lo_edge - pd; x <= hi_edge + pu; ++x)
        if (member(x) && !progressions_contain(all, x)) points.push_back({Progression1D::Point, x, 0});

    auto by_step_base = [](const Progression1D& a, const Progression1D& b) {
        return a.step != b.step ? a.step < b.step : a.base < b.base;
    };
    std::sort(ups.begin(), ups.end(), by_step_base);
    std::sort(downs.begin(), downs.end(), by_step_base);
    std::vector<Progression1D> out = ups;
    out.insert(out.end(), downs.begin(), downs.end());
    out.insert(out.end(), points.begin(), points.end());
    return out;
}

} // namespace wb
