#include "wb/eval.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "wb/presburger.hpp"

namespace wb {

std::string_view truth_name(Truth t)
{
    switch (t) {
    case Truth::True: return "True";
    case Truth::False: return "False";
    case Truth::Unknown: break;
    }
    return "Unknown";
}

Truth truth_and(Truth a, Truth b)
{
    if (a == Truth::False || b == Truth::False) return Truth::False;
    if (a == Truth::True && b == Truth::True) return Truth::True;
    return Truth::Unknown;
}

Truth truth_or(Truth a, Truth b)
{
    if (a == Truth::True || b == Truth::True) return Truth::True;
    if (a == Truth::False && b == Truth::False) return Truth::False;
    return Truth::Unknown;
}

Truth truth_not(Truth a)
{
    if (a == Truth::True) return Truth::False;
    if (a == Truth::False) return Truth::True;
    return Truth::Unknown;
}

std::string SearchBox::to_string() const
{
    std::ostringstream os;
    os << "vmin=" << vmin << ",vmax=" << vmax << ",depth=" << depth << ",zmin=" << zmin << ",zmax=" << zmax;
    return os.str();
}

void validate(const FieldDesc& fd, const SearchBox& box)
{
    if (box.vmin > box.vmax) throw DomainError("search box has vmin > vmax");
    if (box.zmin > box.zmax) throw DomainError("search box has zmin > zmax");
    if (box.depth < 1 || box.depth > fd.N)
        throw DomainError("search box depth must lie in [1, " + std::to_string(fd.N) + "]");
}

namespace {

std::int64_t parse_int(std::string_view s, std::string_view what)
{
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw SyntaxError("expected an integer for " + std::string(what) + ", got '" + std::string(s) + "'", 0);
    return v;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// Splits at commas outside parentheses and braces.
std::vector<std::pair<std::string_view, std::size_t>> split_top(std::string_view s)
{
    std::vector<std::pair<std::string_view, std::size_t>> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || (s[i] == ',' && depth == 0)) {
            auto piece = trim(s.substr(start, i - start));
            if (!piece.empty()) out.emplace_back(piece, start);
            start = i + 1;
        } else if (s[i] == '(' || s[i] == '{') {
            ++depth;
        } else if (s[i] == ')' || s[i] == '}') {
            --depth;
        }
    }
    return out;
}

} // namespace

SearchBox parse_box_spec(std::string_view text)
{
    SearchBox box;
    for (auto [item, pos] : split_top(text)) {
        auto eqpos = item.find('=');
        if (eqpos == std::string_view::npos) throw SyntaxError("box entry needs key=value", pos);
        auto key = trim(item.substr(0, eqpos));
        auto val = parse_int(trim(item.substr(eqpos + 1)), key);
        if (key == "vmin") box.vmin = val;
        else if (key == "vmax") box.vmax = val;
        else if (key == "depth" || key == "d") box.depth = static_cast<int>(val);
        else if (key == "zmin") box.zmin = val;
        else if (key == "zmax") box.zmax = val;
        else throw SyntaxError("unknown box key '" + std::string(key) + "'", pos);
    }
    return box;
}

Sort value_sort(const Value& v)
{
    if (std::holds_alternative<VFElem>(v)) return Sort::VF;
    if (std::holds_alternative<RFElem>(v)) return Sort::RF;
    return Sort::ZZ;
}

std::string format_value(const FieldDesc& fd, const Value& v)
{
    if (auto* x = std::get_if<VFElem>(&v)) return format_vf(fd, *x);
    if (auto* u = std::get_if<RFElem>(&v)) return std::to_string(u->value);
    return std::to_string(std::get<std::int64_t>(v));
}

Assignment parse_assignment(std::string_view text, const FieldDesc& fd, const SortEnv& env)
{
    Assignment a;
    for (auto [item, pos] : split_top(text)) {
        auto eqpos = item.find('=');
        if (eqpos == std::string_view::npos) throw SyntaxError("assignment entry needs name=value", pos);
        std::string name(trim(item.substr(0, eqpos)));
        auto val = trim(item.substr(eqpos + 1));
        auto it = env.find(name);
        if (it == env.end()) throw SyntaxError("assignment to unknown variable '" + name + "'", pos);
        switch (it->second) {
        case Sort::VF: {
            bool integral = !val.empty() && (std::isdigit(static_cast<unsigned char>(val[0])) || val[0] == '-') &&
                            val.find_first_not_of("-0123456789") == std::string_view::npos;
            if (integral) {
                a[name] = embed_integer(fd, parse_int(val, name));
            } else {
                auto lit = parse_vf_literal(val, fd);
                if (lit.field && (lit.field->family != fd.family || lit.field->p != fd.p))
                    throw DomainError("value of '" + name + "' lives in " + lit.field->name() + ", not " + fd.name());
                a[name] = lit.value;
            }
            break;
        }
        case Sort::RF: {
            auto v = parse_int(val, name) % fd.p;
            if (v < 0) v += fd.p;
            a[name] = RFElem{static_cast<int>(v)};
            break;
        }
        case Sort::ZZ: a[name] = parse_int(val, name); break;
        }
    }
    return a;
}

void Diagnostics::add(std::string note)
{
    if (notes.size() >= 50) return;
    if (std::find(notes.begin(), notes.end(), note) == notes.end()) notes.push_back(std::move(note));
}

namespace {

// ord of an exact zero inside an atom.
struct UndefinedOrd {};

Sort quick_sort(const Term& t)
{
    switch (t.kind) {
    case TermKind::Var:
    case TermKind::Lit: return t.sort;
    case TermKind::Const: return Sort::VF;
    case TermKind::Ord: return Sort::ZZ;
    case TermKind::Ac: return Sort::RF;
    default: return quick_sort(*t.args[0]);
    }
}

const Value& lookup(const Assignment& a, const std::string& name)
{
    auto it = a.find(name);
    if (it == a.end()) throw DomainError("variable '" + name + "' is not assigned");
    return it->second;
}

VFElem vf_term(const FieldDesc& fd, const Assignment& a, const Term& t)
{
    switch (t.kind) {
    case TermKind::Var: {
        auto* x = std::get_if<VFElem>(&lookup(a, t.name));
        if (!x) throw SortError("variable '" + t.name + "' is VF but assigned another sort", t.name);
        return *x;
    }
    case TermKind::Const: return embed_constant(fd, t.poly);
    case TermKind::Lit: return embed_integer(fd, t.value);
    case TermKind::Add: return vf_add(fd, vf_term(fd, a, *t.args[0]), vf_term(fd, a, *t.args[1]));
    case TermKind::Mul: return vf_mul(fd, vf_term(fd, a, *t.args[0]), vf_term(fd, a, *t.args[1]));
    case TermKind::Neg: return vf_neg(fd, vf_term(fd, a, *t.args[0]));
    default: throw SortError("expected a VF term", format(t));
    }
}

int rf_term(const FieldDesc& fd, const Assignment& a, const Term& t)
{
    switch (t.kind) {
    case TermKind::Var: {
        auto* u = std::get_if<RFElem>(&lookup(a, t.name));
        if (!u) throw SortError("variable '" + t.name + "' is RF but assigned another sort", t.name);
        return u->value;
    }
    case TermKind::Lit: {
        auto v = t.value % fd.p;
        return static_cast<int>(v < 0 ? v + fd.p : v);
    }
    case TermKind::Add: return (rf_term(fd, a, *t.args[0]) + rf_term(fd, a, *t.args[1])) % fd.p;
    case TermKind::Mul:
        return static_cast<int>(static_cast<std::int64_t>(rf_term(fd, a, *t.args[0])) * rf_term(fd, a, *t.args[1]) %
                                fd.p);
    case TermKind::Neg: return (fd.p - rf_term(fd, a, *t.args[0])) % fd.p;
    case TermKind::Ac: return vf_ac(vf_term(fd, a, *t.args[0]));
    default: throw SortError("expected an RF term", format(t));
    }
}

std::int64_t zz_term(const FieldDesc& fd, const Assignment& a, const Term& t)
{
    switch (t.kind) {
    case TermKind::Var: {
        auto* z = std::get_if<std::int64_t>(&lookup(a, t.name));
        if (!z) throw SortError("variable '" + t.name + "' is ZZ but assigned another sort", t.name);
        return *z;
    }
    case TermKind::Lit: return t.value;
    case TermKind::Add: return zz_term(fd, a, *t.args[0]) + zz_term(fd, a, *t.args[1]);
    case TermKind::Neg: return -zz_term(fd, a, *t.args[0]);
    case TermKind::Ord: {
        auto x = vf_term(fd, a, *t.args[0]);
        if (x.exact_zero) throw UndefinedOrd{};
        return vf_ord(x);
    }
    default: throw SortError("expected a ZZ term", format(t));
    }
}

int digit_at(const VFElem& x, std::int64_t i)
{
    if (x.exact_zero || i < x.v) return 0;
    return x.digits[static_cast<std::size_t>(i - x.v)];
}

Truth vf_equal(const VFElem& x, const VFElem& y)
{
    if (x.exact_zero && y.exact_zero) return Truth::True;
    std::int64_t lo = INT64_MAX, hi = INT64_MAX;
    for (const VFElem* e : {&x, &y})
        if (!e->exact_zero) {
            lo = std::min(lo, e->v);
            hi = std::min(hi, e->abs_precision());
        }
    if (lo >= hi) return Truth::Unknown;
    for (std::int64_t i = lo; i < hi; ++i)
        if (digit_at(x, i) != digit_at(y, i)) return Truth::False;
    return Truth::True;
}

void collect_free(const Term& t, std::set<std::string>& out)
{
    if (t.kind == TermKind::Var) out.insert(t.name);
    for (auto& s : t.args)
        collect_free(*s, out);
}

void collect_free(const Formula& f, std::set<std::string>& out)
{
    for (auto& t : f.terms)
        collect_free(*t, out);
    if (f.kind == FormulaKind::Exists || f.kind == FormulaKind::Forall) {
        std::set<std::string> inner;
        collect_free(*f.subs[0], inner);
        inner.erase(f.var);
        out.insert(inner.begin(), inner.end());
    } else {
        for (auto& s : f.subs)
            collect_free(*s, out);
    }
}

bool occurs_free(const Formula& f, const std::string& v)
{
    std::set<std::string> s;
    collect_free(f, s);
    return s.count(v) != 0;
}

using Witnesses = std::vector<std::pair<std::string, Value>>;

class Evaluator {
public:
    Evaluator(const FieldDesc& fd, const SearchBox& box, Assignment& env, Diagnostics* diag)
        : fd_(fd), box_(box), env_(env), diag_(diag)
    {
    }

    Truth eval(const Formula& f, Witnesses* record = nullptr)
    {
        switch (f.kind) {
        case FormulaKind::True: return Truth::True;
        case FormulaKind::False: return Truth::False;
        case FormulaKind::Eq:
        case FormulaKind::Le:
        case FormulaKind::Cong: return atom(f);
        case FormulaKind::And: {
            Truth a = eval(*f.subs[0]);
            if (a == Truth::False) return a;
            return truth_and(a, eval(*f.subs[1]));
        }
        case FormulaKind::Or: {
            Truth a = eval(*f.subs[0]);
            if (a == Truth::True) return a;
            return truth_or(a, eval(*f.subs[1]));
        }
        case FormulaKind::Not: return truth_not(eval(*f.subs[0]));
        case FormulaKind::Exists:
        case FormulaKind::Forall: return quantifier(f, record);
        }
        return Truth::Unknown;
    }

private:
    const FieldDesc& fd_;
    const SearchBox& box_;
    Assignment& env_;
    Diagnostics* diag_;

    void note(const std::string& what, const Formula& f)
    {
        if (diag_) diag_->add(what + " in '" + format(f) + "'");
    }

    Truth atom(const Formula& f)
    {
        try {
            const Term& l = *f.terms[0];
            const Term& r = *f.terms[1];
            switch (f.kind) {
            case FormulaKind::Eq:
                switch (quick_sort(l)) {
                case Sort::VF: return vf_equal(vf_term(fd_, env_, l), vf_term(fd_, env_, r));
                case Sort::RF: return rf_term(fd_, env_, l) == rf_term(fd_, env_, r) ? Truth::True : Truth::False;
                case Sort::ZZ: return zz_term(fd_, env_, l) == zz_term(fd_, env_, r) ? Truth::True : Truth::False;
                }
                break;
            case FormulaKind::Le: return zz_term(fd_, env_, l) <= zz_term(fd_, env_, r) ? Truth::True : Truth::False;
            case FormulaKind::Cong: {
                auto d = (zz_term(fd_, env_, l) - zz_term(fd_, env_, r)) % f.modulus;
                return d == 0 ? Truth::True : Truth::False;
            }
            default: break;
            }
        } catch (const UndefinedOrd&) {
            return Truth::False;
        } catch (const PrecisionError& e) {
            note(std::string("precision: ") + e.what(), f);
            return Truth::Unknown;
        }
        return Truth::Unknown;
    }

    struct Binding {
        Assignment& env;
        std::string name;
        std::optional<Value> saved;
        Binding(Assignment& e, const std::string& n) : env(e), name(n)
        {
            auto it = env.find(n);
            if (it != env.end()) saved = it->second;
        }
        void set(Value v) { env[name] = std::move(v); }
        ~Binding()
        {
            if (saved) env[name] = *saved;
            else env.erase(name);
        }
    };

    // Tries one candidate value; returns the verdict of the body and records
    // witnesses for existential chains.
    Truth try_value(const Formula& f, Binding& b, Value v, Witnesses* record)
    {
        b.set(v);
        std::size_t mark = record ? record->size() : 0;
        if (record) record->emplace_back(f.var, v);
        Truth t = eval(*f.subs[0], record && f.subs[0]->kind == FormulaKind::Exists ? record : nullptr);
        if (record && t != Truth::True) record->resize(mark);
        return t;
    }

    Truth quantifier(const Formula& f, Witnesses* record)
    {
        bool exists = f.kind == FormulaKind::Exists;
        const Formula& body = *f.subs[0];
        if (!occurs_free(body, f.var)) {
            Binding b(env_, f.var);
            env_.erase(f.var);
            return eval(body);
        }
        Truth stop = exists ? Truth::True : Truth::False;
        Binding b(env_, f.var);
        if (f.var_sort == Sort::RF) {
            // exact: the residue field is finite
            bool unknown = false;
            for (int u = 0; u < fd_.p; ++u) {
                Truth t = try_value(f, b, RFElem{u}, exists ? record : nullptr);
                if (t == stop) return stop;
                if (t == Truth::Unknown) unknown = true;
            }
            return unknown ? Truth::Unknown : truth_not(stop);
        }
        if (f.var_sort == Sort::ZZ) {
            if (auto exact = decide_zz(f)) {
                if (*exact == Truth::True && exists && record) {
                    // best effort witness from the box
                    for (std::int64_t z = box_.zmin; z <= box_.zmax; ++z)
                        if (try_value(f, b, z, record) == Truth::True) break;
                }
                return *exact;
            }
            for (std::int64_t z = box_.zmin; z <= box_.zmax; ++z)
                if (try_value(f, b, z, exists ? record : nullptr) == stop) return stop;
            return Truth::Unknown;
        }
        if (try_value(f, b, vf_zero(), exists ? record : nullptr) == stop) return stop;
        for (std::int64_t v = box_.vmin; v <= box_.vmax; ++v) {
            bool hit = false;
            for_each_cell(fd_, v, box_.depth, [&](const VFElem& x) {
                if (!hit && try_value(f, b, x, exists ? record : nullptr) == stop) hit = true;
            });
            if (hit) return stop;
        }
        return Truth::Unknown;
    }

    // Exact verdict of a ZZ quantifier through elimination, when every part
    // of its scope that does not mention a bound ZZ variable has a definite
    // verdict and the rest is Presburger after substituting outer values.
    std::optional<Truth> decide_zz(const Formula& f)
    {
        std::set<std::string> bound;
        FormulaPtr g;
        try {
            g = reduce(f, bound);
        } catch (const UndefinedOrd&) {
            return std::nullopt;
        }
        if (!g) return std::nullopt;
        try {
            auto s = presburger_qe(*g, {});
            return s.disjuncts.empty() ? Truth::False : Truth::True;
        } catch (const ResourceError& e) {
            note(std::string("elimination skipped: ") + e.what(), f);
            return std::nullopt;
        }
    }

    bool mentions(const Formula& f, const std::set<std::string>& bound)
    {
        if (bound.empty()) return false;
        std::set<std::string> fv;
        collect_free(f, fv);
        for (auto& v : bound)
            if (fv.count(v)) return true;
        return false;
    }

    TermPtr substitute(const Term& t, const std::set<std::string>& bound)
    {
        using namespace build;
        switch (t.kind) {
        case TermKind::Var:
            if (bound.count(t.name)) return var(t.name, Sort::ZZ);
            return lit(zz_term(fd_, env_, t), Sort::ZZ);
        case TermKind::Lit: return lit(t.value, Sort::ZZ);
        case TermKind::Add: return add(substitute(*t.args[0], bound), substitute(*t.args[1], bound));
        case TermKind::Neg: return neg(substitute(*t.args[0], bound));
        case TermKind::Ord: return lit(zz_term(fd_, env_, t), Sort::ZZ);
        default: throw SortError("expected a ZZ term", format(t));
        }
    }

    FormulaPtr reduce(const Formula& f, std::set<std::string>& bound)
    {
        using namespace build;
        if (!mentions(f, bound) && !(f.kind == FormulaKind::Exists && bound.empty()) &&
            !(f.kind == FormulaKind::Forall && bound.empty())) {
            Truth t = eval(f);
            if (t == Truth::Unknown) return nullptr;
            return truth(t == Truth::True);
        }
        switch (f.kind) {
        case FormulaKind::True:
        case FormulaKind::False: return truth(f.kind == FormulaKind::True);
        case FormulaKind::Eq:
        case FormulaKind::Le:
        case FormulaKind::Cong: {
            TermPtr l, r;
            try {
                l = substitute(*f.terms[0], bound);
                r = substitute(*f.terms[1], bound);
            } catch (const UndefinedOrd&) {
                return truth(false);
            } catch (const PrecisionError&) {
                return nullptr;
            }
            if (f.kind == FormulaKind::Eq) return eq(l, r);
            if (f.kind == FormulaKind::Le) return le(l, r);
            return cong(l, r, f.modulus);
        }
        case FormulaKind::And:
        case FormulaKind::Or: {
            auto a = reduce(*f.subs[0], bound);
            if (!a) return nullptr;
            auto c = reduce(*f.subs[1], bound);
            if (!c) return nullptr;
            return f.kind == FormulaKind::And ? conj(a, c) : disj(a, c);
        }
        case FormulaKind::Not: {
            auto a = reduce(*f.subs[0], bound);
            return a ? negate(a) : nullptr;
        }
        case FormulaKind::Exists:
        case FormulaKind::Forall: {
            bool ex = f.kind == FormulaKind::Exists;
            if (f.var_sort == Sort::ZZ) {
                bool had = bound.count(f.var) != 0;
                bound.insert(f.var);
                auto a = reduce(*f.subs[0], bound);
                if (!had) bound.erase(f.var);
                if (!a) return nullptr;
                return ex ? exists(f.var, Sort::ZZ, a) : forall(f.var, Sort::ZZ, a);
            }
            if (f.var_sort == Sort::RF && fd_.p <= 64) {
                // finite expansion; the bound name must not shadow a ZZ one
                if (bound.count(f.var)) return nullptr;
                Binding b(env_, f.var);
                FormulaPtr acc;
                for (int u = 0; u < fd_.p; ++u) {
                    b.set(RFElem{u});
                    auto a = reduce(*f.subs[0], bound);
                    if (!a) return nullptr;
                    acc = acc ? (ex ? disj(acc, a) : conj(acc, a)) : a;
                }
                return acc;
            }
            return nullptr;
        }
        }
        return nullptr;
    }
};

Signature checked_signature(const Formula& f, const Assignment& a, bool require_all)
{
    Signature sig = typecheck(f);
    for (auto& d : sig.vars) {
        auto it = a.find(d.name);
        if (it == a.end()) {
            if (require_all) throw DomainError("free variable '" + d.name + "' is not assigned");
            continue;
        }
        if (value_sort(it->second) != d.sort)
            throw SortError("variable '" + d.name + "' has sort " + std::string(sort_name(d.sort)) +
                                " but is assigned a " + std::string(sort_name(value_sort(it->second))) + " value",
                            d.name);
    }
    return sig;
}

} // namespace

VFElem eval_vf_term(const FieldDesc& fd, const Assignment& a, const Term& t)
{
    return vf_term(fd, a, t);
}

int eval_rf_term(const FieldDesc& fd, const Assignment& a, const Term& t)
{
    return rf_term(fd, a, t);
}

std::int64_t eval_zz_term(const FieldDesc& fd, const Assignment& a, const Term& t)
{
    try {
        return zz_term(fd, a, t);
    } catch (const UndefinedOrd&) {
        throw DomainError("ord of zero in '" + format(t) + "'");
    }
}

Truth eval_in_place(const FieldDesc& fd, const SearchBox& box, Assignment& a, const Formula& f)
{
    Evaluator ev(fd, box, a, nullptr);
    return ev.eval(f);
}

Truth eval_formula(const FieldDesc& fd, const SearchBox& box, const Assignment& a, const Formula& f,
                   Diagnostics* diag)
{
    return eval_formula_detailed(fd, box, a, f, diag).verdict;
}

EvalResult eval_formula_detailed(const FieldDesc& fd, const SearchBox& box, const Assignment& a, const Formula& f,
                                 Diagnostics* diag)
{
    validate(fd, box);
    checked_signature(f, a, true);
    EvalResult r;
    Assignment env = a;
    Evaluator ev(fd, box, env, diag);
    r.verdict = ev.eval(f, f.kind == FormulaKind::Exists ? &r.witnesses : nullptr);
    if (r.verdict != Truth::True) r.witnesses.clear();
    return r;
}

namespace {

std::int64_t vf_domain_size(const FieldDesc& fd, const SearchBox& box, std::int64_t cap)
{
    std::int64_t per = fd.p - 1;
    for (int i = 1; i < box.depth; ++i) {
        per *= fd.p;
        if (per > cap) return cap + 1;
    }
    std::int64_t n = box.vmax - box.vmin + 1;
    if (per > (cap - 1) / n + 1) return cap + 1;
    return 1 + n * per;
}

} // namespace

EnumerationResult enumerate_set(const FieldDesc& fd, const SearchBox& box, const Formula& f, const Assignment& fixed,
                                std::int64_t budget)
{
    validate(fd, box);
    Signature sig = checked_signature(f, fixed, false);
    EnumerationResult res;
    std::vector<std::vector<Value>> domains;
    std::int64_t total = 1;
    for (auto& d : sig.vars) {
        if (fixed.count(d.name)) continue;
        res.vars.push_back(d);
        std::int64_t size = 0;
        switch (d.sort) {
        case Sort::VF: size = vf_domain_size(fd, box, budget); break;
        case Sort::RF: size = fd.p; break;
        case Sort::ZZ: size = box.zmax - box.zmin + 1; break;
        }
        if (size > budget || total > budget / size)
            throw ResourceError("enumeration exceeds the budget of " + std::to_string(budget) + " tuples");
        total *= size;
        std::vector<Value> dom;
        dom.reserve(static_cast<std::size_t>(size));
        if (d.sort == Sort::VF) {
            for (auto& x : enumerate_ball(fd, box.vmin, box.vmax, box.depth))
                dom.emplace_back(x);
        } else if (d.sort == Sort::RF) {
            for (int u = 0; u < fd.p; ++u)
                dom.emplace_back(RFElem{u});
        } else {
            for (std::int64_t z = box.zmin; z <= box.zmax; ++z)
                dom.emplace_back(z);
        }
        domains.push_back(std::move(dom));
    }
    Assignment env = fixed;
    std::vector<std::size_t> idx(domains.size(), 0);
    while (true) {
        std::vector<Value> tuple;
        for (std::size_t i = 0; i < domains.size(); ++i) {
            env[res.vars[i].name] = domains[i][idx[i]];
            tuple.push_back(domains[i][idx[i]]);
        }
        Truth t = eval_in_place(fd, box, env, f);
        if (t == Truth::True) res.true_tuples.push_back(std::move(tuple));
        else if (t == Truth::Unknown) res.unknown_tuples.push_back(std::move(tuple));
        std::size_t k = domains.size();
        while (k > 0) {
            --k;
            if (++idx[k] < domains[k].size()) break;
            idx[k] = 0;
            if (k == 0) return res;
        }
        if (domains.empty()) return res;
    }
}

std::int64_t count_rf_fiber(const FieldDesc& fd, const SearchBox& box, const Formula& f,
                            const std::vector<std::string>& fiber, const Assignment& base)
{
    validate(fd, box);
    Signature sig = typecheck(f);
    for (auto& d : sig.vars) {
        bool in_fiber = std::find(fiber.begin(), fiber.end(), d.name) != fiber.end();
        if (in_fiber && d.sort != Sort::RF)
            throw DomainError("fiber variable '" + d.name + "' has sort " + std::string(sort_name(d.sort)) +
                              "; fibers must be RF-only");
        if (!in_fiber && !base.count(d.name)) throw DomainError("base variable '" + d.name + "' is not assigned");
    }
    std::int64_t points = 1;
    for (std::size_t i = 0; i < fiber.size(); ++i) {
        if (points > kDefaultEnumerationBudget / fd.p)
            throw ResourceError("residue fiber has more than " + std::to_string(kDefaultEnumerationBudget) + " points");
        points *= fd.p;
    }
    Assignment env = base;
    for (auto& v : fiber)
        env[v] = RFElem{0};
    checked_signature(f, env, true);
    std::vector<int> y(fiber.size(), 0);
    std::int64_t count = 0;
    for (std::int64_t k = 0; k < points; ++k) {
        std::int64_t rest = k;
        for (std::size_t i = fiber.size(); i-- > 0;) {
            y[i] = static_cast<int>(rest % fd.p);
            rest /= fd.p;
            env[fiber[i]] = RFElem{y[i]};
        }
        Truth t = eval_in_place(fd, box, env, f);
        if (t == Truth::Unknown) throw UnresolvedError("fiber membership is Unknown at a residue point");
        if (t == Truth::True) ++count;
    }
    return count;
}

} // namespace wb
