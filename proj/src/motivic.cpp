#include "wb/motivic.hpp"

#include <limits>

namespace wb {

namespace {

std::int64_t mod(std::int64_t a, std::int64_t m)
{
    a %= m;
    return a < 0 ? a + m : a;
}

mpq_class p_power(int p, std::int64_t e)
{
    mpz_class n;
    mpz_ui_pow_ui(n.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? mpq_class(mpz_class(1), n) : mpq_class(n);
}

// Restores the listed variables of `a` on scope exit.
struct Scratch {
    Assignment& a;
    std::vector<std::pair<std::string, std::optional<Value>>> saved;
    explicit Scratch(Assignment& env) : a(env) {}
    void set(const std::string& name, Value v)
    {
        bool known = false;
        for (auto& s : saved)
            known |= s.first == name;
        if (!known) {
            auto it = a.find(name);
            saved.emplace_back(name, it == a.end() ? std::nullopt : std::optional<Value>(it->second));
        }
        a[name] = std::move(v);
    }
    ~Scratch()
    {
        for (auto it = saved.rbegin(); it != saved.rend(); ++it) {
            if (it->second) a[it->first] = *it->second;
            else a.erase(it->first);
        }
    }
};

Truth member(const FieldDesc& fd, const SearchBox& box, Assignment& env, const FormulaPtr& f)
{
    return f ? eval_in_place(fd, box, env, *f) : Truth::True;
}

std::int64_t fiber_points(int p, std::size_t r)
{
    std::int64_t n = 1;
    for (std::size_t i = 0; i < r; ++i) {
        if (n > kDefaultEnumerationBudget / p) throw ResourceError("residue fiber is too large to enumerate");
        n *= p;
    }
    return n;
}

// Calls fn() for every fiber point y with (x, y) in the fiber set.
template <class Fn>
void for_each_fiber_point(const FieldDesc& fd, const SearchBox& box, Assignment& env, const FormulaPtr& fiber,
                          const std::vector<std::string>& vars, Fn&& fn)
{
    Scratch s(env);
    std::int64_t n = fiber_points(fd.p, vars.size());
    for (std::int64_t k = 0; k < n; ++k) {
        std::int64_t rest = k;
        for (std::size_t i = vars.size(); i-- > 0;) {
            s.set(vars[i], RFElem{static_cast<int>(rest % fd.p)});
            rest /= fd.p;
        }
        Truth t = member(fd, box, env, fiber);
        if (t == Truth::Unknown) throw UnresolvedError("fiber membership is Unknown at a residue point");
        if (t == Truth::True) fn();
    }
}

std::int64_t zfun(const FieldDesc& fd, const SearchBox& box, const ZFunction& z, Assignment& env)
{
    if (z.term) return eval_zz_term(fd, env, *z.term);
    if (!z.graph) return 0;
    Scratch s(env);
    std::optional<std::int64_t> found;
    for (std::int64_t v = z.lo; v <= z.hi; ++v) {
        s.set(z.var, v);
        Truth t = eval_in_place(fd, box, env, *z.graph);
        if (t == Truth::Unknown)
            throw UnresolvedError("graph of a ZZ function is Unknown at " + z.var + " = " + std::to_string(v));
        if (t == Truth::True) {
            if (found)
                throw UnresolvedError("graph of a ZZ function has several solutions in [" + std::to_string(z.lo) + ", " +
                                      std::to_string(z.hi) + "]");
            found = v;
        }
    }
    if (!found)
        throw UnresolvedError("graph of a ZZ function has no solution in [" + std::to_string(z.lo) + ", " +
                              std::to_string(z.hi) + "]");
    return *found;
}

mpq_class motivic(const FieldDesc& fd, const SearchBox& box, const MotivicFunction& f, Assignment& env)
{
    mpq_class total = 0;
    for (auto& term : f.terms) {
        std::int64_t count = 0;
        if (term.fiber) {
            for_each_fiber_point(fd, box, env, term.fiber, term.fiber_vars, [&] { ++count; });
        } else {
            count = fiber_points(fd.p, term.fiber_vars.size());
        }
        if (count == 0) continue;
        mpq_class v = p_power(fd.p, zfun(fd, box, term.alpha, env)) * count;
        for (auto& b : term.betas)
            v *= static_cast<long>(zfun(fd, box, b, env));
        for (auto a : term.geom)
            v /= mpq_class(1) - p_power(fd.p, a);
        total += v;
    }
    return total;
}

void collect(const Term& t, std::set<std::string>& out)
{
    if (t.kind == TermKind::Var) out.insert(t.name);
    for (auto& a : t.args)
        collect(*a, out);
}

void collect(const Formula& f, std::set<std::string>& out)
{
    for (auto& d : typecheck(f).vars)
        out.insert(d.name);
}

// Free variables of a graph formula other than its own variable.
void collect_graph(const FormulaPtr& g, const std::string& var, std::set<std::string>& out)
{
    if (!g) return;
    std::set<std::string> s;
    collect(*g, s);
    s.erase(var);
    out.insert(s.begin(), s.end());
}

void collect(const ZFunction& z, std::set<std::string>& out)
{
    if (z.term) collect(*z.term, out);
    collect_graph(z.graph, z.var, out);
}

} // namespace

void validate(const MotivicFunction& f)
{
    for (auto& t : f.terms)
        for (auto a : t.geom)
            if (a == 0) throw DomainError("geometric exponents must be nonzero in '" + f.name + "'");
}

void validate_twist(const FieldDesc& fd, std::int64_t twist)
{
    if (mod(twist, fd.p) == 0) throw DomainError("twist " + std::to_string(twist) + " is not a unit modulo " +
                                                 std::to_string(fd.p));
}

CharacterValue canonical_character(const FieldDesc& fd, const VFElem& x, std::int64_t twist)
{
    validate_twist(fd, twist);
    VFElem y = twist == 1 ? x : vf_mul(fd, embed_integer(fd, twist), x);
    if (y.exact_zero || y.v >= 1) return Cyclo(1);
    if (y.abs_precision() < 1)
        throw PrecisionError("character needs the digits up to index 0; known only below index " +
                             std::to_string(y.abs_precision()));
    if (fd.family == Family::FpT) {
        std::int64_t s = 0;
        for (std::int64_t i = y.v; i <= 0; ++i)
            s += y.digits[static_cast<std::size_t>(i - y.v)];
        return Cyclo::root(fd.p, 1, s % fd.p);
    }
    int K = static_cast<int>(1 - y.v);
    std::int64_t M = 1;
    for (int i = 0; i < K; ++i) {
        if (M > std::numeric_limits<std::int64_t>::max() / (4 * fd.p))
            throw ResourceError("character conductor p^" + std::to_string(K) + " is too large");
        M *= fd.p;
    }
    std::int64_t m = 0, w = 1;
    for (std::int64_t i = y.v; i <= 0; ++i) {
        m += y.digits[static_cast<std::size_t>(i - y.v)] * w;
        w *= fd.p;
    }
    return Cyclo::root(fd.p, K, m);
}

CharacterValue residue_character(const FieldDesc& fd, int u, std::int64_t twist)
{
    validate_twist(fd, twist);
    return Cyclo::root(fd.p, 1, mod(static_cast<std::int64_t>(u) * mod(twist, fd.p), fd.p));
}

std::int64_t eval_zfunction(const FieldDesc& fd, const SearchBox& box, const ZFunction& z, const Assignment& x)
{
    Assignment env = x;
    return zfun(fd, box, z, env);
}

VFElem eval_vffunction(const FieldDesc& fd, const SearchBox& box, const VFFunction& g, const Assignment& x)
{
    if (g.term) return vf_shift(eval_vf_term(fd, x, *g.term), g.shift);
    if (!g.graph) return vf_zero();
    Assignment env = x;
    std::optional<VFElem> found;
    int hits = 0;
    auto test = [&](const VFElem& w) {
        env[g.var] = w;
        Truth t = eval_in_place(fd, box, env, *g.graph);
        if (t == Truth::Unknown) throw UnresolvedError("graph of a VF function is Unknown at a search point");
        if (t == Truth::True) {
            ++hits;
            found = w;
        }
    };
    test(vf_zero());
    for (std::int64_t v = box.vmin; v <= box.vmax; ++v)
        for_each_cell(fd, v, box.depth, test);
    if (hits != 1)
        throw UnresolvedError("graph of a VF function has " + std::to_string(hits) +
                              " solutions among the search representatives");
    return vf_shift(*found, g.shift);
}

int eval_rffunction(const FieldDesc& fd, const SearchBox& box, const RFFunction& e, const Assignment& x)
{
    if (e.term) return eval_rf_term(fd, x, *e.term);
    if (!e.graph) return 0;
    Assignment env = x;
    int hits = 0, found = 0;
    for (int u = 0; u < fd.p; ++u) {
        env[e.var] = RFElem{u};
        Truth t = eval_in_place(fd, box, env, *e.graph);
        if (t == Truth::Unknown) throw UnresolvedError("graph of an RF function is Unknown");
        if (t == Truth::True) {
            ++hits;
            found = u;
        }
    }
    if (hits != 1) throw UnresolvedError("graph of an RF function has " + std::to_string(hits) + " solutions");
    return found;
}

mpq_class eval_motivic(const FieldDesc& fd, const SearchBox& box, const MotivicFunction& f, const Assignment& x)
{
    Assignment env = x;
    return motivic(fd, box, f, env);
}

mpq_class eval_motivic_in_place(const FieldDesc& fd, const SearchBox& box, const MotivicFunction& f, Assignment& x)
{
    return motivic(fd, box, f, x);
}

Cyclo eval_exp(const FieldDesc& fd, const SearchBox& box, const MotivicExpFunction& f, const Assignment& x,
               std::int64_t twist)
{
    Assignment env = x;
    return eval_exp_in_place(fd, box, f, env, twist);
}

Cyclo eval_exp_in_place(const FieldDesc& fd, const SearchBox& box, const MotivicExpFunction& f, Assignment& env,
                        std::int64_t twist)
{
    validate_twist(fd, twist);
    Cyclo total;
    for (auto& term : f.terms) {
        mpq_class weight = motivic(fd, box, term.f, env);
        if (weight == 0) continue;
        Cyclo sum;
        for_each_fiber_point(fd, box, env, term.fiber, term.fiber_vars, [&] {
            VFElem g = eval_vffunction(fd, box, term.g, env);
            int e = eval_rffunction(fd, box, term.e, env);
            sum += canonical_character(fd, g, twist) * residue_character(fd, e, twist);
        });
        total += Cyclo(weight) * sum;
    }
    return total;
}

std::set<std::string> free_variables(const MotivicFunction& f)
{
    std::set<std::string> out;
    for (auto& t : f.terms) {
        std::set<std::string> s;
        collect(t.alpha, s);
        for (auto& b : t.betas)
            collect(b, s);
        if (t.fiber) collect(*t.fiber, s);
        for (auto& v : t.fiber_vars)
            s.erase(v);
        out.insert(s.begin(), s.end());
    }
    return out;
}

std::set<std::string> free_variables(const MotivicExpFunction& f)
{
    std::set<std::string> out;
    for (auto& t : f.terms) {
        std::set<std::string> s = free_variables(t.f);
        if (t.fiber) collect(*t.fiber, s);
        if (t.g.term) collect(*t.g.term, s);
        collect_graph(t.g.graph, t.g.var, s);
        if (t.e.term) collect(*t.e.term, s);
        collect_graph(t.e.graph, t.e.var, s);
        for (auto& v : t.fiber_vars)
            s.erase(v);
        out.insert(s.begin(), s.end());
    }
    return out;
}

} // namespace wb
