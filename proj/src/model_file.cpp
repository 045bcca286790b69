#include "wb/model_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace wb {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

std::int64_t to_int(std::string_view s, std::size_t pos)
{
    s = trim(s);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw SyntaxError("expected an integer, got '" + std::string(s) + "'", pos);
    return v;
}

bool is_ident(std::string_view s)
{
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; });
}

// Splits at `sep` outside (), {}, [].
std::vector<std::pair<std::string_view, std::size_t>> split_depth0(std::string_view s, char sep)
{
    std::vector<std::pair<std::string_view, std::size_t>> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        char c = i < s.size() ? s[i] : sep;
        if (c == '(' || c == '{' || c == '[') ++depth;
        else if (c == ')' || c == '}' || c == ']') --depth;
        else if (c == sep && depth == 0) {
            auto piece = trim(s.substr(start, i - start));
            if (!piece.empty()) out.emplace_back(piece, start);
            start = i + 1;
        }
    }
    return out;
}

std::size_t find_depth0(std::string_view s, char c)
{
    int depth = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(' || s[i] == '{' || s[i] == '[') ++depth;
        else if (s[i] == ')' || s[i] == '}' || s[i] == ']') --depth;
        else if (s[i] == c && depth == 0) return i;
    }
    return std::string_view::npos;
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(strip_comments(text)), src_(text_) {}

    ModelFile run()
    {
        while (true) {
            skip_space();
            if (pos_ >= src_.size()) break;
            std::size_t start = pos_;
            std::string kw(word());
            if (kw == "var") var_line(start);
            else if (kw == "domain") domain_line(start);
            else if (kw == "statement") statement_line(start);
            else if (kw == "twists") twists_line(start);
            else if (kw == "motivic") motivic_block(start);
            else if (kw == "exp") exp_block(start);
            else throw SyntaxError("unexpected '" + kw + "'", start);
        }
        return std::move(out_);
    }

private:
    std::string text_;
    std::string_view src_;
    std::size_t pos_ = 0;
    ModelFile out_;

    static std::string strip_comments(std::string_view t)
    {
        std::string r;
        bool comment = false;
        for (char c : t) {
            if (c == '#') comment = true;
            if (c == '\n') comment = false;
            r += comment ? ' ' : c;
        }
        return r;
    }

    void skip_space()
    {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    std::string_view word()
    {
        skip_space();
        std::size_t s = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' || src_[pos_] == '\''))
            ++pos_;
        if (s == pos_) throw SyntaxError("expected a name", s);
        return src_.substr(s, pos_ - s);
    }

    std::string_view rest_of_line()
    {
        std::size_t e = src_.find('\n', pos_);
        if (e == std::string_view::npos) e = src_.size();
        auto r = trim(src_.substr(pos_, e - pos_));
        pos_ = e;
        return r;
    }

    void expect(char c)
    {
        skip_space();
        if (pos_ >= src_.size() || src_[pos_] != c) throw SyntaxError(std::string("expected '") + c + "'", pos_);
        ++pos_;
    }

    // Body between a '{' at pos_ and its matching '}'.
    std::pair<std::string_view, std::size_t> braced()
    {
        expect('{');
        std::size_t s = pos_;
        int depth = 1;
        while (pos_ < src_.size()) {
            if (src_[pos_] == '{') ++depth;
            else if (src_[pos_] == '}' && --depth == 0) {
                auto body = src_.substr(s, pos_ - s);
                ++pos_;
                return {body, s};
            }
            ++pos_;
        }
        throw SyntaxError("unterminated block", s);
    }

    void declare_name(const std::string& name, std::size_t at)
    {
        if (!is_ident(name) || is_reserved(name)) throw SyntaxError("invalid name '" + name + "'", at);
    }

    void var_line(std::size_t start)
    {
        std::string name(word());
        declare_name(name, start);
        expect(':');
        auto s = sort_from_name(word());
        if (!s) throw SyntaxError("unknown sort", pos_);
        for (auto& v : out_.vars)
            if (v.name == name) throw SyntaxError("variable '" + name + "' declared twice", start);
        out_.vars.push_back({name, *s});
    }

    void domain_line(std::size_t start)
    {
        std::string name(word());
        declare_name(name, start);
        skip_space();
        if (src_.substr(pos_, 2) != ":=") throw SyntaxError("expected ':='", pos_);
        pos_ += 2;
        auto text = rest_of_line();
        out_.domains.emplace_back(name, parse_formula(text, out_.env()));
    }

    void statement_line(std::size_t start)
    {
        std::string name(word());
        declare_name(name, start);
        expect(':');
        out_.statements.emplace_back(name, std::string(rest_of_line()));
    }

    void twists_line(std::size_t start)
    {
        auto text = rest_of_line();
        for (auto [item, off] : split_depth0(text, ','))
            out_.twists.push_back(to_int(item, start + off));
    }

    struct Field {
        std::string key;
        std::string_view args; ///< inside the parentheses after the key, if any
        std::string_view value;
        std::size_t pos;
    };

    std::vector<Field> fields(std::string_view body, std::size_t base)
    {
        std::vector<Field> out;
        for (auto [item, off] : split_depth0(body, ';')) {
            std::size_t colon = find_depth0(item, ':');
            if (colon == std::string_view::npos) throw SyntaxError("expected 'key: value'", base + off);
            auto head = trim(item.substr(0, colon));
            Field f;
            f.pos = base + off;
            f.value = trim(item.substr(colon + 1));
            auto paren = head.find('(');
            if (paren != std::string_view::npos) {
                if (head.back() != ')') throw SyntaxError("malformed field header", f.pos);
                f.key = std::string(trim(head.substr(0, paren)));
                f.args = head.substr(paren + 1, head.size() - paren - 2);
            } else {
                f.key = std::string(head);
            }
            out.push_back(f);
        }
        return out;
    }

    // Sequence of `term { ... }` entries.
    std::vector<std::pair<std::string_view, std::size_t>> terms(std::string_view body, std::size_t base)
    {
        std::vector<std::pair<std::string_view, std::size_t>> out;
        std::size_t i = 0;
        while (true) {
            while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i])))
                ++i;
            if (i >= body.size()) break;
            if (body.substr(i, 4) != "term") throw SyntaxError("expected 'term'", base + i);
            i += 4;
            while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i])))
                ++i;
            if (i >= body.size() || body[i] != '{') throw SyntaxError("expected '{'", base + i);
            std::size_t s = ++i;
            int depth = 1;
            while (i < body.size() && depth > 0) {
                if (body[i] == '{') ++depth;
                else if (body[i] == '}') --depth;
                ++i;
            }
            if (depth != 0) throw SyntaxError("unterminated term", base + s);
            out.emplace_back(body.substr(s, i - 1 - s), base + s);
        }
        return out;
    }

    struct FiberSpec {
        FormulaPtr formula;
        std::vector<std::string> vars;
    };

    FiberSpec fiber(const Field& f)
    {
        SortEnv env = out_.env();
        auto parts = split_depth0(f.args, ';');
        if (parts.empty()) throw SyntaxError("fiber needs r=K", f.pos);
        auto rk = parts[0].first;
        if (rk.substr(0, 2) != "r=") throw SyntaxError("fiber needs r=K", f.pos);
        auto r = to_int(rk.substr(2), f.pos);
        FiberSpec spec;
        if (parts.size() > 1) {
            for (auto [name, off] : split_depth0(parts[1].first, ',')) {
                std::string n(name);
                declare_name(n, f.pos);
                spec.vars.push_back(n);
                env[n] = Sort::RF;
            }
        }
        spec.formula = parse_formula(f.value, env);
        if (parts.size() == 1) {
            for (auto& d : typecheck(*spec.formula).vars)
                if (d.sort == Sort::RF && !env.count(d.name)) spec.vars.push_back(d.name);
        }
        if (static_cast<std::int64_t>(spec.vars.size()) != r)
            throw SyntaxError("fiber declares r=" + std::to_string(r) + " but has " +
                                  std::to_string(spec.vars.size()) + " fiber variables",
                              f.pos);
        for (auto& d : typecheck(*spec.formula).vars)
            if (std::find(spec.vars.begin(), spec.vars.end(), d.name) == spec.vars.end() && !out_.env().count(d.name))
                throw SyntaxError("undeclared variable '" + d.name + "' in fiber formula", f.pos);
        return spec;
    }

    // "graph(v in [lo, hi]): formula" or "graph(v): formula".
    bool graph(std::string_view value, SortEnv env, Sort s, std::string& var, FormulaPtr& g, std::int64_t* lo,
               std::int64_t* hi, std::size_t pos)
    {
        if (value.substr(0, 6) != "graph(") return false;
        auto close = value.find(')');
        auto colon = close == std::string_view::npos ? close : value.find(':', close);
        if (colon == std::string_view::npos) throw SyntaxError("malformed graph", pos);
        auto head = trim(value.substr(6, close - 6));
        auto in = head.find(" in ");
        var = std::string(trim(head.substr(0, in)));
        declare_name(var, pos);
        if (in != std::string_view::npos) {
            if (!lo) throw SyntaxError("only ZZ graphs take a window", pos);
            auto w = trim(head.substr(in + 4));
            if (w.size() < 2 || w.front() != '[' || w.back() != ']') throw SyntaxError("window must be [lo, hi]", pos);
            auto ends = split_depth0(w.substr(1, w.size() - 2), ',');
            if (ends.size() != 2) throw SyntaxError("window must be [lo, hi]", pos);
            *lo = to_int(ends[0].first, pos);
            *hi = to_int(ends[1].first, pos);
        }
        env[var] = s;
        g = parse_formula(value.substr(colon + 1), env);
        return true;
    }

    ZFunction zfunction(const Field& f, const SortEnv& env)
    {
        ZFunction z;
        if (!graph(f.value, env, Sort::ZZ, z.var, z.graph, &z.lo, &z.hi, f.pos))
            z.term = parse_term(f.value, env, Sort::ZZ);
        return z;
    }

    MotivicTerm motivic_term(std::string_view body, std::size_t base)
    {
        MotivicTerm t;
        std::vector<Field> deferred;
        for (auto& f : fields(body, base)) {
            if (f.key == "fiber") {
                auto spec = fiber(f);
                t.fiber = spec.formula;
                t.fiber_vars = spec.vars;
            } else {
                deferred.push_back(f);
            }
        }
        SortEnv env = out_.env();
        bool alpha = false;
        for (auto& f : deferred) {
            if (f.key == "alpha") {
                if (alpha) throw SyntaxError("alpha given twice", f.pos);
                t.alpha = zfunction(f, env);
                alpha = true;
            } else if (f.key == "beta") {
                t.betas.push_back(zfunction(f, env));
            } else if (f.key == "geom") {
                auto v = f.value;
                if (v.size() < 2 || v.front() != '[' || v.back() != ']') throw SyntaxError("geom must be [a, ...]", f.pos);
                for (auto [item, off] : split_depth0(v.substr(1, v.size() - 2), ',')) {
                    auto a = to_int(item, f.pos + off);
                    if (a == 0) throw SyntaxError("geometric exponents must be nonzero", f.pos + off);
                    t.geom.push_back(a);
                }
            } else {
                throw SyntaxError("unknown field '" + f.key + "' in motivic term", f.pos);
            }
        }
        return t;
    }

    void unique_function_name(const std::string& name, std::size_t at)
    {
        if (out_.find_motivic(name) || out_.find_exp(name))
            throw SyntaxError("function '" + name + "' defined twice", at);
    }

    void motivic_block(std::size_t start)
    {
        MotivicFunction f;
        f.name = std::string(word());
        declare_name(f.name, start);
        unique_function_name(f.name, start);
        auto [body, base] = braced();
        for (auto [tb, tpos] : terms(body, base))
            f.terms.push_back(motivic_term(tb, tpos));
        out_.motivic.push_back(std::move(f));
    }

    ExpTerm exp_term(std::string_view body, std::size_t base)
    {
        ExpTerm t;
        t.f.terms.emplace_back();
        std::vector<Field> deferred;
        for (auto& f : fields(body, base)) {
            if (f.key == "fiber") {
                auto spec = fiber(f);
                t.fiber = spec.formula;
                t.fiber_vars = spec.vars;
            } else {
                deferred.push_back(f);
            }
        }
        SortEnv env = out_.env();
        for (auto& v : t.fiber_vars)
            env[v] = Sort::RF;
        for (auto& f : deferred) {
            if (f.key == "f") {
                std::string name(f.value);
                if (auto* m = out_.find_motivic(name)) {
                    t.f = *m;
                } else {
                    MotivicTerm c;
                    c.betas.push_back(ZFunction{parse_term(f.value, out_.env(), Sort::ZZ), nullptr, "", 0, 0});
                    t.f.terms = {c};
                }
            } else if (f.key == "g") {
                if (!graph(f.value, env, Sort::VF, t.g.var, t.g.graph, nullptr, nullptr, f.pos))
                    t.g.term = parse_term(f.value, env, Sort::VF);
            } else if (f.key == "gshift") {
                t.g.shift = to_int(f.value, f.pos);
            } else if (f.key == "e") {
                if (!graph(f.value, env, Sort::RF, t.e.var, t.e.graph, nullptr, nullptr, f.pos))
                    t.e.term = parse_term(f.value, env, Sort::RF);
            } else {
                throw SyntaxError("unknown field '" + f.key + "' in exp term", f.pos);
            }
        }
        return t;
    }

    void exp_block(std::size_t start)
    {
        MotivicExpFunction f;
        f.name = std::string(word());
        declare_name(f.name, start);
        unique_function_name(f.name, start);
        auto [body, base] = braced();
        for (auto [tb, tpos] : terms(body, base))
            f.terms.push_back(exp_term(tb, tpos));
        out_.exps.push_back(std::move(f));
    }
};

std::vector<VarDecl> in_file_order(const ModelFile& file, const std::set<std::string>& names)
{
    std::vector<VarDecl> out;
    for (auto& v : file.vars)
        if (names.count(v.name)) out.push_back(v);
    return out;
}

} // namespace

SortEnv ModelFile::env() const
{
    SortEnv e;
    for (auto& v : vars)
        e[v.name] = v.sort;
    return e;
}

const MotivicFunction* ModelFile::find_motivic(std::string_view name) const
{
    for (auto& f : motivic)
        if (f.name == name) return &f;
    return nullptr;
}

const MotivicExpFunction* ModelFile::find_exp(std::string_view name) const
{
    for (auto& f : exps)
        if (f.name == name) return &f;
    return nullptr;
}

const FormulaPtr* ModelFile::find_domain(std::string_view name) const
{
    for (auto& d : domains)
        if (d.first == name) return &d.second;
    return nullptr;
}

ModelFile parse_model_file(std::string_view text)
{
    return Parser(text).run();
}

FormulaPtr resolve_domain(const ModelFile& file, std::string_view ref, const std::vector<VarDecl>& over)
{
    ref = trim(ref);
    if (auto* d = file.find_domain(ref)) return *d;
    if (!ref.empty() && ref.front() == '{') {
        if (ref.back() != '}') throw SyntaxError("inline domain must end with '}'", ref.size());
        return parse_formula(ref.substr(1, ref.size() - 2), file.env());
    }
    std::vector<std::string> names;
    if (ref == "O") {
        for (auto& v : over)
            if (v.sort == Sort::VF) names.push_back(v.name);
    } else if (ref.substr(0, 2) == "O(" && ref.back() == ')') {
        for (auto [n, off] : split_depth0(ref.substr(2, ref.size() - 3), ','))
            names.emplace_back(n);
    } else {
        throw SyntaxError("unknown domain '" + std::string(ref) + "'", 0);
    }
    using namespace build;
    FormulaPtr f = truth(true);
    bool first = true;
    for (auto& n : names) {
        auto x = var(n, Sort::VF);
        auto in_ring = disj(eq(x, lit(0, Sort::VF)), le(lit(0, Sort::ZZ), ord(x)));
        f = first ? in_ring : conj(f, in_ring);
        first = false;
    }
    return f;
}

std::vector<VarDecl> function_vars(const ModelFile& file, const MotivicFunction& f)
{
    return in_file_order(file, free_variables(f));
}

std::vector<VarDecl> function_vars(const ModelFile& file, const MotivicExpFunction& f)
{
    return in_file_order(file, free_variables(f));
}

} // namespace wb
