#include "wb/transfer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "wb/error.hpp"

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

// Position of a standalone keyword outside braces and parentheses.
std::size_t find_word(std::string_view s, std::string_view word)
{
    int depth = 0;
    for (std::size_t i = 0; i + word.size() <= s.size(); ++i) {
        char c = s[i];
        if (c == '(' || c == '{') ++depth;
        else if (c == ')' || c == '}') --depth;
        else if (depth == 0 && s.compare(i, word.size(), word) == 0 &&
                 (i == 0 || std::isspace(static_cast<unsigned char>(s[i - 1]))) &&
                 (i + word.size() == s.size() || std::isspace(static_cast<unsigned char>(s[i + word.size()]))))
            return i;
    }
    return std::string_view::npos;
}

std::int64_t to_int(std::string_view s)
{
    s = trim(s);
    std::int64_t v = 0;
    std::size_t used = 0;
    try {
        v = std::stoll(std::string(s), &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw SyntaxError("expected an integer, got '" + std::string(s) + "'", 0);
    return v;
}

std::string join(const std::vector<std::string>& parts, const char* sep = ", ")
{
    std::string s;
    for (std::size_t i = 0; i < parts.size(); ++i)
        s += (i ? sep : "") + parts[i];
    return s;
}

template <class T, class F>
std::string tail_list(const std::vector<T>& v, F fmt, std::size_t keep = 6)
{
    std::vector<std::string> parts;
    for (std::size_t i = v.size() > keep ? v.size() - keep : 0; i < v.size(); ++i)
        parts.push_back(fmt(v[i]));
    return "[" + join(parts) + "]";
}

std::string point_text(const FieldDesc& fd, const Assignment& a, const std::vector<VarDecl>& vars)
{
    std::vector<std::string> parts;
    for (auto& v : vars)
        if (auto it = a.find(v.name); it != a.end()) parts.push_back(v.name + "=" + format_value(fd, it->second));
    return join(parts);
}

std::int64_t lambda_norm(const Assignment& a, const std::vector<std::string>& lambda)
{
    std::int64_t n = 0;
    for (auto& name : lambda) {
        std::int64_t z = std::get<std::int64_t>(a.at(name));
        n += z < 0 ? -z : z;
    }
    return n;
}

mpq_class q_power(int p, std::int64_t e)
{
    mpz_class n;
    mpz_ui_pow_ui(n.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? mpq_class(mpz_class(1), n) : mpq_class(n);
}

// Smallest integer e with |v| <= p^e, and log_p |v|; v nonzero.
std::pair<std::int64_t, double> level_of(int p, const Cyclo& v)
{
    double lg = std::log(v.abs()) / std::log(static_cast<double>(p));
    if (v.is_rational()) {
        mpq_class m = abs(v.rational());
        std::int64_t e = static_cast<std::int64_t>(std::floor(lg)) - 1;
        while (m > q_power(p, e))
            ++e;
        while (m <= q_power(p, e - 1))
            --e;
        return {e, lg};
    }
    return {static_cast<std::int64_t>(std::ceil(lg - 1e-9)), lg};
}

struct Decision {
    Truth verdict = Truth::Unknown;
    std::vector<std::string> evidence;
};

Decision decide_integrable(const FieldDesc& fd, const StatementSpec& s, const IntegrationOptions& o)
{
    auto v = check_integrable(fd, s.function, s.domain.get(), s.over, {}, o);
    Decision d;
    d.verdict = v.kind == IntegrabilityKind::LikelyIntegrable ? Truth::True
                : v.kind == IntegrabilityKind::LikelyDivergent ? Truth::False
                                                               : Truth::Unknown;
    d.evidence.push_back(std::string(integrability_name(v.kind)));
    d.evidence.push_back("partial sums " + tail_list(v.partial_sums, format_double));
    for (auto* dir : {&v.upper, &v.lower})
        d.evidence.push_back(dir->direction + " " + std::string(integrability_name(dir->kind)) + " ratios " +
                             tail_list(dir->ratios, format_double));
    if (v.unknown_cells) d.evidence.push_back(std::to_string(v.unknown_cells) + " unknown cells");
    return d;
}

Decision decide_bounded(const FieldDesc& fd, const StatementSpec& s, const IntegrationOptions& o)
{
    auto r = check_bounded(fd, s.function, s.domain.get(), s.over, {}, o);
    Decision d;
    d.verdict = r.unbounded_suspected ? Truth::False : r.unknown_cells ? Truth::Unknown : Truth::True;
    d.evidence.push_back("sup " + r.sup.to_string());
    auto fmt = [](const std::pair<std::int64_t, Magnitude>& m) {
        return std::to_string(m.first) + ":" + m.second.to_string();
    };
    d.evidence.push_back("upper maxima " + tail_list(r.upper_maxima, fmt));
    d.evidence.push_back("lower maxima " + tail_list(r.lower_maxima, fmt));
    if (r.unknown_cells) d.evidence.push_back(std::to_string(r.unknown_cells) + " unknown cells");
    return d;
}

Decision decide_bound(const FieldDesc& fd, const StatementSpec& s, const IntegrationOptions& o)
{
    std::vector<std::string> lambda;
    for (auto& v : s.over)
        if (v.sort == Sort::ZZ) lambda.push_back(v.name);
    Decision d;
    std::int64_t unknown = 0, checked = 0;
    std::optional<std::string> violation;
    double worst = -INFINITY;
    scan_cells(fd, s.function, s.domain.get(), s.over, {}, o, [&](const CellVisit& c) {
        if (violation || c.member == Truth::False) return;
        if (c.member == Truth::Unknown || !c.value) {
            ++unknown;
            return;
        }
        ++checked;
        if (c.value->is_zero()) return;
        std::int64_t e = s.a + s.b * lambda_norm(c.point, lambda);
        auto [lvl, lg] = level_of(fd.p, *c.value);
        worst = std::max(worst, lg - static_cast<double>(e));
        if (lvl > e)
            violation = "at " + point_text(fd, c.point, s.over) + ": log_p|f| = " + format_double(lg) +
                        " exceeds " + std::to_string(e);
    });
    d.evidence.push_back(std::to_string(checked) + " cells checked");
    if (violation) {
        d.verdict = Truth::False;
        d.evidence.push_back(*violation);
        return d;
    }
    if (std::isfinite(worst)) d.evidence.push_back("max log_p|f| - (a + b|lambda|) = " + format_double(worst));
    if (unknown) d.evidence.push_back(std::to_string(unknown) + " unknown cells");
    d.verdict = unknown ? Truth::Unknown : Truth::True;
    return d;
}

Decision decide_formula(const FieldDesc& fd, const StatementSpec& s, const IntegrationOptions& o)
{
    Diagnostics diag;
    auto r = eval_formula_detailed(fd, o.eval_box, {}, *s.formula, &diag);
    Decision d;
    d.verdict = r.verdict;
    for (auto& [name, v] : r.witnesses)
        d.evidence.push_back("witness " + name + "=" + format_value(fd, v));
    for (auto& n : diag.notes)
        d.evidence.push_back(n);
    return d;
}

Decision decide(const FieldDesc& fd, const StatementSpec& s, const IntegrationOptions& o)
{
    switch (s.kind) {
    case StatementKind::Integrability: return decide_integrable(fd, s, o);
    case StatementKind::Boundedness: return decide_bounded(fd, s, o);
    case StatementKind::BoundWithExponents: return decide_bound(fd, s, o);
    case StatementKind::FormulaTruth: break;
    }
    return decide_formula(fd, s, o);
}

} // namespace

std::string_view statement_kind_name(StatementKind k)
{
    switch (k) {
    case StatementKind::Integrability: return "integrability";
    case StatementKind::Boundedness: return "boundedness";
    case StatementKind::BoundWithExponents: return "bound";
    case StatementKind::FormulaTruth: break;
    }
    return "formula";
}

bool StatementSpec::uses_character() const
{
    return kind != StatementKind::FormulaTruth && std::holds_alternative<MotivicExpFunction>(function);
}

StatementSpec parse_statement(const ModelFile& file, const std::string& name, std::string_view text)
{
    StatementSpec s;
    s.name = name;
    s.text = std::string(trim(text));
    if (!file.twists.empty()) s.twists = file.twists;
    std::string_view t = trim(text);
    std::size_t sp = 0;
    while (sp < t.size() && !std::isspace(static_cast<unsigned char>(t[sp])) && t[sp] != '(')
        ++sp;
    std::string_view head = t.substr(0, sp);
    std::string_view rest = t.substr(sp);
    if (head == "formula") {
        s.kind = StatementKind::FormulaTruth;
        s.formula = parse_formula(trim(rest), file.env());
        auto sig = typecheck(*s.formula);
        if (!sig.vars.empty()) throw DomainError("statement " + name + ": formula has free variable " + sig.vars[0].name);
        return s;
    }
    if (head == "integrable") s.kind = StatementKind::Integrability;
    else if (head == "bounded") s.kind = StatementKind::Boundedness;
    else if (head == "bound") {
        s.kind = StatementKind::BoundWithExponents;
        rest = trim(rest);
        std::size_t close = rest.find(')');
        if (rest.empty() || rest.front() != '(' || close == std::string_view::npos)
            throw SyntaxError("statement " + name + ": expected bound(a, b)", 0);
        std::string_view args = rest.substr(1, close - 1);
        std::size_t comma = args.find(',');
        if (comma == std::string_view::npos) throw SyntaxError("statement " + name + ": expected bound(a, b)", 0);
        s.a = to_int(args.substr(0, comma));
        s.b = to_int(args.substr(comma + 1));
        rest = rest.substr(close + 1);
    } else {
        throw SyntaxError("statement " + name + ": unknown kind '" + std::string(head) + "'", 0);
    }
    rest = trim(rest);
    std::size_t over = find_word(rest, "over");
    if (over == std::string_view::npos) throw SyntaxError("statement " + name + ": expected 'over'", 0);
    s.function_name = std::string(trim(rest.substr(0, over)));
    if (auto* m = file.find_motivic(s.function_name)) s.function = *m;
    else if (auto* e = file.find_exp(s.function_name)) s.function = *e;
    else throw DomainError("statement " + name + ": unknown function '" + s.function_name + "'");
    rest = rest.substr(over + 4);
    std::size_t on = find_word(rest, "on");
    std::string_view list = trim(rest.substr(0, on));
    std::size_t start = 0;
    while (start <= list.size()) {
        std::size_t comma = std::min(list.find(',', start), list.size());
        std::string v(trim(list.substr(start, comma - start)));
        auto it = std::find_if(file.vars.begin(), file.vars.end(), [&](const VarDecl& d) { return d.name == v; });
        if (it == file.vars.end()) throw DomainError("statement " + name + ": undeclared variable '" + v + "'");
        s.over.push_back(*it);
        start = comma + 1;
    }
    bool has_zz = std::any_of(s.over.begin(), s.over.end(), [](const VarDecl& v) { return v.sort == Sort::ZZ; });
    if (s.kind == StatementKind::BoundWithExponents && !has_zz)
        throw DomainError("statement " + name + ": a bound needs at least one ZZ variable");
    if (on != std::string_view::npos) s.domain = resolve_domain(file, trim(rest.substr(on + 2)), s.over);
    return s;
}

std::vector<StatementSpec> load_statements(const ModelFile& file)
{
    std::vector<StatementSpec> out;
    for (auto& [name, text] : file.statements)
        out.push_back(parse_statement(file, name, text));
    return out;
}

TransferReport transfer_experiment(const StatementSpec& s, const std::vector<int>& primes, const TransferOptions& opts)
{
    if (primes.empty()) throw DomainError("no primes given");
    if (s.twists.empty()) throw DomainError("no twists given");
    std::vector<int> ps = primes;
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
    std::vector<std::int64_t> twists = s.twists;
    std::sort(twists.begin(), twists.end());
    twists.erase(std::unique(twists.begin(), twists.end()), twists.end());
    for (int p : ps) {
        if (p < 3 || !is_prime(p)) throw DomainError("prime " + std::to_string(p) + " must be a prime >= 3");
        for (auto t : twists)
            if (((t % p) + p) % p == 0)
                throw DomainError("twist " + std::to_string(t) + " is not a unit modulo " + std::to_string(p));
    }

    TransferReport r;
    r.statement = s.name;
    r.kind = s.kind;
    r.notes.push_back("residue fields are F_p only; extensions F_q with q = p^r are not compared");
    if (!s.uses_character() && twists.size() > 1)
        r.notes.push_back("the statement has no character; one evaluation per field serves every twist");
    for (int p : ps) {
        std::optional<Decision> shared_qp, shared_fpt;
        for (auto t : twists) {
            IntegrationOptions o = opts.box;
            o.twist = t;
            TransferRow row;
            row.p = p;
            row.twist = t;
            FieldDesc qp{Family::Qp, p, opts.precision}, fpt{Family::FpT, p, opts.precision};
            Decision a, b;
            if (s.uses_character() || !shared_qp) {
                a = decide(qp, s, o);
                b = decide(fpt, s, o);
                if (!s.uses_character()) {
                    shared_qp = a;
                    shared_fpt = b;
                }
            } else {
                a = *shared_qp;
                b = *shared_fpt;
            }
            row.qp = a.verdict;
            row.fpt = b.verdict;
            row.qp_evidence = std::move(a.evidence);
            row.fpt_evidence = std::move(b.evidence);
            if (row.qp != Truth::Unknown && row.fpt != Truth::Unknown) row.agree = row.qp == row.fpt;
            else ++r.indefinite;
            r.rows.push_back(std::move(row));
        }
    }
    std::optional<int> last_bad;
    bool any_definite = false;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        if (!r.rows[i].agree) continue;
        any_definite = true;
        if (!*r.rows[i].agree) {
            r.disagreements.push_back(i);
            last_bad = r.rows[i].p;
        }
    }
    r.uninformative = !any_definite;
    if (r.uninformative) r.notes.push_back("every row has an indefinite verdict; the report is uninformative");
    else if (!last_bad) r.agreement_from = ps.front();
    else if (auto it = std::upper_bound(ps.begin(), ps.end(), *last_bad); it != ps.end()) r.agreement_from = *it;
    if (r.indefinite && !r.uninformative)
        r.notes.push_back(std::to_string(r.indefinite) + " rows with an indefinite verdict are left out of the comparison");
    return r;
}

std::string transfer_csv(const TransferReport& r)
{
    std::ostringstream out;
    out << "p,twist,qp,fpt,agree\n";
    for (auto& row : r.rows)
        out << row.p << ',' << row.twist << ',' << truth_name(row.qp) << ',' << truth_name(row.fpt) << ','
            << (row.agree ? (*row.agree ? "yes" : "no") : "n/a") << '\n';
    return out.str();
}

BoundFit uniform_bound_fit(const Integrand& f, const Formula* domain, const std::vector<VarDecl>& vars,
                           const std::vector<std::string>& lambda, const std::vector<FieldDesc>& fields,
                           const std::vector<IntegrationOptions>& windows, std::int64_t b_cap)
{
    if (windows.size() < 2) throw DomainError("a bound fit needs at least two nested windows");
    if (fields.empty()) throw DomainError("no fields given");
    for (auto& l : lambda) {
        auto it = std::find_if(vars.begin(), vars.end(), [&](const VarDecl& v) { return v.name == l; });
        if (it == vars.end() || it->sort != Sort::ZZ) throw DomainError("'" + l + "' is not a ZZ coordinate");
    }
    struct Sample {
        std::int64_t norm, level;
        double lg;
        std::string where, key;
    };
    // samples[field][window]
    std::vector<std::vector<std::vector<Sample>>> samples(fields.size());
    BoundFit out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        auto& fd = fields[i];
        for (auto& w : windows) {
            auto& bucket = samples[i].emplace_back();
            std::int64_t unknown = 0;
            scan_cells(fd, f, domain, vars, {}, w, [&](const CellVisit& c) {
                if (c.member == Truth::False) return;
                if (c.member == Truth::Unknown || !c.value) {
                    ++unknown;
                    return;
                }
                if (c.value->is_zero()) return;
                auto [lvl, lg] = level_of(fd.p, *c.value);
                std::string key;
                for (auto& l : lambda)
                    key += std::to_string(std::get<std::int64_t>(c.point.at(l))) + ",";
                bucket.push_back({lambda_norm(c.point, lambda), lvl, lg, fd.name() + " " + point_text(fd, c.point, vars),
                                  key});
            });
            out.samples += bucket.size();
            if (unknown)
                out.notes.push_back(fd.name() + ": " + std::to_string(unknown) + " unknown cells left out");
        }
    }

    // Hypothesis: at fixed lambda the supremum over w must not keep growing.
    for (std::size_t i = 0; i < fields.size(); ++i) {
        std::map<std::string, std::vector<double>> sup;
        for (std::size_t k = 0; k < windows.size(); ++k) {
            std::map<std::string, double> m;
            for (auto& s : samples[i][k])
                m[s.key] = m.count(s.key) ? std::max(m[s.key], s.lg) : s.lg;
            for (auto& [key, v] : m)
                if (sup[key].size() == k) sup[key].push_back(v);
        }
        for (auto& [key, seq] : sup) {
            if (seq.size() != windows.size()) continue;
            bool growing = true;
            for (std::size_t k = 1; k < seq.size(); ++k)
                growing &= seq[k] > seq[k - 1] + 1e-9;
            double first = seq[1] - seq[0], last = seq.back() - seq[seq.size() - 2];
            if (growing && last >= first - 1e-9 && last >= 0.5) {
                out.hypothesis_ok = false;
                std::vector<std::string> parts;
                for (double v : seq)
                    parts.push_back(format_double(v));
                std::string at = key.empty() ? "" : " at lambda = (" + key.substr(0, key.size() - 1) + ")";
                out.notes.push_back(fields[i].name() + at + ": sup of log_p|f| over w grows across windows: " +
                                    join(parts));
                return out;
            }
        }
    }

    auto a_of = [&](std::size_t k, std::int64_t b) {
        std::optional<std::int64_t> a;
        for (auto& per_field : samples)
            for (auto& s : per_field[k]) {
                std::int64_t v = s.level - b * s.norm;
                a = a ? std::max(*a, v) : v;
            }
        return a;
    };
    std::size_t K = windows.size();
    if (!a_of(K - 1, 0)) {
        out.notes.push_back("f vanishes on every window");
        out.a = 0;
        out.b = 0;
        return out;
    }
    for (std::int64_t b = 0; b <= b_cap; ++b) {
        auto big = a_of(K - 1, b), small = a_of(K - 2, b);
        if (!small || big != small) continue;
        out.a = *big;
        out.b = b;
        out.max_slack = -INFINITY;
        for (auto& per_field : samples)
            for (auto& s : per_field[K - 1]) {
                double slack = s.lg - static_cast<double>(*out.a + b * s.norm);
                if (slack > out.max_slack) {
                    out.max_slack = slack;
                    out.argmax = s.where;
                }
            }
        return out;
    }
    out.notes.push_back("no b <= " + std::to_string(b_cap) + " gives a maximum a that is stable across windows");
    return out;
}

} // namespace wb
