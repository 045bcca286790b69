#include "wb/cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wb/error.hpp"
#include "wb/eval.hpp"
#include "wb/integrate.hpp"
#include "wb/model_file.hpp"
#include "wb/transfer.hpp"
#include "wb/zsums.hpp"

namespace wb {

namespace {

using Json = nlohmann::ordered_json;

class InputError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "input"; }
};

struct Options {
    // shared
    bool timing = false;
    std::string output;
    std::string format = "json";
    std::string field;
    std::string file;
    std::string name;
    std::string assign;
    std::string box;
    std::int64_t budget = -1;
    // parse
    std::string kind = "auto";
    // eval / enumerate
    std::string formula;
    std::string model;
    std::string function;
    // integrate / bound
    std::string domain;
    std::string over;
    int depth = -1;
    std::string vrange;
    std::string zwindow;
    std::int64_t twist = 1;
    std::string lambda;
    std::string fields = "Qp:5,FpT:5";
    std::string windows;
    // transfer
    std::string primes = "5,7,11,13";
    std::string statement;
    std::string twists;
    std::string csv;
    int precision = kDefaultPrecision;
    // zsum
    std::vector<std::string> sums;
    std::string eval_at;
    bool bound = false;
    std::int64_t q0 = 2;
    std::int64_t window = 20;
    std::int64_t t_cap = 1024;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> split(std::string_view s, std::string_view seps)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (seps.find(c) != std::string_view::npos) {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::int64_t to_int(const std::string& s, const char* what)
{
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) throw InputError(std::string("bad ") + what + " '" + s + "'");
    return v;
}

std::vector<std::int64_t> int_list(const std::string& s, const char* what)
{
    std::vector<std::int64_t> out;
    for (auto& part : split(s, ", "))
        out.push_back(to_int(part, what));
    if (out.empty()) throw InputError(std::string("empty ") + what + " list");
    return out;
}

std::pair<std::int64_t, std::int64_t> range(const std::string& s, const char* what)
{
    auto colon = s.find(':', 1);
    if (colon == std::string::npos) throw InputError(std::string(what) + " must be written lo:hi");
    return {to_int(s.substr(0, colon), what), to_int(s.substr(colon + 1), what)};
}

Json box_json(const SearchBox& b)
{
    return {{"vmin", b.vmin}, {"vmax", b.vmax}, {"depth", b.depth}, {"zmin", b.zmin}, {"zmax", b.zmax}};
}

Json options_json(const IntegrationOptions& o)
{
    return {{"vmin", o.vmin},         {"vmax", o.vmax},       {"depth", o.depth},
            {"zmin", o.zmin},         {"zmax", o.zmax},       {"budget", effective_budget(o)},
            {"tail_k", o.tail_k},     {"tail_eps", o.tail_eps}, {"tail_rmax", o.tail_rmax},
            {"twist", o.twist},       {"eval_box", box_json(o.eval_box)}};
}

Json vars_json(const std::vector<VarDecl>& vars)
{
    Json a = Json::array();
    for (auto& v : vars)
        a.push_back({{"name", v.name}, {"sort", sort_name(v.sort)}});
    return a;
}

Json num_json(const Num& n)
{
    auto z = n.to_complex();
    return {{"text", n.to_string()}, {"exact", n.exact}, {"re", z.real()}, {"im", z.imag()}};
}

Json strings(const std::vector<std::string>& v) { return Json(v); }

SearchBox box_of(const Options& o)
{
    return o.box.empty() ? SearchBox{} : parse_box_spec(o.box);
}

IntegrationOptions integration_options(const Options& o)
{
    IntegrationOptions io;
    if (!o.box.empty()) io.eval_box = parse_box_spec(o.box);
    if (o.depth >= 0) io.depth = o.depth;
    if (!o.vrange.empty()) std::tie(io.vmin, io.vmax) = range(o.vrange, "--vrange");
    if (!o.zwindow.empty()) std::tie(io.zmin, io.zmax) = range(o.zwindow, "--zwindow");
    if (o.budget >= 0) io.budget = o.budget;
    io.twist = o.twist;
    return io;
}

const FormulaPtr& pick_formula(const FormulaFile& ff, const std::string& name, std::string& chosen)
{
    if (!name.empty()) {
        auto* f = ff.find(name);
        if (!f) throw InputError("no formula named '" + name + "'");
        chosen = name;
        return *f;
    }
    if (ff.formulas.size() != 1)
        throw InputError("the file holds " + std::to_string(ff.formulas.size()) + " formulas; pick one with --name");
    chosen = ff.formulas[0].first;
    return ff.formulas[0].second;
}

Integrand pick_function(const ModelFile& m, const std::string& name, std::string& chosen)
{
    if (!name.empty()) {
        chosen = name;
        if (auto* f = m.find_motivic(name)) return *f;
        if (auto* e = m.find_exp(name)) return *e;
        throw InputError("no function named '" + name + "'");
    }
    if (m.motivic.size() + m.exps.size() != 1) throw InputError("the file holds several functions; pick one with --function");
    if (!m.motivic.empty()) {
        chosen = m.motivic[0].name;
        return m.motivic[0];
    }
    chosen = m.exps[0].name;
    return m.exps[0];
}

std::vector<VarDecl> pick_vars(const ModelFile& m, const Integrand& f, const std::string& over)
{
    auto all = std::visit([&](const auto& g) { return function_vars(m, g); }, f);
    if (over.empty()) return all;
    std::vector<VarDecl> out;
    for (auto& name : split(over, ", ")) {
        auto it = std::find_if(m.vars.begin(), m.vars.end(), [&](const VarDecl& v) { return v.name == name; });
        if (it == m.vars.end()) throw InputError("undeclared variable '" + name + "'");
        out.push_back(*it);
    }
    return out;
}

// ---------------------------------------------------------------------------

struct Outcome {
    Json config = Json::object();
    Json result = Json::object();
    std::string text; ///< replaces the JSON envelope when set
    int exit = 0;
};

Outcome cmd_parse(const Options& o)
{
    Outcome r;
    std::string text = read_file(o.file);
    std::string kind = o.kind;
    if (kind == "auto") {
        bool model = o.file.size() > 4 &&
                     (o.file.ends_with(".mot") || o.file.ends_with(".stmt") || o.file.ends_with(".model"));
        kind = model ? "model" : "formula";
    }
    r.config = {{"file", o.file}, {"kind", kind}};
    if (kind == "formula") {
        auto ff = parse_formula_file(text);
        Json fs = Json::array();
        for (auto& [name, f] : ff.formulas)
            fs.push_back({{"name", name}, {"text", format(*f)}, {"free", vars_json(typecheck(*f).vars)}});
        r.result = {{"kind", "formula"}, {"vars", vars_json(ff.vars)}, {"formulas", fs}};
        return r;
    }
    if (kind != "model") throw InputError("--kind must be formula, model or auto");
    auto m = parse_model_file(text);
    Json doms = Json::array(), mot = Json::array(), exps = Json::array(), st = Json::array();
    for (auto& [name, f] : m.domains)
        doms.push_back({{"name", name}, {"text", format(*f)}});
    for (auto& f : m.motivic)
        mot.push_back({{"name", f.name}, {"terms", f.terms.size()}, {"vars", vars_json(function_vars(m, f))}});
    for (auto& f : m.exps)
        exps.push_back({{"name", f.name}, {"terms", f.terms.size()}, {"vars", vars_json(function_vars(m, f))}});
    for (auto& s : load_statements(m))
        st.push_back({{"name", s.name}, {"kind", statement_kind_name(s.kind)}, {"text", s.text}});
    r.result = {{"kind", "model"},  {"vars", vars_json(m.vars)}, {"domains", doms}, {"motivic", mot},
                {"exp", exps},      {"statements", st},          {"twists", m.twists}};
    return r;
}

Outcome cmd_eval(const Options& o)
{
    Outcome r;
    FieldDesc fd = parse_field_spec(o.field);
    SearchBox box = box_of(o);
    validate(fd, box);
    r.config = {{"field", fd.name()}, {"box", box_json(box)}, {"assign", o.assign}};
    if (!o.model.empty()) {
        auto m = parse_model_file(read_file(o.model));
        std::string chosen;
        Integrand f = pick_function(m, o.function, chosen);
        Assignment a = parse_assignment(o.assign, fd, m.env());
        r.config["model"] = o.model;
        r.config["function"] = chosen;
        r.config["twist"] = o.twist;
        Cyclo v = eval_integrand(fd, box, f, a, o.twist);
        r.result = {{"function", chosen}, {"field", fd.name()}, {"value", num_json(Num::of(v))}};
        return r;
    }
    if (o.formula.empty()) throw InputError("eval needs --formula or --model");
    auto ff = parse_formula_file(read_file(o.formula));
    std::string chosen;
    const FormulaPtr& f = pick_formula(ff, o.name, chosen);
    Assignment a = parse_assignment(o.assign, fd, ff.env());
    r.config["formula_file"] = o.formula;
    r.config["formula"] = chosen;
    Diagnostics diag;
    auto res = eval_formula_detailed(fd, box, a, *f, &diag);
    Json w = Json::array();
    for (auto& [name, v] : res.witnesses)
        w.push_back({{"var", name}, {"value", format_value(fd, v)}});
    r.result = {{"formula", chosen},          {"text", format(*f)}, {"field", fd.name()},
                {"box", box_json(box)},       {"verdict", truth_name(res.verdict)},
                {"witnesses", w},             {"notes", strings(diag.notes)}};
    if (res.verdict == Truth::Unknown) r.exit = 3;
    return r;
}

Outcome cmd_enumerate(const Options& o)
{
    Outcome r;
    FieldDesc fd = parse_field_spec(o.field);
    SearchBox box = box_of(o);
    validate(fd, box);
    auto ff = parse_formula_file(read_file(o.formula));
    std::string chosen;
    const FormulaPtr& f = pick_formula(ff, o.name, chosen);
    Assignment a = parse_assignment(o.assign, fd, ff.env());
    std::int64_t budget = o.budget >= 0 ? o.budget : kDefaultEnumerationBudget;
    r.config = {{"field", fd.name()}, {"box", box_json(box)},  {"formula_file", o.formula},
                {"formula", chosen},  {"assign", o.assign},    {"budget", budget}};
    auto res = enumerate_set(fd, box, *f, a, budget);
    auto tuples = [&](const std::vector<std::vector<Value>>& ts) {
        Json arr = Json::array();
        for (auto& t : ts) {
            Json row = Json::array();
            for (auto& v : t)
                row.push_back(format_value(fd, v));
            arr.push_back(row);
        }
        return arr;
    };
    r.result = {{"formula", chosen},
                {"vars", vars_json(res.vars)},
                {"true_count", res.true_tuples.size()},
                {"unknown_count", res.unknown_tuples.size()},
                {"true", tuples(res.true_tuples)},
                {"unknown", tuples(res.unknown_tuples)}};
    return r;
}

Json tail_json(const std::optional<TailInfo>& t)
{
    if (!t) return nullptr;
    return {{"status", tail_status_name(t->status)}, {"order", t->order}, {"ratio", t->ratio}, {"extra", num_json(t->extra)}};
}

Outcome cmd_integrate(const Options& o)
{
    Outcome r;
    FieldDesc fd = parse_field_spec(o.field);
    IntegrationOptions io = integration_options(o);
    validate(fd, io);
    auto m = parse_model_file(read_file(o.file));
    std::string chosen;
    Integrand f = pick_function(m, o.function, chosen);
    auto vars = pick_vars(m, f, o.over);
    Assignment base = parse_assignment(o.assign, fd, m.env());
    FormulaPtr domain;
    if (!o.domain.empty()) domain = resolve_domain(m, o.domain, vars);
    r.config = {{"field", fd.name()},    {"file", o.file},         {"function", chosen},
                {"domain", o.domain},    {"over", vars_json(vars)}, {"assign", o.assign},
                {"options", options_json(io)}};
    auto res = integrate(fd, f, domain.get(), vars, base, io);
    Json slices = Json::array();
    for (auto& [k, v] : res.slices)
        slices.push_back({{"index", k}, {"value", num_json(v)}});
    r.result = {{"value", num_json(res.value)},
                {"status", tail_status_name(res.status)},
                {"upper_tail", tail_json(res.upper_tail)},
                {"lower_tail", tail_json(res.lower_tail)},
                {"cells", res.cells},
                {"unknown_cells", res.unknown_cells},
                {"unknown_mass", res.unknown_mass},
                {"slices", slices},
                {"notes", strings(res.notes)}};
    if (res.status != TailStatus::ResolvedGeometric || res.unknown_cells > 0) r.exit = 3;
    return r;
}

Json report_json(const TransferReport& rep)
{
    auto row_json = [](const TransferRow& row) {
        return Json{{"p", row.p},
                    {"twist", row.twist},
                    {"qp", truth_name(row.qp)},
                    {"fpt", truth_name(row.fpt)},
                    {"agree", row.agree ? Json(*row.agree) : Json(nullptr)},
                    {"qp_evidence", row.qp_evidence},
                    {"fpt_evidence", row.fpt_evidence}};
    };
    Json rows = Json::array(), dis = Json::array();
    for (auto& row : rep.rows)
        rows.push_back(row_json(row));
    for (auto i : rep.disagreements)
        dis.push_back(row_json(rep.rows[i]));
    return {{"statement", rep.statement},
            {"kind", statement_kind_name(rep.kind)},
            {"rows", rows},
            {"agreement_from", rep.agreement_from ? Json(*rep.agreement_from) : Json(nullptr)},
            {"disagreements", dis},
            {"indefinite", rep.indefinite},
            {"uninformative", rep.uninformative},
            {"notes", rep.notes}};
}

Outcome cmd_transfer(const Options& o)
{
    Outcome r;
    auto m = parse_model_file(read_file(o.file));
    std::vector<int> primes;
    for (auto p : int_list(o.primes, "prime"))
        primes.push_back(static_cast<int>(p));
    TransferOptions to;
    to.box = integration_options(o);
    to.precision = o.precision;
    auto stmts = load_statements(m);
    if (!o.statement.empty()) {
        std::erase_if(stmts, [&](const StatementSpec& s) { return s.name != o.statement; });
        if (stmts.empty()) throw InputError("no statement named '" + o.statement + "'");
    }
    if (stmts.empty()) throw InputError("the file holds no statements");
    if (!o.twists.empty())
        for (auto& s : stmts)
            s.twists = int_list(o.twists, "twist");
    r.config = {{"file", o.file},
                {"primes", primes},
                {"statement", o.statement},
                {"twists", stmts[0].twists},
                {"precision", to.precision},
                {"options", options_json(to.box)}};
    r.config["options"].erase("twist");
    Json reports = Json::array();
    std::string csv = "statement,p,twist,qp,fpt,agree\n";
    bool informative = false;
    for (auto& s : stmts) {
        auto rep = transfer_experiment(s, primes, to);
        informative |= !rep.uninformative;
        reports.push_back(report_json(rep));
        auto matrix = transfer_csv(rep);
        std::istringstream lines(matrix);
        std::string line;
        std::getline(lines, line);
        while (std::getline(lines, line))
            csv += s.name + "," + line + "\n";
    }
    r.result = {{"reports", reports}};
    if (!o.csv.empty()) {
        std::ofstream f(o.csv, std::ios::binary);
        if (!f) throw InputError("cannot write '" + o.csv + "'");
        f << csv;
    }
    if (o.format == "csv") r.text = csv;
    if (!informative) r.exit = 3;
    return r;
}

std::vector<IntegrationOptions> parse_windows(const Options& o)
{
    std::vector<IntegrationOptions> out;
    int depth = o.depth >= 0 ? o.depth : 1;
    if (o.windows.empty()) {
        for (int k = 1; k <= 3; ++k) {
            IntegrationOptions w;
            w.vmin = 0;
            w.vmax = 4 * k;
            w.depth = depth;
            w.zmin = -10 * k;
            w.zmax = 10 * k;
            out.push_back(w);
        }
        return out;
    }
    for (auto& spec : split(o.windows, ";")) {
        SearchBox b = parse_box_spec(spec);
        IntegrationOptions w;
        w.vmin = b.vmin;
        w.vmax = b.vmax;
        w.depth = spec.find("depth") == std::string::npos ? depth : b.depth;
        w.zmin = b.zmin;
        w.zmax = b.zmax;
        out.push_back(w);
    }
    return out;
}

Outcome cmd_bound(const Options& o)
{
    Outcome r;
    auto m = parse_model_file(read_file(o.file));
    std::string chosen;
    Integrand f = pick_function(m, o.function, chosen);
    auto vars = pick_vars(m, f, o.over);
    std::vector<std::string> lambda = o.lambda.empty() ? std::vector<std::string>{} : split(o.lambda, ", ");
    if (o.lambda.empty())
        for (auto& v : vars)
            if (v.sort == Sort::ZZ) lambda.push_back(v.name);
    std::vector<FieldDesc> fields;
    for (auto& s : split(o.fields, ","))
        fields.push_back(parse_field_spec(s));
    auto windows = parse_windows(o);
    for (auto& fd : fields)
        for (auto& w : windows)
            validate(fd, w);
    FormulaPtr domain;
    if (!o.domain.empty()) domain = resolve_domain(m, o.domain, vars);
    Json fj = Json::array(), wj = Json::array();
    for (auto& fd : fields)
        fj.push_back(fd.name());
    for (auto& w : windows)
        wj.push_back({{"vmin", w.vmin}, {"vmax", w.vmax}, {"depth", w.depth}, {"zmin", w.zmin}, {"zmax", w.zmax}});
    r.config = {{"file", o.file},   {"function", chosen}, {"domain", o.domain}, {"over", vars_json(vars)},
                {"lambda", lambda}, {"fields", fj},        {"windows", wj}};
    auto fit = uniform_bound_fit(f, domain.get(), vars, lambda, fields, windows);
    r.result = {{"hypothesis_ok", fit.hypothesis_ok},
                {"a", fit.a ? Json(*fit.a) : Json(nullptr)},
                {"b", fit.b ? Json(*fit.b) : Json(nullptr)},
                {"max_slack", fit.b ? Json(fit.max_slack) : Json(nullptr)},
                {"argmax", fit.argmax},
                {"samples", fit.samples},
                {"notes", fit.notes}};
    if (!fit.b) r.exit = 3;
    return r;
}

Json tsum_bound_json(const std::optional<TsumBound>& b)
{
    if (!b) return nullptr;
    Json tails = Json::array();
    for (auto& t : b->tails)
        tails.push_back({{"direction", t.direction},
                         {"slope", t.slope},
                         {"degree", t.degree},
                         {"b_needed", t.b_needed},
                         {"dominant", t.dominant},
                         {"lines", t.lines}});
    Json witness = nullptr;
    if (b->witness_a1.size() >= 2)
        witness = {{"q", b->witness_a1[0]},
                   {"lambda", std::vector<std::int64_t>(b->witness_a1.begin() + 1, b->witness_a1.end())}};
    return {{"a", b->a},
            {"b", b->b},
            {"certified", b->certified},
            {"minimal", b->minimal},
            {"q0", b->q0},
            {"threshold", b->threshold},
            {"witness_a_minus_1", witness},
            {"argument_b", b->argument_b},
            {"tails", tails},
            {"notes", b->notes}};
}

Outcome cmd_zsum(const Options& o)
{
    Outcome r;
    std::vector<std::string> texts = o.sums;
    if (!o.file.empty()) {
        std::istringstream in(read_file(o.file));
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r") != std::string::npos) texts.push_back(line);
        }
    }
    if (texts.empty()) throw InputError("zsum needs a file or --sum");
    BoundOptions bo;
    bo.q0 = o.q0;
    bo.window = o.window;
    bo.t_cap = o.t_cap;
    r.config = {{"file", o.file}, {"sums", o.sums}, {"eval", o.eval_at}, {"bound", o.bound},
                {"q0", bo.q0},    {"t_cap", bo.t_cap}, {"a_cap", bo.a_cap}, {"window", bo.window}};
    Json out = Json::array();
    for (auto& text : texts) {
        TermSum h = parse_termsum(text);
        Json j = {{"name", h.name}, {"text", h.to_string()}, {"vars", h.vars}};
        if (!o.eval_at.empty()) {
            std::map<std::string, std::string> kv;
            for (auto& part : split(o.eval_at, " ,")) {
                auto eq = part.find('=');
                if (eq == std::string::npos) throw InputError("--eval expects q=.. and one value per variable");
                kv[part.substr(0, eq)] = part.substr(eq + 1);
            }
            if (!kv.count("q")) throw InputError("--eval needs q=..");
            std::vector<std::int64_t> pt;
            for (auto& v : h.vars) {
                if (!kv.count(v)) throw InputError("--eval is missing a value for " + v);
                pt.push_back(to_int(kv[v], "coordinate"));
            }
            mpz_class q;
            if (q.set_str(kv["q"], 10) != 0) throw InputError("bad q '" + kv["q"] + "'");
            j["eval"] = {{"q", kv["q"]}, {"point", pt}, {"value", tsum_eval(h, q, pt).get_str()}};
        }
        if (o.bound) {
            auto b = tsum_bound(h, bo);
            if (!b) r.exit = 3;
            j["bound"] = tsum_bound_json(b);
        }
        out.push_back(j);
    }
    r.result = {{"sums", out}};
    return r;
}

void add_box_options(CLI::App* c, Options& o)
{
    c->add_option("--depth", o.depth, "digits fixed per cell");
    c->add_option("--vrange", o.vrange, "valuation window lo:hi");
    c->add_option("--zwindow", o.zwindow, "integer window lo:hi");
    c->add_option("--budget", o.budget, "cell budget");
    c->add_option("--box", o.box, "quantifier box, e.g. vmin=-2,vmax=4,depth=2");
}

int exit_code_of(const Error& e)
{
    std::string_view k = e.kind();
    if (k == "resource") return 2;
    if (k == "unresolved" || k == "precision") return 3;
    return 1;
}

void emit_error(std::ostream& err, const std::string& command, const char* kind, const std::string& message,
                std::optional<std::size_t> position = std::nullopt)
{
    Json e = {{"kind", kind}, {"message", message}};
    if (position) e["position"] = *position;
    Json j = {{"tool", "wb"}, {"version", kVersion}, {"command", command}, {"error", e}};
    err << j.dump() << "\n";
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Workbench for Denef-Pas formulas, motivic functions and their integrals over Q_p and F_p((t))",
                 "wb"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kVersion);
    app.add_flag("--timing", o.timing, "add wall time to the report");
    app.add_option("--output", o.output, "write the report to a file");

    auto* parse = app.add_subcommand("parse", "parse and sort-check a formula or model file");
    parse->add_option("file", o.file)->required();
    parse->add_option("--kind", o.kind, "formula, model or auto");

    auto* eval = app.add_subcommand("eval", "evaluate a formula or a function at a point");
    eval->add_option("--field", o.field, "field, e.g. Qp:5 or FpT:7:30")->required();
    eval->add_option("--formula", o.formula, "formula file");
    eval->add_option("--name", o.name, "formula name");
    eval->add_option("--model", o.model, "model file holding functions");
    eval->add_option("--function", o.function);
    eval->add_option("--twist", o.twist);
    eval->add_option("--assign", o.assign, "e.g. x=Qp(5){v=0;7},u=3");
    eval->add_option("--box", o.box, "quantifier box, e.g. vmin=-2,vmax=4,depth=2");

    auto* en = app.add_subcommand("enumerate", "list the tuples of a definable set in a box");
    en->add_option("--field", o.field)->required();
    en->add_option("--formula", o.formula)->required();
    en->add_option("--name", o.name);
    en->add_option("--assign", o.assign);
    en->add_option("--box", o.box);
    en->add_option("--budget", o.budget);

    auto* in = app.add_subcommand("integrate", "integrate a function against the product measure");
    in->add_option("file", o.file)->required();
    in->add_option("--field", o.field)->required();
    in->add_option("--function", o.function);
    in->add_option("--domain", o.domain, "domain name, O, O(x), or {formula}");
    in->add_option("--over", o.over, "integration variables, default all free variables");
    in->add_option("--assign", o.assign, "values of the remaining variables");
    in->add_option("--twist", o.twist);
    add_box_options(in, o);

    auto* tr = app.add_subcommand("transfer", "compare statement verdicts over Q_p and F_p((t))");
    tr->add_option("file", o.file)->required();
    tr->add_option("--primes", o.primes);
    tr->add_option("--statement", o.statement);
    tr->add_option("--twists", o.twists);
    tr->add_option("--precision", o.precision);
    tr->add_option("--format", o.format)->check(CLI::IsMember({"json", "csv"}));
    tr->add_option("--csv", o.csv, "also write the CSV matrix to this file");
    add_box_options(tr, o);

    auto* bd = app.add_subcommand("bound", "fit |f| <= p^(a + b|lambda|) on nested windows");
    bd->add_option("file", o.file)->required();
    bd->add_option("--function", o.function);
    bd->add_option("--domain", o.domain);
    bd->add_option("--over", o.over);
    bd->add_option("--lambda", o.lambda, "ZZ coordinates of lambda, default every ZZ variable");
    bd->add_option("--fields", o.fields);
    bd->add_option("--windows", o.windows, "';'-separated boxes, e.g. vmax=4,zmax=10;vmax=8,zmax=20");
    bd->add_option("--depth", o.depth);

    auto* zs = app.add_subcommand("zsum", "evaluate and bound sums of linear-times-q-power terms");
    zs->add_option("file", o.file);
    zs->add_option("--sum", o.sums, "a sum in text form");
    zs->add_option("--eval", o.eval_at, "e.g. \"q=5 L=2\"");
    zs->add_flag("--bound", o.bound);
    zs->add_option("--q0", o.q0);
    zs->add_option("--window", o.window);
    zs->add_option("--t-cap", o.t_cap);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    std::string command;
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error(err, "", "usage", e.what());
        return 1;
    }
    command = app.get_subcommands().front()->get_name();

    try {
        auto start = std::chrono::steady_clock::now();
        Outcome r;
        if (command == "parse") r = cmd_parse(o);
        else if (command == "eval") r = cmd_eval(o);
        else if (command == "enumerate") r = cmd_enumerate(o);
        else if (command == "integrate") r = cmd_integrate(o);
        else if (command == "transfer") r = cmd_transfer(o);
        else if (command == "bound") r = cmd_bound(o);
        else r = cmd_zsum(o);
        std::string text = r.text;
        if (text.empty()) {
            Json env = {{"tool", "wb"}, {"version", kVersion}, {"command", command}, {"config", r.config},
                        {"result", r.result}};
            if (o.timing)
                env["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            text = env.dump(2) + "\n";
        }
        if (o.output.empty()) {
            out << text;
        } else {
            std::ofstream f(o.output, std::ios::binary);
            if (!f) throw InputError("cannot write '" + o.output + "'");
            f << text;
        }
        return r.exit;
    } catch (const SyntaxError& e) {
        emit_error(err, command, e.kind(), e.what(), e.position());
        return 1;
    } catch (const Error& e) {
        emit_error(err, command, e.kind(), e.what());
        return exit_code_of(e);
    } catch (const std::exception& e) {
        emit_error(err, command, "internal", e.what());
        return 1;
    }
}

} // namespace wb
