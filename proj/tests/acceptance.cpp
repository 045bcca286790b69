// Acceptance run: one PASS/FAIL line per criterion, each with its time limit.
// Exit status 0 only when every criterion passes.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "closure_suite.hpp"
#include "formula_gen.hpp"
#include "pres_oracle.hpp"
#include "transfer_suite.hpp"
#include "wb/cli.hpp"
#include "wb/error.hpp"
#include "wb/eval.hpp"
#include "wb/model_file.hpp"
#include "wb/presburger.hpp"
#include "wb/zsums.hpp"

using namespace wb;

namespace {

const int kPrimes[] = {3, 5, 7, 11, 13};

FieldDesc qp(int p) { return {Family::Qp, p, kDefaultPrecision}; }
FieldDesc fpt(int p) { return {Family::FpT, p, kDefaultPrecision}; }

std::vector<FieldDesc> all_fields()
{
    std::vector<FieldDesc> out;
    for (int p : kPrimes)
        for (auto fd : {qp(p), fpt(p)})
            out.push_back(fd);
    return out;
}

std::string field_name(const FieldDesc& fd)
{
    return std::string(fd.family == Family::Qp ? "Qp:" : "FpT:") + std::to_string(fd.p);
}

// Collects the first few failure messages of a criterion.
struct Check {
    std::string summary;
    std::vector<std::string> failures;
    std::int64_t count = 0;

    void expect(bool ok, const std::function<std::string()>& what)
    {
        ++count;
        if (!ok && failures.size() < 5) failures.push_back(what());
        else if (!ok) failures.push_back("");
    }
};

VFElem random_elem(const FieldDesc& fd, std::mt19937_64& rng, std::int64_t vmin, std::int64_t vmax)
{
    VFElem x;
    x.v = std::uniform_int_distribution<std::int64_t>(vmin, vmax)(rng);
    x.digits.resize(static_cast<std::size_t>(fd.N));
    for (auto& d : x.digits)
        d = std::uniform_int_distribution<int>(0, fd.p - 1)(rng);
    x.digits[0] = std::uniform_int_distribution<int>(1, fd.p - 1)(rng);
    return x;
}

bool same_digits(const VFElem& a, const VFElem& b)
{
    if (a.exact_zero || b.exact_zero) return a.exact_zero == b.exact_zero;
    std::int64_t hi = std::min(a.abs_precision(), b.abs_precision());
    for (std::int64_t i = std::min(a.v, b.v); i < hi; ++i)
        if (vf_digit(a, i) != vf_digit(b, i)) return false;
    return true;
}

std::complex<double> e(double t) { return std::polar(1.0, 2 * M_PI * t); }

// Character value from the digit expansion, in floating point.
std::complex<double> character_oracle(const FieldDesc& fd, const VFElem& x)
{
    if (x.exact_zero) return 1;
    double t = 0;
    for (std::int64_t i = x.v; i <= 0; ++i) {
        int d = x.digits[static_cast<std::size_t>(i - x.v)];
        t += fd.family == Family::FpT ? d / double(fd.p) : d * std::pow(double(fd.p), double(i - 1));
    }
    return e(t - std::floor(t));
}

mpq_class pow_q(long p, std::int64_t k)
{
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k < 0 ? -k : k));
    return k < 0 ? mpq_class(mpz_class(1), r) : mpq_class(r);
}

// ---------------------------------------------------------------------------

const char* kIntegrands = R"(
    var x : VF
    motivic one { term { } }
    motivic qinv { term { alpha: -ord(x) } }
)";

Check ring_integral(const char* fn, const std::function<mpq_class(int)>& expect)
{
    Check c;
    auto m = parse_model_file(kIntegrands);
    auto ring = parse_formula("x = 0 \\/ 0 <= ord(x)", m.env());
    for (auto fd : all_fields()) {
        for (int d : {1, 2, 3}) {
            IntegrationOptions o;
            o.vmin = -5;
            o.vmax = 10;
            o.depth = d;
            auto r = integrate(fd, Integrand(*m.find_motivic(fn)), ring.get(), {{"x", Sort::VF}}, {}, o);
            bool ok = r.unknown_cells == 0 && r.status == TailStatus::ResolvedGeometric && r.value.exact &&
                      r.value.value.is_rational() && r.value.value.rational() == expect(fd.p);
            c.expect(ok, [&] {
                return field_name(fd) + " depth " + std::to_string(d) + ": " + r.value.to_string() + " (" +
                       std::string(tail_status_name(r.status)) + ")";
            });
        }
    }
    c.summary = std::to_string(c.count) + " integrals over O exact";
    return c;
}

Check normalization() { return ring_integral("one", [](int) { return mpq_class(1); }); }

Check closed_form() { return ring_integral("qinv", [](int p) { return mpq_class(p, p + 1); }); }

Check characters()
{
    Check c;
    std::mt19937_64 rng(101);
    for (auto fd : all_fields()) {
        auto name = field_name(fd);
        for (int i = 0; i < 1000; ++i) {
            auto x = random_elem(fd, rng, -3, 2), y = random_elem(fd, rng, -3, 2);
            auto cx = canonical_character(fd, x);
            auto cy = canonical_character(fd, y);
            c.expect(canonical_character(fd, vf_add(fd, x, y)) == cx * cy,
                     [&] { return name + ": additivity at " + format_vf(fd, x) + ", " + format_vf(fd, y); });
            c.expect(std::abs(cx.to_complex() - character_oracle(fd, x)) < 1e-12,
                     [&] { return name + ": digit formula at " + format_vf(fd, x); });
        }
        for (int i = 0; i < 100; ++i) {
            auto m = random_elem(fd, rng, 1, 6);
            c.expect(canonical_character(fd, m) == Cyclo(1),
                     [&] { return name + ": nontrivial on the maximal ideal at " + format_vf(fd, m); });
        }
        c.expect(!(canonical_character(fd, vf_one(fd)) == Cyclo(1)), [&] { return name + ": trivial at 1"; });
        Cyclo s, gauss;
        std::complex<double> direct = 0;
        for (int a = 0; a < fd.p; ++a) {
            s += residue_character(fd, a);
            gauss += residue_character(fd, a * a % fd.p);
            direct += e(double(a * a % fd.p) / fd.p);
        }
        c.expect(s.is_zero(), [&] { return name + ": residue character sum " + s.to_string(); });
        c.expect(std::abs(gauss.abs() - std::sqrt(double(fd.p))) < 1e-12,
                 [&] { return name + ": Gauss sum magnitude " + std::to_string(gauss.abs()); });
        c.expect(std::abs(gauss.to_complex() - direct) < 1e-12, [&] { return name + ": Gauss sum by direct summation"; });
    }
    c.summary = "additivity on 1000 pairs per field, residue and Gauss sums";
    return c;
}

Check valuation_laws()
{
    Check c;
    std::mt19937_64 rng(202);
    for (auto fd : all_fields()) {
        auto name = field_name(fd);
        for (int i = 0; i < 10000; ++i) {
            auto x = random_elem(fd, rng, -6, 6), y = random_elem(fd, rng, -6, 6);
            auto xy = vf_mul(fd, x, y);
            bool ok = vf_ord(xy) == vf_ord(x) + vf_ord(y) && vf_ac(xy) == vf_ac(x) * vf_ac(y) % fd.p;
            try {
                auto s = vf_add(fd, x, y);
                std::int64_t lo = std::min(vf_ord(x), vf_ord(y));
                ok = ok && vf_ord(s) >= lo && (vf_ord(x) == vf_ord(y) || vf_ord(s) == lo);
            } catch (const PrecisionError&) {
                // total cancellation within the known digits
                ok = ok && vf_ord(x) == vf_ord(y);
            }
            ok = ok && same_digits(vf_mul(fd, x, vf_inv(fd, x)), vf_one(fd));
            c.expect(ok, [&] { return name + ": " + format_vf(fd, x) + ", " + format_vf(fd, y); });
        }
    }
    c.summary = "10^4 ord/ac/ultrametric checks per field";
    return c;
}

Check presburger()
{
    Check c;
    oracle::PresGen gen(4242);
    int formulas = 0;
    for (int i = 0; i < 500; ++i) {
        // at most three variables in all and at most two quantifiers
        int nfree = i % 10 == 0 ? 3 : (i % 2 ? 1 : 2);
        int quants = nfree == 1 ? gen.pick(1, 2) : nfree == 2 ? 1 : 0;
        std::vector<std::string> free{"x", "w", "z"};
        free.resize(static_cast<std::size_t>(nfree));
        int counter = 0;
        auto f = gen.formula(free, nullptr, quants, 3, counter);
        auto s = presburger_qe(*f, free);
        ++formulas;
        bool ok = true;
        std::vector<std::int64_t> pt(free.size());
        oracle::Env env;
        std::function<void(std::size_t)> sweep = [&](std::size_t k) {
            if (!ok) return;
            if (k == free.size()) {
                if (s.contains(pt) != oracle::holds(*f, env)) {
                    ok = false;
                    std::ostringstream os;
                    for (std::size_t j = 0; j < pt.size(); ++j)
                        os << free[j] << "=" << pt[j] << " ";
                    c.expect(false, [&] { return "disagreement at " + os.str() + "for " + format(*f); });
                }
                return;
            }
            for (std::int64_t v = -50; v <= 50; ++v) {
                pt[k] = v;
                env[free[k]] = v;
                sweep(k + 1);
            }
        };
        sweep(0);
        if (ok) c.expect(true, {});
    }
    oracle::PresGen one_d(2024);
    for (int i = 0; i < 150; ++i) {
        int counter = 0;
        auto f = one_d.formula({"x"}, nullptr, one_d.pick(0, 2), 3, counter);
        auto s = presburger_qe(*f, {"x"});
        auto ps = normalize_1d(s);
        bool ok = true;
        for (std::int64_t x = -1000; x <= 1000 && ok; ++x)
            ok = progressions_contain(ps, x) == s.contains({x});
        c.expect(ok, [&] { return "normalize_1d differs for " + s.to_string(); });
    }
    c.summary = std::to_string(formulas) + " formulas against brute force, 150 one-dimensional normal forms";
    return c;
}

Check motivic_values()
{
    Check c;
    auto file = parse_model_file(R"(
        var x : VF
        motivic f {
          term { alpha: ord(x); beta: 1; fiber(r=1; y): y * y = ac(x); geom: [-2] }
        }
        motivic g {
          term { alpha: -2 * ord(x) + 1; beta: ord(x) - 3; fiber(r=2; u, w): u * u + w = ac(x); geom: [-1, 3] }
          term { alpha: 0; fiber(r=1; u): u * u * u = ac(x) }
        }
        motivic h {
          term { alpha: 3; beta: 2 * ord(x); fiber(r=2; u, w): u * w = 1 /\ ~(u = ac(x)) }
          term { beta: -1; fiber(r=0): ord(x) <= 0; geom: [2] }
        }
    )");
    SearchBox b;
    mpq_class worked = eval_motivic(qp(5), b, *file.find_motivic("f"), {{"x", embed_integer(qp(5), 5)}});
    c.expect(worked == mpq_class(125, 12), [&] { return "worked instance gives " + worked.get_str(); });

    std::mt19937_64 rng(303);
    int entries = 0;
    for (auto fd : all_fields()) {
        int p = fd.p;
        for (int i = 0; i < 6; ++i) {
            auto x = random_elem(fd, rng, -2, 3);
            std::int64_t n = x.v;
            int a = x.digits[0];
            std::int64_t sq = 0, c1 = 0, c2 = 0, c3 = 0;
            for (int u = 0; u < p; ++u) {
                sq += u * u % p == a;
                for (int w = 0; w < p; ++w) {
                    c1 += (u * u + w) % p == a;
                    c3 += u * w % p == 1 && u != a;
                }
                c2 += u * u * u % p == a;
            }
            mpq_class want_f = pow_q(p, n) * sq / (1 - pow_q(p, -2));
            mpq_class want_g = pow_q(p, -2 * n + 1) * (n - 3) * c1 / (1 - pow_q(p, -1)) / (1 - pow_q(p, 3)) + c2;
            mpq_class want_h = pow_q(p, 3) * (2 * n) * c3 - (n <= 0 ? mpq_class(1) / (1 - pow_q(p, 2)) : mpq_class(0));
            Assignment at{{"x", x}};
            for (auto [name, want] : {std::pair<const char*, mpq_class>{"f", want_f}, {"g", want_g}, {"h", want_h}}) {
                mpq_class got = eval_motivic(fd, b, *file.find_motivic(name), at);
                ++entries;
                c.expect(got == want, [&] {
                    return std::string(name) + " at " + format_vf(fd, x) + " over " + field_name(fd) + ": " +
                           got.get_str() + " != " + want.get_str();
                });
            }
        }
    }
    c.summary = "125/12 and " + std::to_string(entries) + " values against direct counts";
    return c;
}

Check closure_suite()
{
    Check c;
    auto m = parse_model_file(closure::kModels);
    std::mt19937_64 rng(404);
    std::size_t npairs = 0;
    int min_points = 1 << 30;
    for (auto& pair : closure::pairs()) {
        ++npairs;
        int points = 0;
        for (int p : {3, 5})
            for (auto fd : {qp(p), fpt(p)})
                for (int i = 0; i < 3; ++i) {
                    auto o = closure::check(fd, m, pair, closure::sample_point(fd, pair.sample, rng));
                    ++points;
                    c.expect(o.ok, [&] { return o.detail; });
                }
        min_points = std::min(min_points, points);
    }
    c.expect(npairs >= 5, [] { return "fewer than 5 pairs"; });
    c.expect(min_points >= 10, [] { return "fewer than 10 points per pair"; });
    c.summary = std::to_string(npairs) + " pairs, " + std::to_string(min_points) + " points each";
    return c;
}

Check transfer()
{
    Check c;
    auto m = parse_model_file(transfer_suite::kModel);
    auto all = load_statements(m);
    c.expect(all.size() >= 10, [] { return "fewer than 10 statements"; });
    std::size_t rows = 0;
    for (auto& s : all) {
        c.expect(s.twists.size() >= 2, [&] { return s.name + ": fewer than two twists"; });
        auto r = transfer_experiment(s, {5, 7, 11, 13, 17}, transfer_suite::options());
        rows += r.rows.size();
        c.expect(r.disagreements.empty() && !r.uninformative && r.agreement_from == 5, [&] {
            return s.name + ": " + std::to_string(r.disagreements.size()) + " disagreements\n" + transfer_csv(r);
        });
        for (auto& row : r.rows)
            c.expect(row.agree.has_value(), [&] {
                return s.name + ": indefinite verdict at p=" + std::to_string(row.p) + " twist " +
                       std::to_string(row.twist);
            });
    }
    c.summary = std::to_string(all.size()) + " statements, " + std::to_string(rows) + " rows in agreement";
    return c;
}

// |h(q, l)| <= q^(a + b|l|), exactly.
bool within(const TermSum& h, std::int64_t q, std::int64_t l, std::int64_t a, std::int64_t b)
{
    return abs(tsum_eval(h, q, {l})) <= pow_q(q, a + b * (l < 0 ? -l : l));
}

Check uniform_bounds()
{
    Check c;
    const char* sums[] = {
        "tsum h := q^L on {L >= 0}",
        "tsum h := (L+1)*q^(-L) on {L >= 0}",
        "tsum h := 3*(L+1)*(2L-1)*q^(L-2) - q^L on {L >= 0}",
        "tsum h := q^(2L) - 5*q^(L+3) + 7",
        "tsum h := (L-4)*q^(-L) + 2 on {L >= -3}",
        "tsum h := q^(L+1) - q^L on {L === 1 mod 3}",
        "tsum h := 1/2*(L+2)*q^(L) + 1/2*q^(-L) on {L <= 4}",
        "tsum h := 4*q^(3L) - q^(2L+5) on {L >= 1}",
        "tsum h := (L-1)^2*q^(-2L) - 3 on {L <= 0}",
    };
    int n = 0;
    for (auto text : sums) {
        auto h = parse_termsum(text);
        auto r = tsum_bound(h);
        ++n;
        if (!r) {
            c.expect(false, [&] { return std::string(text) + ": no bound"; });
            continue;
        }
        c.expect(r->certified && r->minimal, [&] { return std::string(text) + ": not certified and minimal"; });
        auto progs = normalize_1d(h.domain);
        bool b_fails = r->b == 0;
        for (long q = 2; q <= 13; ++q)
            for (std::int64_t l = -60; l <= 60; ++l) {
                if (!progressions_contain(progs, l)) continue;
                c.expect(within(h, q, l, r->a, r->b), [&] {
                    return std::string(text) + ": violated at q=" + std::to_string(q) + " L=" + std::to_string(l);
                });
                if (r->b > 0 && !within(h, q, l, r->a, r->b - 1)) b_fails = true;
            }
        c.expect(b_fails, [&] { return std::string(text) + ": b - 1 survives the window"; });
        bool a_witness = r->witness_a1.size() == 2 && !within(h, r->witness_a1[0], r->witness_a1[1], r->a - 1, r->b);
        c.expect(a_witness, [&] { return std::string(text) + ": no witness against a - 1"; });
    }

    auto m = parse_model_file(R"(
        var L : ZZ
        motivic pl { term { alpha: L } }
        motivic lq { term { alpha: -L; beta: L + 1 } }
    )");
    std::vector<FieldDesc> fields{qp(5), fpt(7)};
    std::vector<IntegrationOptions> windows;
    for (int k : {1, 2, 3}) {
        IntegrationOptions o;
        o.vmin = 0;
        o.vmax = 4 * k;
        o.depth = 1;
        o.zmin = -10 * k;
        o.zmax = 10 * k;
        windows.push_back(o);
    }
    std::vector<VarDecl> lv{{"L", Sort::ZZ}};
    auto pl = uniform_bound_fit(*m.find_motivic("pl"), nullptr, lv, {"L"}, fields, windows);
    c.expect(pl.b && *pl.a == 0 && *pl.b == 1, [] { return "fit for q^L is not (0, 1)"; });
    auto nonneg = parse_formula("0 <= L", m.env());
    auto lq = uniform_bound_fit(*m.find_motivic("lq"), nonneg.get(), lv, {"L"}, fields, windows);
    c.expect(lq.b && *lq.a == 0 && *lq.b == 0, [] { return "fit for (L + 1) q^-L is not (0, 0)"; });
    c.summary = std::to_string(n) + " sums certified minimal, fits (0,1) and (0,0)";
    return c;
}

Check monotonicity()
{
    Check c;
    gen::FormulaGen g(9001);
    std::vector<SearchBox> boxes{{0, 0, 1, -1, 1}, {-2, 2, 1, -3, 3}, {-3, 3, 2, -6, 6}};
    int settled = 0;
    for (int i = 0; i < 200; ++i) {
        gen::Scope s{{"x"}, {"u"}, {"z"}};
        auto f = g.formula(s, g.pick(1, 2), 2, i % 2 ? 7 : 5);
        auto fd = g.pick(0, 1) ? qp(3) : fpt(3);
        Assignment a{{"x", embed_integer(fd, g.pick(1, 20))}, {"u", RFElem{g.pick(0, 2)}},
                     {"z", std::int64_t{g.pick(-2, 2)}}};
        std::optional<Truth> seen;
        for (auto& b : boxes) {
            Truth t = eval_formula(fd, b, a, *f);
            if (t == Truth::Unknown) continue;
            c.expect(!seen || *seen == t, [&] { return "verdict flipped for " + format(*f); });
            seen = t;
        }
        settled += seen.has_value();
    }
    c.summary = "200 formulas over 3 nested boxes, " + std::to_string(settled) + " settled";
    return c;
}

std::string data(const char* rel) { return std::string(WB_SOURCE_DIR) + "/examples_data/" + rel; }

Check determinism()
{
    Check c;
    std::vector<std::vector<std::string>> suite = {
        {"parse", data("units.dpf")},
        {"parse", data("stmts/int_qinvord.stmt")},
        {"eval", "--field", "Qp:5", "--formula", data("units.dpf"), "--assign", "x=Qp(5){v=0;7}"},
        {"eval", "--field", "FpT:3", "--model", data("f.mot"), "--assign", "x=2"},
        {"eval", "--field", "Qp:5", "--formula", data("far.dpf")},
        {"enumerate", "--field", "Qp:3", "--formula", data("units.dpf"), "--box", "vmin=0,vmax=1,depth=1"},
        {"integrate", "--field", "FpT:5", "--depth", "3", data("f.mot"), "--domain", "O"},
        {"integrate", "--field", "Qp:5", data("f.mot")},
        {"transfer", data("stmts/int_qinvord.stmt"), "--primes", "5,7,11,13"},
        {"transfer", data("stmts/int_qinvord.stmt"), "--primes", "5,7", "--format", "csv"},
        {"bound", data("bound.mot"), "--function", "lq", "--domain", "{0 <= L}"},
        {"bound", data("bound.mot"), "--function", "pw", "--domain", "{~(w = 0) /\\ 0 <= ord(w)}"},
        {"zsum", "--sum", "tsum h := 3*(L+1)*(2L-1)*q^(L-2) - q^L on {L >= 0}", "--eval", "q=5 L=2", "--bound"},
        {"zsum", "--sum", "tsum h(L, M) := q^(L + M) on {L >= 0 /\\ M >= 0}", "--bound", "--window", "6"},
        {"zsum", "--sum", "q^("},
    };
    auto run_all = [&] {
        std::string all;
        for (auto& args : suite) {
            std::ostringstream out, err;
            int code = run(args, out, err);
            all += std::to_string(code) + "\n" + out.str() + "\n" + err.str() + "\n";
        }
        return all;
    };
    std::string first = run_all(), second = run_all();
    c.expect(first == second, [] { return "reports differ between runs"; });
    c.expect(first.size() > 1000, [] { return "suite produced almost no output"; });
    c.summary = std::to_string(suite.size()) + " commands, " + std::to_string(first.size()) + " bytes identical";
    return c;
}

struct Criterion {
    int id;
    const char* name;
    double limit_s; ///< 0 for none
    Check (*run)();
};

} // namespace

int main()
{
    const Criterion criteria[] = {
        {1, "normalization", 1, normalization},
        {2, "closed-form integral", 1, closed_form},
        {3, "characters", 5, characters},
        {4, "ord/ac algebra", 5, valuation_laws},
        {5, "presburger elimination", 30, presburger},
        {6, "motivic values", 1, motivic_values},
        {7, "closure under integration", 60, closure_suite},
        {8, "transfer agreement", 300, transfer},
        {9, "uniform bounds", 30, uniform_bounds},
        {10, "three-valued monotonicity", 60, monotonicity},
        {11, "determinism", 0, determinism},
    };
    int failed = 0;
    for (auto& cr : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Check c;
        std::string error;
        try {
            c = cr.run();
        } catch (const std::exception& ex) {
            error = ex.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool late = cr.limit_s > 0 && secs >= cr.limit_s;
        bool ok = error.empty() && c.failures.empty() && !late;
        failed += !ok;
        char timing[64];
        if (cr.limit_s > 0) std::snprintf(timing, sizeof timing, "%.2fs / %.0fs", secs, cr.limit_s);
        else std::snprintf(timing, sizeof timing, "%.2fs", secs);
        std::cout << (ok ? "PASS" : "FAIL") << " " << cr.id << " " << cr.name << ": " << c.summary << " (" << timing
                  << ")\n";
        if (!error.empty()) std::cout << "    exception: " << error << "\n";
        if (!c.failures.empty()) std::cout << "    " << c.failures.size() << " failures\n";
        for (auto& f : c.failures)
            if (!f.empty()) std::cout << "    " << f << "\n";
        if (late) std::cout << "    over the time limit\n";
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << (11 - failed) << "/11\n";
    return failed ? 1 : 0;
}
