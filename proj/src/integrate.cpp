#include "wb/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace wb {

namespace {

mpq_class p_power(int p, std::int64_t e)
{
    mpz_class n;
    mpz_ui_pow_ui(n.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? mpq_class(mpz_class(1), n) : mpq_class(n);
}

TailStatus worst(TailStatus a, TailStatus b)
{
    return static_cast<int>(a) > static_cast<int>(b) ? a : b;
}

std::string format_complex(std::complex<double> z)
{
    if (z.imag() == 0) return format_double(z.real());
    std::string im = format_double(std::abs(z.imag()));
    return format_double(z.real()) + (z.imag() < 0 ? "-" : "+") + im + "i";
}

// r with b = r * a, when a and b are rational multiples of each other.
std::optional<mpq_class> exact_ratio(const Cyclo& a, const Cyclo& b)
{
    if (a.is_zero()) return std::nullopt;
    if (a.is_rational() && b.is_rational()) return b.rational() / a.rational();
    auto& ca = a.coefficients();
    auto key = ca.begin()->first;
    auto it = b.coefficients().find(key);
    if (it == b.coefficients().end() || b.level() != a.level()) return std::nullopt;
    mpq_class r = it->second / ca.begin()->second;
    if (!(a * Cyclo(r) == b)) return std::nullopt;
    return r;
}

constexpr std::size_t kMaxRecurrence = 3;

// c with q[i + m] = sum_j c_j q[i + j] for every i, when one exists.
std::optional<std::vector<mpq_class>> fit_recurrence(const std::vector<mpq_class>& q, std::size_t m)
{
    std::vector<std::vector<mpq_class>> a(m, std::vector<mpq_class>(m + 1));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j)
            a[i][j] = q[i + j];
        a[i][m] = q[i + m];
    }
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        while (piv < m && a[piv][col] == 0)
            ++piv;
        if (piv == m) return std::nullopt;
        std::swap(a[piv], a[col]);
        for (std::size_t r = 0; r < m; ++r) {
            if (r == col || a[r][col] == 0) continue;
            mpq_class f = a[r][col] / a[col][col];
            for (std::size_t j = col; j <= m; ++j)
                a[r][j] -= f * a[col][j];
        }
    }
    std::vector<mpq_class> c(m);
    for (std::size_t i = 0; i < m; ++i)
        c[i] = a[i][m] / a[i][i];
    for (std::size_t i = 0; i + m < q.size(); ++i) {
        mpq_class v = 0;
        for (std::size_t j = 0; j < m; ++j)
            v += c[j] * q[i + j];
        if (v != q[i + m]) return std::nullopt;
    }
    return c;
}

// Largest modulus of a root of x^m - sum_j c_j x^j (Durand-Kerner).
double spectral_radius(const std::vector<mpq_class>& c)
{
    std::size_t m = c.size();
    if (m == 1) return std::abs(c[0].get_d());
    auto poly = [&](std::complex<double> x) {
        std::complex<double> v = 1;
        for (std::size_t j = m; j-- > 0;)
            v = v * x - c[j].get_d();
        return v;
    };
    std::vector<std::complex<double>> z(m);
    for (std::size_t i = 0; i < m; ++i)
        z[i] = std::pow(std::complex<double>(0.4, 0.9), static_cast<double>(i));
    for (int it = 0; it < 500; ++it) {
        for (std::size_t i = 0; i < m; ++i) {
            std::complex<double> d = 1;
            for (std::size_t j = 0; j < m; ++j)
                if (j != i) d *= z[i] - z[j];
            if (std::abs(d) > 0) z[i] -= poly(z[i]) / d;
        }
    }
    double rho = 0;
    for (auto r : z)
        rho = std::max(rho, std::abs(r));
    return rho;
}

void check_variables(const Integrand& f, const Formula* domain, const std::vector<VarDecl>& vars,
                     const Assignment& base)
{
    std::set<std::string> known;
    for (auto& v : vars) {
        if (base.count(v.name)) throw DomainError("integration variable '" + v.name + "' is also fixed");
        if (!known.insert(v.name).second) throw DomainError("integration variable '" + v.name + "' listed twice");
    }
    for (auto& [name, value] : base)
        known.insert(name);
    std::set<std::string> used =
        std::visit([](const auto& g) { return free_variables(g); }, f);
    if (domain)
        for (auto& d : typecheck(*domain).vars)
            used.insert(d.name);
    for (auto& name : used)
        if (!known.count(name)) throw DomainError("variable '" + name + "' is neither integrated nor fixed");
}

// Walks the product box cell by cell.
class Walker {
public:
    Walker(const FieldDesc& fd, const Integrand& f, const Formula* domain, const std::vector<VarDecl>& vars,
           const Assignment& base, const IntegrationOptions& opts)
        : fd_(fd), f_(f), domain_(domain), vars_(vars), opts_(opts), env_(base), budget_(effective_budget(opts))
    {
        validate(fd, opts);
        check_variables(f, domain, vars, base);
    }

    std::int64_t cells() const { return cells_; }

protected:
    const FieldDesc& fd_;
    const Integrand& f_;
    const Formula* domain_;
    const std::vector<VarDecl>& vars_;
    const IntegrationOptions& opts_;
    Assignment env_;
    std::int64_t budget_;
    std::int64_t cells_ = 0;
    std::vector<std::string> notes_;

    // The cell itself: digits beyond the depth are unknown.
    VFElem cell_of(const VFElem& rep) const
    {
        VFElem x;
        x.v = rep.v;
        x.digits.assign(rep.digits.begin(), rep.digits.begin() + opts_.depth);
        return x;
    }

    void count_cell()
    {
        if (++cells_ > budget_)
            throw ResourceError("cell budget of " + std::to_string(budget_) + " exceeded");
    }

    Truth member()
    {
        return domain_ ? eval_in_place(fd_, opts_.eval_box, env_, *domain_) : Truth::True;
    }

    std::optional<Cyclo> value()
    {
        try {
            if (auto* m = std::get_if<MotivicFunction>(&f_))
                return Cyclo(eval_motivic_in_place(fd_, opts_.eval_box, *m, env_));
            return eval_exp_in_place(fd_, opts_.eval_box, std::get<MotivicExpFunction>(f_), env_, opts_.twist);
        } catch (const PrecisionError& e) {
            note(e.what());
        } catch (const UnresolvedError& e) {
            note(e.what());
        }
        return std::nullopt;
    }

    void note(std::string s)
    {
        if (notes_.size() < 20 && std::find(notes_.begin(), notes_.end(), s) == notes_.end())
            notes_.push_back(std::move(s));
    }
};

class Integrator : public Walker {
public:
    using Walker::Walker;

    IntegralResult run()
    {
        IntegralResult r;
        result_ = &r;
        Part p = level(0, 1.0, true);
        r.value = p.value;
        r.status = p.status;
        r.cells = cells_;
        r.unknown_cells = unknown_;
        r.unknown_mass = unknown_mass_;
        r.notes = notes_;
        return r;
    }

private:
    struct Part {
        Num value = Num::of(Cyclo());
        TailStatus status = TailStatus::ResolvedGeometric;
    };

    IntegralResult* result_ = nullptr;
    std::int64_t unknown_ = 0;
    double unknown_mass_ = 0;

    Part leaf(double mass)
    {
        count_cell();
        Truth t = member();
        Part out;
        if (t == Truth::False) return out;
        std::optional<Cyclo> v = t == Truth::True ? value() : std::nullopt;
        if (!v) {
            ++unknown_;
            unknown_mass_ += mass;
            return out;
        }
        out.value = Num::of(std::move(*v));
        return out;
    }

    Part level(std::size_t i, double mass, bool record)
    {
        if (i == vars_.size()) return leaf(mass);
        const VarDecl& var = vars_[i];
        Part out;
        if (var.sort == Sort::RF) {
            for (int u = 0; u < fd_.p; ++u) {
                env_[var.name] = RFElem{u};
                Part in = level(i + 1, mass, record);
                out.value += in.value;
                out.status = worst(out.status, in.status);
            }
            env_.erase(var.name);
            return out;
        }
        bool vf = var.sort == Sort::VF;
        std::int64_t lo = vf ? opts_.vmin : opts_.zmin, hi = vf ? opts_.vmax : opts_.zmax;
        std::vector<Num> slices;
        for (std::int64_t k = lo; k <= hi; ++k) {
            Num s = Num::of(Cyclo());
            if (vf) {
                double cell_mass = std::pow(static_cast<double>(fd_.p), -static_cast<double>(k + opts_.depth));
                for_each_cell(fd_, k, opts_.depth, [&](const VFElem& x) {
                    env_[var.name] = cell_of(x);
                    Part in = level(i + 1, mass * cell_mass, false);
                    s += in.value;
                    out.status = worst(out.status, in.status);
                });
                s = s * p_power(fd_.p, -(k + opts_.depth));
            } else {
                env_[var.name] = k;
                Part in = level(i + 1, mass, false);
                s = in.value;
                out.status = worst(out.status, in.status);
            }
            out.value += s;
            slices.push_back(std::move(s));
        }
        env_.erase(var.name);
        std::vector<Num> down(slices.rbegin(), slices.rend());
        TailInfo up_tail = tail(slices), down_tail = tail(down);
        out.value += up_tail.extra;
        out.value += down_tail.extra;
        out.status = worst(out.status, worst(up_tail.status, down_tail.status));
        if (record) {
            for (std::int64_t k = lo; k <= hi; ++k)
                result_->slices.emplace_back(k, slices[static_cast<std::size_t>(k - lo)]);
            result_->upper_tail = up_tail;
            result_->lower_tail = down_tail;
        }
        return out;
    }

    // Exact tails: a rational sequence satisfying a linear recurrence of
    // order m <= 3 with constant coefficients on its last tail_k + 2(m - 1)
    // entries, or a sequence of cyclotomic values with a constant rational
    // ratio. The tail sum follows from the recurrence.
    bool exact_tail(const std::vector<Num>& s, TailInfo& t) const
    {
        auto k = static_cast<std::size_t>(opts_.tail_k);
        for (std::size_t m = 1; m <= kMaxRecurrence; ++m) {
            std::size_t len = k + 2 * (m - 1);
            if (s.size() < len) break;
            std::vector<Num> w(s.end() - static_cast<std::ptrdiff_t>(len), s.end());
            if (!std::all_of(w.begin(), w.end(), [](const Num& n) { return n.exact; })) return false;
            std::vector<mpq_class> c;
            if (std::all_of(w.begin(), w.end(), [](const Num& n) { return n.value.is_rational(); })) {
                std::vector<mpq_class> q;
                for (auto& n : w)
                    q.push_back(n.value.rational());
                auto fit = fit_recurrence(q, m);
                if (!fit) continue;
                c = *fit;
            } else {
                if (m > 1) return false;
                std::optional<mpq_class> r;
                for (std::size_t i = 0; i + 1 < len; ++i) {
                    auto ri = exact_ratio(w[i].value, w[i + 1].value);
                    if (!ri || (r && *r != *ri)) return false;
                    r = ri;
                }
                c = {*r};
            }
            double rho = spectral_radius(c);
            t.order = static_cast<int>(m);
            t.ratio = m == 1 ? c[0].get_str() : format_double(rho);
            if (rho < opts_.tail_rmax) {
                // s_i = sum_j c_j s_{i-m+j} beyond the window, so the tail S
                // satisfies S = sum_j c_j (S + P_j), P_j the sum of the last
                // m - j entries.
                Cyclo num;
                mpq_class den = 1;
                for (std::size_t j = 0; j < m; ++j) {
                    Cyclo pj;
                    for (std::size_t i = len - (m - j); i < len; ++i)
                        pj += w[i].value;
                    num += Cyclo(c[j]) * pj;
                    den -= c[j];
                }
                t.status = TailStatus::ResolvedGeometric;
                t.extra = Num::of(num * Cyclo(mpq_class(1 / den)));
            } else if (rho >= 1) {
                t.status = TailStatus::DivergentSuspected;
            }
            return true;
        }
        return false;
    }

    // Tail beyond s.back(), from the last tail_k entries of s.
    TailInfo tail(const std::vector<Num>& s) const
    {
        TailInfo t;
        t.extra = Num::of(Cyclo());
        auto k = static_cast<std::size_t>(opts_.tail_k);
        bool all_zero = std::all_of(s.end() - static_cast<std::ptrdiff_t>(std::min(k, s.size())), s.end(),
                                    [](const Num& n) { return n.is_zero(); });
        if (all_zero) {
            t.status = TailStatus::ResolvedGeometric;
            t.ratio = "0";
            return t;
        }
        if (s.size() < k) return t;
        std::vector<Num> w(s.end() - static_cast<std::ptrdiff_t>(k), s.end());
        if (exact_tail(s, t)) return t;
        std::vector<std::complex<double>> ratios;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            auto a = w[i].to_complex(), b = w[i + 1].to_complex();
            if (std::abs(a) == 0) return t;
            ratios.push_back(b / a);
        }
        std::complex<double> mean = 0;
        for (auto r : ratios)
            mean += r;
        mean /= static_cast<double>(ratios.size());
        bool steady = std::all_of(ratios.begin(), ratios.end(),
                                  [&](std::complex<double> r) { return std::abs(r - mean) <= opts_.tail_eps; });
        if (steady && std::abs(mean) < opts_.tail_rmax) {
            t.status = TailStatus::ResolvedGeometric;
            t.ratio = format_complex(mean);
            t.extra.exact = false;
            t.extra.approx = w.back().to_complex() * mean / (1.0 - mean);
            return t;
        }
        if (std::all_of(ratios.begin(), ratios.end(), [](std::complex<double> r) { return std::abs(r) >= 1; })) {
            t.status = TailStatus::DivergentSuspected;
            if (steady) t.ratio = format_complex(mean);
        }
        return t;
    }
};

class Scanner : public Walker {
public:
    Scanner(const FieldDesc& fd, const Integrand& f, const Formula* domain, const std::vector<VarDecl>& vars,
            const Assignment& base, const IntegrationOptions& opts, const std::function<void(const CellVisit&)>& fn)
        : Walker(fd, f, domain, vars, base, opts), fn_(fn)
    {
    }

    void run() { level(0, 1.0); }

private:
    const std::function<void(const CellVisit&)>& fn_;
    std::vector<std::int64_t> indices_;

    void level(std::size_t i, double mass)
    {
        if (i == vars_.size()) {
            count_cell();
            Truth t = member();
            std::optional<Cyclo> v = t == Truth::True ? value() : std::nullopt;
            fn_(CellVisit{env_, indices_, mass, t, v});
            return;
        }
        const VarDecl& var = vars_[i];
        if (var.sort == Sort::RF) {
            for (int u = 0; u < fd_.p; ++u) {
                env_[var.name] = RFElem{u};
                level(i + 1, mass);
            }
        } else if (var.sort == Sort::VF) {
            for (std::int64_t k = opts_.vmin; k <= opts_.vmax; ++k) {
                double cell_mass = std::pow(static_cast<double>(fd_.p), -static_cast<double>(k + opts_.depth));
                indices_.push_back(k);
                for_each_cell(fd_, k, opts_.depth, [&](const VFElem& x) {
                    env_[var.name] = cell_of(x);
                    level(i + 1, mass * cell_mass);
                });
                indices_.pop_back();
            }
        } else {
            for (std::int64_t k = opts_.zmin; k <= opts_.zmax; ++k) {
                env_[var.name] = k;
                indices_.push_back(k);
                level(i + 1, mass);
                indices_.pop_back();
            }
        }
        env_.erase(var.name);
    }
};

// Index range covered by the indexed coordinates.
std::pair<std::int64_t, std::int64_t> index_range(const std::vector<VarDecl>& vars, const IntegrationOptions& opts)
{
    bool any = false;
    std::int64_t lo = 0, hi = 0;
    for (auto& v : vars) {
        if (v.sort == Sort::RF) continue;
        std::int64_t a = v.sort == Sort::VF ? opts.vmin : opts.zmin, b = v.sort == Sort::VF ? opts.vmax : opts.zmax;
        lo = any ? std::min(lo, a) : a;
        hi = any ? std::max(hi, b) : b;
        any = true;
    }
    return {lo, hi};
}

Magnitude magnitude(const Cyclo& c)
{
    Magnitude m;
    if (c.is_rational()) {
        m.exact = abs(c.rational());
        m.approx = m.exact->get_d();
    } else {
        m.approx = c.abs();
    }
    return m;
}

DirectionEvidence classify(std::string direction, std::vector<double> inc, const IntegrationOptions& opts)
{
    DirectionEvidence d;
    d.direction = std::move(direction);
    d.increments = inc;
    auto k = static_cast<std::size_t>(opts.tail_k);
    if (inc.size() < k) return d;
    std::vector<double> w(inc.end() - static_cast<std::ptrdiff_t>(k), inc.end());
    if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0; })) {
        d.kind = IntegrabilityKind::LikelyIntegrable;
        return d;
    }
    for (std::size_t i = 0; i + 1 < k; ++i)
        d.ratios.push_back(w[i] == 0 ? (w[i + 1] == 0 ? 0.0 : HUGE_VAL) : w[i + 1] / w[i]);
    if (std::all_of(d.ratios.begin(), d.ratios.end(), [&](double r) { return r < 1 - opts.tail_eps; }))
        d.kind = IntegrabilityKind::LikelyIntegrable;
    else if (std::all_of(d.ratios.begin(), d.ratios.end(), [](double r) { return r >= 1; }))
        d.kind = IntegrabilityKind::LikelyDivergent;
    return d;
}

} // namespace

std::string format_double(double x)
{
    if (x == 0) return "0";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string IntegrationOptions::to_string() const
{
    return "vmin=" + std::to_string(vmin) + ",vmax=" + std::to_string(vmax) + ",depth=" + std::to_string(depth) +
           ",zmin=" + std::to_string(zmin) + ",zmax=" + std::to_string(zmax) + ",budget=" + std::to_string(budget) +
           ",tail_k=" + std::to_string(tail_k) + ",tail_eps=" + format_double(tail_eps) +
           ",tail_rmax=" + format_double(tail_rmax) + ",twist=" + std::to_string(twist);
}

void validate(const FieldDesc& fd, const IntegrationOptions& opts)
{
    if (opts.vmin > opts.vmax) throw DomainError("empty valuation range");
    if (opts.zmin > opts.zmax) throw DomainError("empty integer window");
    if (opts.depth < 1 || opts.depth > fd.N)
        throw DomainError("depth must lie in [1, " + std::to_string(fd.N) + "]");
    if (opts.tail_k < 2) throw DomainError("tail_k must be at least 2");
    if (!(opts.tail_eps > 0) || !(opts.tail_rmax > 0 && opts.tail_rmax <= 1))
        throw DomainError("tail tolerances out of range");
    if (opts.budget <= 0) throw DomainError("cell budget must be positive");
    validate_twist(fd, opts.twist);
    validate(fd, opts.eval_box);
}

std::int64_t effective_budget(const IntegrationOptions& opts)
{
    std::int64_t b = opts.budget;
    if (const char* env = std::getenv("WB_BUDGET_CELLS")) {
        char* end = nullptr;
        long long cap = std::strtoll(env, &end, 10);
        if (end == env || *end != '\0' || cap <= 0)
            throw DomainError("WB_BUDGET_CELLS must be a positive integer");
        b = std::min<std::int64_t>(b, cap);
    }
    return b;
}

std::string Num::to_string() const
{
    return exact ? value.to_string() : format_complex(approx);
}

Num& Num::operator+=(const Num& o)
{
    if (exact && o.exact) {
        value += o.value;
    } else {
        approx = to_complex() + o.to_complex();
        exact = false;
        value = Cyclo();
    }
    return *this;
}

Num Num::operator*(const mpq_class& s) const
{
    if (exact) return Num::of(value * Cyclo(s));
    return Num{false, Cyclo(), approx * s.get_d()};
}

std::string_view tail_status_name(TailStatus s)
{
    switch (s) {
    case TailStatus::ResolvedGeometric: return "resolved-geometric";
    case TailStatus::Truncated: return "truncated";
    case TailStatus::DivergentSuspected: return "divergent-suspected";
    }
    return "";
}

std::string_view integrability_name(IntegrabilityKind k)
{
    switch (k) {
    case IntegrabilityKind::LikelyIntegrable: return "LikelyIntegrable";
    case IntegrabilityKind::LikelyDivergent: return "LikelyDivergent";
    case IntegrabilityKind::Inconclusive: return "Inconclusive";
    }
    return "";
}

std::string Magnitude::to_string() const
{
    return exact ? exact->get_str() : format_double(approx);
}

bool operator<(const Magnitude& a, const Magnitude& b)
{
    if (a.exact && b.exact) return *a.exact < *b.exact;
    return a.approx < b.approx;
}

Cyclo eval_integrand(const FieldDesc& fd, const SearchBox& box, const Integrand& f, const Assignment& x,
                     std::int64_t twist)
{
    if (auto* m = std::get_if<MotivicFunction>(&f)) return Cyclo(eval_motivic(fd, box, *m, x));
    return eval_exp(fd, box, std::get<MotivicExpFunction>(f), x, twist);
}

IntegralResult integrate(const FieldDesc& fd, const Integrand& f, const Formula* domain,
                         const std::vector<VarDecl>& vars, const Assignment& base, const IntegrationOptions& opts)
{
    return Integrator(fd, f, domain, vars, base, opts).run();
}

std::int64_t scan_cells(const FieldDesc& fd, const Integrand& f, const Formula* domain,
                        const std::vector<VarDecl>& vars, const Assignment& base, const IntegrationOptions& opts,
                        const std::function<void(const CellVisit&)>& fn)
{
    Scanner s(fd, f, domain, vars, base, opts, fn);
    s.run();
    return s.cells();
}

IntegrabilityVerdict check_integrable(const FieldDesc& fd, const Integrand& f, const Formula* domain,
                                      const std::vector<VarDecl>& vars, const Assignment& base,
                                      const IntegrationOptions& opts)
{
    auto [lo, hi] = index_range(vars, opts);
    std::vector<double> up(static_cast<std::size_t>(hi - lo + 1)), down(up.size());
    IntegrabilityVerdict v;
    v.cells = scan_cells(fd, f, domain, vars, base, opts, [&](const CellVisit& c) {
        if (c.member == Truth::False) return;
        if (!c.value) {
            ++v.unknown_cells;
            return;
        }
        double m = magnitude(*c.value).approx * c.mass;
        std::int64_t top = lo, bottom = hi;
        if (!c.indices.empty()) {
            top = *std::max_element(c.indices.begin(), c.indices.end());
            bottom = *std::min_element(c.indices.begin(), c.indices.end());
        }
        up[static_cast<std::size_t>(top - lo)] += m;
        down[static_cast<std::size_t>(hi - bottom)] += m;
    });
    double total = 0;
    for (double x : up)
        v.partial_sums.push_back(total += x);
    v.upper = classify("upper", up, opts);
    v.lower = classify("lower", down, opts);
    if (vars.empty() || std::all_of(vars.begin(), vars.end(), [](const VarDecl& d) { return d.sort == Sort::RF; })) {
        v.kind = IntegrabilityKind::LikelyIntegrable;
        v.upper.kind = v.lower.kind = IntegrabilityKind::LikelyIntegrable;
    } else if (v.upper.kind == IntegrabilityKind::LikelyDivergent ||
               v.lower.kind == IntegrabilityKind::LikelyDivergent) {
        v.kind = IntegrabilityKind::LikelyDivergent;
    } else if (v.upper.kind == IntegrabilityKind::LikelyIntegrable &&
               v.lower.kind == IntegrabilityKind::LikelyIntegrable) {
        v.kind = IntegrabilityKind::LikelyIntegrable;
    }
    return v;
}

BoundednessResult check_bounded(const FieldDesc& fd, const Integrand& f, const Formula* domain,
                                const std::vector<VarDecl>& vars, const Assignment& base,
                                const IntegrationOptions& opts)
{
    auto [lo, hi] = index_range(vars, opts);
    BoundednessResult r;
    r.sup.exact = mpq_class(0);
    std::vector<Magnitude> up(static_cast<std::size_t>(hi - lo + 1), r.sup), down(up.size(), r.sup);
    r.cells = scan_cells(fd, f, domain, vars, base, opts, [&](const CellVisit& c) {
        if (c.member == Truth::False) return;
        if (!c.value) {
            ++r.unknown_cells;
            return;
        }
        Magnitude m = magnitude(*c.value);
        if (!r.witness || r.sup < m) {
            r.sup = m;
            r.witness = c.point;
        }
        std::int64_t top = lo, bottom = hi;
        if (!c.indices.empty()) {
            top = *std::max_element(c.indices.begin(), c.indices.end());
            bottom = *std::min_element(c.indices.begin(), c.indices.end());
        }
        auto& u = up[static_cast<std::size_t>(top - lo)];
        if (u < m) u = m;
        auto& d = down[static_cast<std::size_t>(bottom - lo)];
        if (d < m) d = m;
    });
    for (std::int64_t k = lo; k <= hi; ++k) {
        r.upper_maxima.emplace_back(k, up[static_cast<std::size_t>(k - lo)]);
        r.lower_maxima.emplace_back(k, down[static_cast<std::size_t>(k - lo)]);
    }
    auto k = static_cast<std::size_t>(opts.tail_k);
    auto rising = [&](auto first, auto last) {
        if (static_cast<std::size_t>(last - first) < k) return false;
        for (auto it = last - static_cast<std::ptrdiff_t>(k); it + 1 != last; ++it)
            if (!(*it < *(it + 1))) return false;
        return true;
    };
    bool indexed = std::any_of(vars.begin(), vars.end(), [](const VarDecl& d) { return d.sort != Sort::RF; });
    r.unbounded_suspected = indexed && (rising(up.begin(), up.end()) || rising(down.rbegin(), down.rend()));
    return r;
}

IntegralResult integrate_out(const FieldDesc& fd, const Integrand& f, const Formula* domain,
                             const std::vector<VarDecl>& vars, const Assignment& base,
                             const IntegrationOptions& opts)
{
    auto v = check_integrable(fd, f, domain, vars, base, opts);
    if (v.kind != IntegrabilityKind::LikelyIntegrable) throw NotIntegrableError(std::move(v));
    return integrate(fd, f, domain, vars, base, opts);
}

} // namespace wb
