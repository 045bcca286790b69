#pragma once

// Pairs (f(x, y), g(x)) with g(x) = integral of f(x, y) dy in closed form.

#include <random>
#include <string>
#include <vector>

#include "wb/integrate.hpp"
#include "wb/model_file.hpp"

namespace closure {

inline const char* kModels = R"(
    var x : VF
    var y : VF

    motivic one { term { } }
    motivic qinv_y { term { alpha: -ord(y) } }
    exp lam_y { term { f: 1; g: y; gshift: -2 } }
    exp lam_xy { term { f: 1; g: x * y } }

    # p^-1 ... written over the common denominator 1 - p^-2
    motivic g_qinv {
      term { fiber(r=0): x = 0 \/ 0 <= ord(x); geom: [-2] }
      term { alpha: -1; beta: -1; fiber(r=0): x = 0 \/ 0 <= ord(x); geom: [-2] }
    }
    motivic g_ring { term { fiber(r=0): x = 0 \/ 0 <= ord(x) } }
    motivic g_zero { }
    motivic g_ball { term { alpha: -ord(x) } }
    motivic g_char { term { fiber(r=0): x = 0 \/ 1 <= ord(x) } }
    motivic g_ball_qinv {
      term { alpha: -2 * ord(x); geom: [-2] }
      term { alpha: -2 * ord(x) - 1; beta: -1; geom: [-2] }
    }
    motivic g_ac { term { alpha: -1; fiber(r=0): ~(x = 0); geom: [-1] } }
)";

enum class Sample { Any, Ring, RingNonzero };

struct Pair {
    std::string name;
    std::string f;
    std::string domain;
    std::string g;
    Sample sample;
    int depth;
};

inline std::vector<Pair> pairs()
{
    const char* ring_xy = "(x = 0 \\/ 0 <= ord(x)) /\\ 0 <= ord(y)";
    return {
        {"geometric", "qinv_y", ring_xy, "g_qinv", Sample::Any, 2},
        {"indicator", "one", ring_xy, "g_ring", Sample::Any, 2},
        {"character", "lam_y", ring_xy, "g_zero", Sample::Any, 3},
        {"ball", "one", "ord(x) <= ord(y)", "g_ball", Sample::RingNonzero, 2},
        {"character-product", "lam_xy", "0 <= ord(y)", "g_char", Sample::Ring, 2},
        {"ball-geometric", "qinv_y", "ord(x) <= ord(y)", "g_ball_qinv", Sample::RingNonzero, 2},
        {"angular-component", "one", "0 <= ord(y) /\\ ac(y) = ac(x)", "g_ac", Sample::Any, 2},
    };
}

inline wb::VFElem sample_point(const wb::FieldDesc& fd, Sample s, std::mt19937_64& rng)
{
    std::int64_t lo = s == Sample::Any ? -2 : 0;
    if (s != Sample::RingNonzero && std::uniform_int_distribution<int>(0, 9)(rng) == 0) return wb::vf_zero();
    wb::VFElem x;
    x.v = std::uniform_int_distribution<std::int64_t>(lo, 8)(rng);
    x.digits.resize(static_cast<std::size_t>(fd.N));
    for (auto& d : x.digits)
        d = std::uniform_int_distribution<int>(0, fd.p - 1)(rng);
    x.digits[0] = std::uniform_int_distribution<int>(1, fd.p - 1)(rng);
    return x;
}

struct Outcome {
    bool ok = false;
    std::string detail;
};

/// Compares integrate_out of f at x against the closed form g(x).
inline Outcome check(const wb::FieldDesc& fd, const wb::ModelFile& m, const Pair& pair, const wb::VFElem& x)
{
    wb::IntegrationOptions opts;
    opts.vmin = -6;
    opts.vmax = 15;
    opts.depth = pair.depth;
    wb::Integrand f = m.find_motivic(pair.f) ? wb::Integrand(*m.find_motivic(pair.f))
                                             : wb::Integrand(*m.find_exp(pair.f));
    auto domain = wb::parse_formula(pair.domain, m.env());
    wb::Assignment base{{"x", x}};
    auto got = wb::integrate_out(fd, f, domain.get(), {{"y", wb::Sort::VF}}, base, opts);
    mpq_class want = wb::eval_motivic(fd, opts.eval_box, *m.find_motivic(pair.g), base);
    Outcome o;
    o.detail = pair.name + " at x = " + wb::format_vf(fd, x) + ": got " + got.value.to_string() + ", want " +
               want.get_str();
    if (got.unknown_cells > 0 || got.status != wb::TailStatus::ResolvedGeometric) {
        o.detail += " (unresolved)";
        return o;
    }
    if (got.value.exact && got.value.value.is_rational())
        o.ok = got.value.value.rational() == want;
    else
        o.ok = std::abs(got.value.to_complex() - want.get_d()) < 1e-9;
    return o;
}

} // namespace closure
