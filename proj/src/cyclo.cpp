#include "wb/cyclo.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "wb/error.hpp"

namespace wb {

Cyclo::Cyclo(const mpq_class& q)
{
    if (q != 0) c_[0] = q;
}

Cyclo Cyclo::root(int p, int K, std::int64_t k)
{
    Cyclo r;
    r.p_ = p;
    r.K_ = K;
    std::int64_t M = r.modulus();
    k %= M;
    if (k < 0) k += M;
    r.c_[k] = 1;
    r.canonicalize();
    return r;
}

mpq_class Cyclo::rational() const
{
    if (K_ != 0) throw DomainError("value " + to_string() + " is not rational");
    auto it = c_.find(0);
    return it == c_.end() ? mpq_class(0) : it->second;
}

std::int64_t Cyclo::modulus() const
{
    std::int64_t M = 1;
    for (int i = 0; i < K_; ++i)
        M *= p_;
    return M;
}

void Cyclo::lift_to(int p, int K)
{
    if (K_ == 0) {
        p_ = p;
    } else if (p_ != p) {
        throw DomainError("cannot combine roots of unity of different primes");
    }
    std::int64_t f = 1;
    for (int i = K_; i < K; ++i)
        f *= p;
    if (f != 1) {
        std::map<std::int64_t, mpq_class> lifted;
        for (auto& [e, c] : c_)
            lifted.emplace(e * f, c);
        c_ = std::move(lifted);
    }
    K_ = K;
}

void Cyclo::canonicalize()
{
    if (K_ > 0) {
        std::int64_t M = modulus();
        std::int64_t step = M / p_;
        std::int64_t top = M - step;
        // zeta^(r + (p-1) step) = -sum_{j < p-1} zeta^(r + j step)
        std::vector<std::pair<std::int64_t, mpq_class>> high;
        for (auto it = c_.lower_bound(top); it != c_.end();)
        {
            high.emplace_back(it->first, it->second);
            it = c_.erase(it);
        }
        for (auto& [e, c] : high) {
            std::int64_t r = e - top;
            for (int j = 0; j < p_ - 1; ++j)
                c_[r + j * step] -= c;
        }
    }
    for (auto it = c_.begin(); it != c_.end();) {
        if (it->second == 0) it = c_.erase(it);
        else ++it;
    }
    while (K_ > 0) {
        bool divisible = true;
        for (auto& kv : c_)
            if (kv.first % p_ != 0) {
                divisible = false;
                break;
            }
        if (!divisible) break;
        std::map<std::int64_t, mpq_class> lowered;
        for (auto& [e, c] : c_)
            lowered.emplace(e / p_, c);
        c_ = std::move(lowered);
        --K_;
    }
    if (K_ == 0) p_ = 0;
}

Cyclo& Cyclo::operator+=(const Cyclo& o)
{
    if (o.is_zero()) return *this;
    if (is_zero()) return *this = o;
    int p = p_ ? p_ : o.p_;
    int K = std::max(K_, o.K_);
    Cyclo b = o;
    lift_to(p, K);
    b.lift_to(p, K);
    for (auto& [e, c] : b.c_)
        c_[e] += c;
    canonicalize();
    return *this;
}

Cyclo& Cyclo::operator-=(const Cyclo& o) { return *this += -o; }

Cyclo Cyclo::operator-() const
{
    Cyclo r = *this;
    for (auto& kv : r.c_)
        kv.second = -kv.second;
    return r;
}

Cyclo& Cyclo::operator*=(const Cyclo& o)
{
    if (is_zero() || o.is_zero()) return *this = Cyclo();
    int p = p_ ? p_ : o.p_;
    int K = std::max(K_, o.K_);
    Cyclo b = o;
    lift_to(p, K);
    b.lift_to(p, K);
    std::int64_t M = modulus();
    std::map<std::int64_t, mpq_class> out;
    for (auto& [e1, c1] : c_)
        for (auto& [e2, c2] : b.c_)
            out[(e1 + e2) % M] += c1 * c2;
    c_ = std::move(out);
    canonicalize();
    return *this;
}

std::complex<double> Cyclo::to_complex() const
{
    long double re = 0, im = 0;
    long double M = static_cast<long double>(modulus());
    for (auto& [e, c] : c_) {
        long double a = 2 * std::numbers::pi_v<long double> * static_cast<long double>(e) / M;
        long double v = c.get_d();
        re += v * std::cos(a);
        im += v * std::sin(a);
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

std::string Cyclo::to_string() const
{
    if (c_.empty()) return "0";
    if (K_ == 0) return c_.begin()->second.get_str();
    std::string s;
    std::int64_t M = modulus();
    for (auto& [e, c] : c_) {
        if (!s.empty()) s += " + ";
        s += c.get_str();
        if (e != 0) s += "*e(" + std::to_string(e) + "/" + std::to_string(M) + ")";
    }
    return s;
}

} // namespace wb
