#pragma once

// Exact arithmetic in the cyclotomic fields Q(zeta_{p^K}).

#include <complex>
#include <cstdint>
#include <map>
#include <string>

#include <gmpxx.h>

namespace wb {

/// sum_k c_k zeta^k with zeta = exp(2 pi i / p^K), kept in the canonical
/// basis {zeta^k : k < p^K - p^(K-1)} at the smallest level K that holds the
/// value. Rationals have K = 0 and combine with any prime.
class Cyclo {
public:
    Cyclo() = default;
    Cyclo(const mpq_class& q); // NOLINT: rationals convert implicitly
    Cyclo(long n) : Cyclo(mpq_class(n)) {}

    /// zeta_{p^K}^k.
    static Cyclo root(int p, int K, std::int64_t k);

    int prime() const { return p_; }
    int level() const { return K_; }
    bool is_zero() const { return c_.empty(); }
    bool is_rational() const { return K_ == 0; }
    /// Throws DomainError unless rational.
    mpq_class rational() const;
    const std::map<std::int64_t, mpq_class>& coefficients() const { return c_; }

    Cyclo& operator+=(const Cyclo& o);
    Cyclo& operator-=(const Cyclo& o);
    Cyclo& operator*=(const Cyclo& o);
    friend Cyclo operator+(Cyclo a, const Cyclo& b) { return a += b; }
    friend Cyclo operator-(Cyclo a, const Cyclo& b) { return a -= b; }
    friend Cyclo operator*(Cyclo a, const Cyclo& b) { return a *= b; }
    Cyclo operator-() const;
    bool operator==(const Cyclo& o) const { return p_ == o.p_ && K_ == o.K_ && c_ == o.c_; }

    std::complex<double> to_complex() const;
    double abs() const { return std::abs(to_complex()); }

    /// "5/6", or "1/2 + -1*e(3/25)" style listing of the basis terms.
    std::string to_string() const;

private:
    int p_ = 0;
    int K_ = 0;
    std::map<std::int64_t, mpq_class> c_; ///< exponent modulo p^K -> coefficient, no zeros

    std::int64_t modulus() const;
    void lift_to(int p, int K);
    void canonicalize();
};

} // namespace wb
