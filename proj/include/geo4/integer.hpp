#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace geo4 {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Error taxonomy; the CLI maps each kind to a fixed exit status.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : Error {
    using Error::Error;
};
struct ConfigError : DomainError {
    using DomainError::DomainError;
};
struct BudgetError : DomainError {
    using DomainError::DomainError;
};
struct NotImplementedError : DomainError {
    using DomainError::DomainError;
};
struct ClassificationUnsupported : DomainError {
    using DomainError::DomainError;
};
struct ParseError : Error {
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};
// Internal inconsistency: a postcondition or cross-check failed.
struct InconsistencyError : Error {
    using Error::Error;
};
// A realized point lies strictly below a proven lower bound.
struct ContradictionError : InconsistencyError {
    using InconsistencyError::InconsistencyError;
};

inline Integer abs(const Integer& x) { return x < 0 ? Integer(-x) : x; }

inline Integer gcd(Integer a, Integer b) {
    a = abs(a);
    b = abs(b);
    while (b != 0) {
        Integer r = a % b;
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

struct Bezout {
    Integer g, x, y;  // g = a*x + b*y, g >= 0
};

inline Bezout extended_gcd(const Integer& a, const Integer& b) {
    Integer old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        Integer q = old_r / r;
        Integer tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
        tmp = old_t - q * t;
        old_t = t;
        t = tmp;
    }
    if (old_r < 0) return {-old_r, -old_s, -old_t};
    return {old_r, old_s, old_t};
}

// Floor division for signed integers (cpp_int truncates toward zero).
inline Integer floor_div(const Integer& a, const Integer& b) {
    Integer q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline std::string to_string(const Rational& r) {
    std::ostringstream os;
    os << boost::multiprecision::numerator(r);
    if (boost::multiprecision::denominator(r) != 1) os << '/' << boost::multiprecision::denominator(r);
    return os.str();
}

inline std::int64_t to_i64(const Integer& x) {
    if (x > std::numeric_limits<std::int64_t>::max() || x < std::numeric_limits<std::int64_t>::min())
        throw DomainError("integer does not fit in 64 bits: " + x.str());
    return x.convert_to<std::int64_t>();
}

inline Integer binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    Integer r = 1;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Small binomials for index arithmetic (n <= 62 safe).
inline std::uint64_t binom64(unsigned n, unsigned k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

namespace modarith {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 powmod(u64 a, u64 e, u64 m) {
    u64 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

inline u64 inverse(u64 a, u64 p) { return powmod(a, p - 2, p); }  // p prime

// Deterministic Miller-Rabin for all 64-bit inputs.
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 q : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % q == 0) return n == q;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

inline u64 reduce(const Integer& x, u64 p) {
    Integer r = x % p;
    if (r < 0) r += p;
    return r.convert_to<u64>();
}

// Euler criterion; 0 counts as a square.
inline bool is_square(u64 a, u64 p) {
    a %= p;
    if (a == 0 || p == 2) return true;
    return powmod(a, (p - 1) / 2, p) == 1;
}

// Tonelli-Shanks square root mod an odd prime; requires is_square(a, p).
inline u64 sqrt_mod(u64 a, u64 p) {
    a %= p;
    if (a == 0 || p == 2) return a;
    u64 q = p - 1;
    int s = 0;
    while ((q & 1) == 0) {
        q >>= 1;
        ++s;
    }
    u64 z = 2;
    while (is_square(z, p)) ++z;
    u64 m = static_cast<u64>(s), c = powmod(z, q, p), t = powmod(a, q, p), r = powmod(a, (q + 1) / 2, p);
    while (t != 1) {
        u64 i = 0, tt = t;
        while (tt != 1) {
            tt = mulmod(tt, tt, p);
            ++i;
        }
        u64 b = c;
        for (u64 j = 0; j + 1 < m - i; ++j) b = mulmod(b, b, p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    return r;
}

// Largest primes below 2^61, generated on demand and cached per thread.
inline const std::vector<u64>& large_primes(std::size_t count) {
    thread_local std::vector<u64> primes;
    u64 candidate = primes.empty() ? (1ull << 61) - 1 : primes.back() - 2;
    while (primes.size() < count) {
        if (is_prime(candidate)) primes.push_back(candidate);
        candidate -= 2;
    }
    return primes;
}

}  // namespace modarith

// Primes dividing |x|: trial division to 10^6, then a primality test on the cofactor.
// A composite cofactor with no small factor is returned in `unfactored`.
struct Factorization {
    std::vector<Integer> primes;
    Integer unfactored = 1;
};

inline Factorization prime_divisors(Integer x) {
    Factorization f;
    x = abs(x);
    if (x < 2) return f;
    for (std::uint64_t q = 2; q <= 1000000 && Integer(q) * q <= x; q += (q == 2 ? 1 : 2)) {
        if (x % q == 0) {
            f.primes.emplace_back(q);
            while (x % q == 0) x /= q;
        }
    }
    if (x > 1) {
        if (x <= std::numeric_limits<std::uint64_t>::max() && modarith::is_prime(x.convert_to<std::uint64_t>()))
            f.primes.push_back(x);
        else if (Integer(1000000) * 1000000 >= x)
            f.primes.push_back(x);
        else
            f.unfactored = x;
    }
    return f;
}

inline bool is_prime(const Integer& p) {
    if (p < 2) return false;
    if (p <= std::numeric_limits<std::uint64_t>::max()) return modarith::is_prime(p.convert_to<std::uint64_t>());
    throw DomainError("primality of integers above 2^64 is not supported: " + p.str());
}

}  // namespace geo4
