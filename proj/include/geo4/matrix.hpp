#pragma once

#include "integer.hpp"

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace geo4 {

// Dense row-major matrix with value semantics.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0)) {}
    Matrix(std::initializer_list<std::initializer_list<T>> init) {
        rows_ = init.size();
        cols_ = rows_ ? init.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) throw DomainError("ragged matrix initializer");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    bool symmetric() const {
        if (!square()) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                if ((*this)(i, j) != (*this)(j, i)) return false;
        return true;
    }

    bool is_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](const T& x) { return x == 0; });
    }

    void swap_rows(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
    }
    void swap_cols(std::size_t a, std::size_t b) {
        if (a == b) return;
        for (std::size_t i = 0; i < rows_; ++i) std::swap((*this)(i, a), (*this)(i, b));
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw DomainError("matrix shape mismatch in product");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                if (a(i, k) == 0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += a(i, k) * b(k, j);
            }
        return c;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

using IntMatrix = Matrix<Integer>;

inline std::string to_string(const IntMatrix& m) {
    std::ostringstream os;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
        os << '\n';
    }
    return os.str();
}

inline std::size_t bit_length(const Integer& x) {
    return x == 0 ? 0 : boost::multiprecision::msb(abs(x)) + 1;
}

// Product over rows of max(1, |row|^2). Its square root bounds every minor.
inline Integer hadamard_square(const IntMatrix& m) {
    Integer h = 1;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Integer s = 0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
        if (s > 1) h *= s;
    }
    return h;
}

namespace detail {

// Minors stay below 2^41 and triple products below 2^126 when this holds,
// so 64-bit storage with 128-bit intermediates is exact.
inline bool fits_machine_words(const IntMatrix& m) { return bit_length(hadamard_square(m)) <= 82; }

template <class T>
std::vector<T> to_words(const IntMatrix& m) {
    std::vector<T> out;
    out.reserve(m.rows() * m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out.push_back(static_cast<T>(m(i, j).template convert_to<std::int64_t>()));
    return out;
}

template <class T, class W>
T bareiss(std::vector<T> a, std::size_t n) {
    auto at = [&](std::size_t i, std::size_t j) -> T& { return a[i * n + j]; };
    int sign = 1;
    T prev = 1;
    for (std::size_t k = 0; k < n; ++k) {
        if (at(k, k) == 0) {
            std::size_t r = k + 1;
            while (r < n && at(r, k) == 0) ++r;
            if (r == n) return T(0);
            for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(r, j));
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                W num = W(at(k, k)) * W(at(i, j)) - W(at(i, k)) * W(at(k, j));
                at(i, j) = static_cast<T>(num / W(prev));
            }
            at(i, k) = 0;
        }
        prev = at(k, k);
    }
    return n == 0 ? T(1) : T(sign) * at(n - 1, n - 1);
}

}  // namespace detail

// Fraction-free (Bareiss) determinant.
inline Integer determinant(const IntMatrix& m) {
    if (!m.square()) throw DomainError("determinant of a non-square matrix");
    const std::size_t n = m.rows();
    if (detail::fits_machine_words(m))
        return Integer(detail::bareiss<std::int64_t, __int128>(detail::to_words<std::int64_t>(m), n));
    std::vector<Integer> a;
    a.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a.push_back(m(i, j));
    return detail::bareiss<Integer, Integer>(std::move(a), n);
}

// Gaussian elimination over F_p; returns the residue of det.
inline std::uint64_t determinant_mod(const IntMatrix& m, std::uint64_t p) {
    using namespace modarith;
    const std::size_t n = m.rows();
    std::vector<u64> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = reduce(m(i, j), p);
    u64 det = 1;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t r = k;
        while (r < n && a[r * n + k] == 0) ++r;
        if (r == n) return 0;
        if (r != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[r * n + j]);
            det = (p - det) % p;
        }
        det = mulmod(det, a[k * n + k], p);
        u64 inv = inverse(a[k * n + k], p);
        for (std::size_t i = k + 1; i < n; ++i) {
            u64 f = mulmod(a[i * n + k], inv, p);
            if (f == 0) continue;
            for (std::size_t j = k; j < n; ++j) a[i * n + j] = (a[i * n + j] + p - mulmod(f, a[k * n + j], p)) % p;
        }
    }
    return det;
}

// Determinant by Chinese remaindering over 61-bit primes until the Hadamard bound is covered.
inline Integer determinant_modular(const IntMatrix& m) {
    if (!m.square()) throw DomainError("determinant of a non-square matrix");
    Integer bound = boost::multiprecision::sqrt(hadamard_square(m)) + 1;
    Integer modulus = 1, residue = 0;
    std::size_t used = 0;
    while (modulus <= 2 * bound) {
        const auto& primes = modarith::large_primes(used + 1);
        std::uint64_t p = primes[used++];
        Integer r = determinant_mod(m, p);
        // residue + modulus * t == r (mod p)
        Integer diff = (r - residue) % p;
        if (diff < 0) diff += p;
        std::uint64_t inv = modarith::inverse(modarith::reduce(modulus, p), p);
        Integer t = (diff * inv) % p;
        residue += modulus * t;
        modulus *= p;
    }
    if (residue > modulus / 2) residue -= modulus;
    return residue;
}

inline std::size_t rank_mod(const IntMatrix& m, std::uint64_t p) {
    using namespace modarith;
    const std::size_t rows = m.rows(), cols = m.cols();
    std::vector<u64> a(rows * cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) a[i * cols + j] = reduce(m(i, j), p);
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < rows; ++c) {
        std::size_t r = rank;
        while (r < rows && a[r * cols + c] == 0) ++r;
        if (r == rows) continue;
        for (std::size_t j = 0; j < cols; ++j) std::swap(a[rank * cols + j], a[r * cols + j]);
        u64 inv = inverse(a[rank * cols + c], p);
        for (std::size_t i = rank + 1; i < rows; ++i) {
            u64 f = mulmod(a[i * cols + c], inv, p);
            if (f == 0) continue;
            for (std::size_t j = c; j < cols; ++j) a[i * cols + j] = (a[i * cols + j] + p - mulmod(f, a[rank * cols + j], p)) % p;
        }
        ++rank;
    }
    return rank;
}

namespace detail {

// Smith normal form diagonal. With a nonzero modulus D every entry is kept reduced mod D,
// which is valid when D*Z^n lies in the column lattice (D = |det| for nonsingular input);
// the divisors are then gcd(d_i, D).
inline std::vector<Integer> smith_diagonal(IntMatrix a, const Integer& modulus, std::size_t growth_bits, bool& overflowed) {
    const std::size_t rows = a.rows(), cols = a.cols(), steps = std::min(rows, cols);
    overflowed = false;
    auto reduce_entry = [&](Integer& x) {
        if (modulus != 0) {
            x %= modulus;
            if (x < 0) x += modulus;
        }
    };
    auto check_growth = [&](const Integer& x) {
        if (growth_bits && bit_length(x) > growth_bits) overflowed = true;
    };
    std::vector<Integer> diag;
    for (std::size_t t = 0; t < steps; ++t) {
        for (;;) {
            // Pivot: smallest nonzero magnitude in the trailing block.
            std::size_t pi = rows, pj = cols;
            for (std::size_t i = t; i < rows; ++i)
                for (std::size_t j = t; j < cols; ++j)
                    if (a(i, j) != 0 && (pi == rows || abs(a(i, j)) < abs(a(pi, pj)))) {
                        pi = i;
                        pj = j;
                    }
            if (pi == rows) {
                diag.resize(steps, modulus);
                if (modulus != 0)
                    for (auto& d : diag) d = gcd(d, modulus);
                return diag;
            }
            a.swap_rows(t, pi);
            a.swap_cols(t, pj);
            bool clean = true;
            for (std::size_t i = t + 1; i < rows; ++i) {
                if (a(i, t) == 0) continue;
                Integer q = a(i, t) / a(t, t);
                for (std::size_t j = t; j < cols; ++j) {
                    a(i, j) -= q * a(t, j);
                    reduce_entry(a(i, j));
                    check_growth(a(i, j));
                }
                if (a(i, t) != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < cols; ++j) {
                if (a(t, j) == 0) continue;
                Integer q = a(t, j) / a(t, t);
                for (std::size_t i = t; i < rows; ++i) {
                    a(i, j) -= q * a(i, t);
                    reduce_entry(a(i, j));
                    check_growth(a(i, j));
                }
                if (a(t, j) != 0) clean = false;
            }
            if (overflowed) return {};
            if (!clean) continue;
            // Divisibility: fold an offending row into the pivot row and repeat.
            std::size_t bad = rows;
            for (std::size_t i = t + 1; i < rows && bad == rows; ++i)
                for (std::size_t j = t + 1; j < cols; ++j)
                    if (a(i, j) % a(t, t) != 0) {
                        bad = i;
                        break;
                    }
            if (bad == rows) break;
            for (std::size_t j = t; j < cols; ++j) {
                a(t, j) += a(bad, j);
                reduce_entry(a(t, j));
            }
        }
        diag.push_back(abs(a(t, t)));
    }
    if (modulus != 0)
        for (auto& d : diag) d = gcd(d, modulus);
    return diag;
}

}  // namespace detail

// Diagonal of the Smith normal form (length min(rows, cols), nonnegative, each dividing the next).
// Entry growth beyond 2^256 on a nonsingular square input switches to elimination modulo |det|,
// cross-checked against the modular determinant.
inline std::vector<Integer> smith_normal_form(const IntMatrix& m) {
    bool overflowed = false;
    auto diag = detail::smith_diagonal(m, 0, 256, overflowed);
    if (!overflowed) return diag;
    if (m.square()) {
        Integer det = determinant(m);
        if (det != 0) {
            Integer modulus = abs(det);
            diag = detail::smith_diagonal(m, modulus, 0, overflowed);
            Integer product = 1;
            for (const auto& d : diag) product *= d;
            if (product != abs(determinant_modular(m)))
                throw InconsistencyError("Smith normal form disagrees with the modular determinant");
            return diag;
        }
    }
    return detail::smith_diagonal(m, 0, 0, overflowed);
}

// Exact inverse of a unimodular integer matrix (Gauss-Jordan over the rationals).
inline IntMatrix inverse_unimodular(const IntMatrix& m) {
    if (!m.square()) throw DomainError("inverse of a non-square matrix");
    const std::size_t n = m.rows();
    Matrix<Rational> a(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a(i, j) = Rational(m(i, j));
        a(i, n + i) = 1;
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t r = c;
        while (r < n && a(r, c) == 0) ++r;
        if (r == n) throw DomainError("matrix is singular");
        a.swap_rows(c, r);
        Rational piv = a(c, c);
        for (std::size_t j = 0; j < 2 * n; ++j) a(c, j) /= piv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == c || a(i, c) == 0) continue;
            Rational f = a(i, c);
            for (std::size_t j = 0; j < 2 * n; ++j) a(i, j) -= f * a(c, j);
        }
    }
    IntMatrix inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const Rational& x = a(i, n + j);
            if (boost::multiprecision::denominator(x) != 1) throw DomainError("matrix is not unimodular");
            inv(i, j) = boost::multiprecision::numerator(x);
        }
    return inv;
}

}  // namespace geo4
