#pragma once

#include "exterior.hpp"
#include "integer.hpp"
#include "matrix.hpp"

#include <cstdint>
#include <random>

// Seeded generators for property checks.
namespace geo4::sampling {

using Rng = std::mt19937_64;

inline std::int64_t uniform(Rng& rng, std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline KVector random_kvector(Rng& rng, unsigned n, unsigned k, std::int64_t bound, double density = 0.6) {
    KVector v(n, k);
    std::bernoulli_distribution keep(density);
    for (std::size_t i = 0; i < v.size(); ++i)
        if (keep(rng)) v.set(i, uniform(rng, -bound, bound));
    return v;
}

inline IntMatrix random_symmetric(Rng& rng, std::size_t n, std::int64_t bound) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = uniform(rng, -bound, bound);
    return m;
}

inline IntMatrix random_matrix(Rng& rng, std::size_t n, std::int64_t bound) {
    IntMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = uniform(rng, -bound, bound);
    return m;
}

// Product of random elementary transvections and sign flips; det = +1 unless flips are allowed.
inline IntMatrix random_unimodular(Rng& rng, std::size_t n, std::size_t steps, bool allow_negative_det = true) {
    IntMatrix m = IntMatrix::identity(n);
    if (n == 0) return m;
    for (std::size_t s = 0; s < steps; ++s) {
        const auto i = static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(n) - 1));
        const auto j = static_cast<std::size_t>(uniform(rng, 0, static_cast<std::int64_t>(n) - 1));
        if (i == j) {
            if (allow_negative_det)
                for (std::size_t r = 0; r < n; ++r) m(r, i) = -m(r, i);
            continue;
        }
        const std::int64_t q = uniform(rng, -2, 2);
        for (std::size_t r = 0; r < n; ++r) m(r, j) += q * m(r, i);
    }
    return m;
}

}  // namespace geo4::sampling
