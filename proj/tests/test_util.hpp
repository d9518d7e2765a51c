#ifndef TWINCG_TEST_UTIL_HPP
#define TWINCG_TEST_UTIL_HPP

// Independent reference computations for the test suites. Nothing here calls
// into the library's kernels.

#include "twincg/sparse.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace twincg::test {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const CsrMatrix& a) {
    Dense d(a.n(), std::vector<double>(a.n(), 0.0));
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto va = a.values();
    for (std::size_t i = 0; i < a.n(); ++i) {
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
            d[i][ci[k]] = va[k];
        }
    }
    return d;
}

/// Dense product in long double.
inline std::vector<long double> dense_matvec(const Dense& a, const std::vector<double>& x) {
    std::vector<long double> y(a.size(), 0.0L);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            y[i] += static_cast<long double>(a[i][j]) * x[j];
        }
    }
    return y;
}

/// Kahan-compensated long double dot product.
inline long double compensated_dot(const std::vector<double>& a, const std::vector<double>& b) {
    long double sum = 0.0L;
    long double c = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const long double y = static_cast<long double>(a[i]) * b[i] - c;
        const long double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

inline long double dense_frobenius(const Dense& a) {
    long double s = 0.0L;
    for (const auto& row : a) {
        for (const double v : row) {
            s += static_cast<long double>(v) * v;
        }
    }
    return std::sqrt(s);
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& e : v) {
        e = dist(gen);
    }
    return v;
}

inline bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
    }
    return true;
}

inline bool same_bits(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

/// ULP distance between two finite doubles of the same sign.
inline std::uint64_t ulp_distance(double a, double b) {
    const auto ia = std::bit_cast<std::int64_t>(a);
    const auto ib = std::bit_cast<std::int64_t>(b);
    return ia > ib ? static_cast<std::uint64_t>(ia - ib) : static_cast<std::uint64_t>(ib - ia);
}

} // namespace twincg::test

#endif // TWINCG_TEST_UTIL_HPP
