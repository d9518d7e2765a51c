#include "twincg/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace twincg {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw DimensionError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

} // namespace

CsrMatrix::CsrMatrix(std::size_t n, std::vector<std::size_t> row_ptr,
                     std::vector<std::size_t> col_idx, std::vector<double> values)
    : n_(n), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
    if (row_ptr_.size() != n_ + 1) {
        throw std::invalid_argument("CsrMatrix: row_ptr must have n+1 entries");
    }
    if (row_ptr_.front() != 0 || row_ptr_.back() != values_.size() ||
        col_idx_.size() != values_.size()) {
        throw std::invalid_argument("CsrMatrix: row_ptr does not match nnz");
    }
    for (std::size_t i = 0; i < n_; ++i) {
        if (row_ptr_[i] > row_ptr_[i + 1]) {
            throw std::invalid_argument("CsrMatrix: row_ptr decreases at row " + std::to_string(i));
        }
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (col_idx_[k] >= n_) {
                throw std::invalid_argument("CsrMatrix: column index out of range in row " +
                                            std::to_string(i));
            }
            if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
                throw std::invalid_argument("CsrMatrix: row " + std::to_string(i) +
                                            " not in canonical order");
            }
        }
    }
    frobenius_ = norm2(values_);
}

CsrMatrix CsrMatrix::from_triplets(std::size_t n, std::vector<Triplet> entries) {
    for (const auto& t : entries) {
        if (t.row >= n || t.col >= n) {
            throw std::invalid_argument("CsrMatrix: triplet index out of range");
        }
    }
    // stable so duplicate summation order follows input order
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    std::vector<std::size_t> row_ptr(n + 1, 0);
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    col_idx.reserve(entries.size());
    values.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& t = entries[k];
        if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
            values.back() += t.value;
            continue;
        }
        col_idx.push_back(t.col);
        values.push_back(t.value);
        ++row_ptr[t.row + 1];
    }
    for (std::size_t i = 0; i < n; ++i) {
        row_ptr[i + 1] += row_ptr[i];
    }
    return CsrMatrix(n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) {
        throw std::out_of_range("CsrMatrix::at");
    }
    const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) {
        return 0.0;
    }
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

bool CsrMatrix::is_structurally_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t j = col_idx_[k];
            const auto first = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j]);
            const auto last = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j + 1]);
            if (!std::binary_search(first, last, i)) {
                return false;
            }
        }
    }
    return true;
}

bool CsrMatrix::is_symmetric() const {
    if (!is_structurally_symmetric()) {
        return false;
    }
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (values_[k] != at(col_idx_[k], i)) {
                return false;
            }
        }
    }
    return true;
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
    require_same_length(x.size(), a.n(), "spmv");
    require_same_length(y.size(), a.n(), "spmv");
    const auto rp = a.row_ptr();
    const auto ci = a.col_idx();
    const auto va = a.values();
    for (std::size_t i = 0; i < a.n(); ++i) {
        double sum = 0.0;
        for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
            sum += va[k] * x[ci[k]];
        }
        y[i] = sum;
    }
}

DenseVector spmv(const CsrMatrix& a, std::span<const double> x) {
    DenseVector y(a.n());
    spmv(a, x, y);
    return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_length(a.size(), b.size(), "dot");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

double norm2(std::span<const double> v) {
    // Kahan-compensated, still strictly left to right
    double sum = 0.0;
    double carry = 0.0;
    for (const double e : v) {
        const double y = e * e - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return std::sqrt(sum);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    require_same_length(x.size(), y.size(), "axpy");
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] += alpha * x[i];
    }
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
    require_same_length(x.size(), y.size(), "xpby");
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = x[i] + beta * y[i];
    }
}

void copy(std::span<const double> src, std::span<double> dst) {
    require_same_length(src.size(), dst.size(), "copy");
    std::copy(src.begin(), src.end(), dst.begin());
}

CsrMatrix gen_poisson2d(std::size_t k) {
    if (k < 2) {
        throw std::invalid_argument("gen_poisson2d: grid side must be >= 2");
    }
    const std::size_t n = k * k;
    std::vector<Triplet> t;
    t.reserve(5 * n);
    for (std::size_t iy = 0; iy < k; ++iy) {
        for (std::size_t ix = 0; ix < k; ++ix) {
            const std::size_t row = iy * k + ix;
            if (iy > 0) t.push_back({row, row - k, -1.0});
            if (ix > 0) t.push_back({row, row - 1, -1.0});
            t.push_back({row, row, 4.0});
            if (ix + 1 < k) t.push_back({row, row + 1, -1.0});
            if (iy + 1 < k) t.push_back({row, row + k, -1.0});
        }
    }
    return CsrMatrix::from_triplets(n, std::move(t));
}

CsrMatrix gen_poisson3d(std::size_t k) {
    if (k < 2) {
        throw std::invalid_argument("gen_poisson3d: grid side must be >= 2");
    }
    const std::size_t plane = k * k;
    const std::size_t n = plane * k;
    std::vector<Triplet> t;
    t.reserve(7 * n);
    for (std::size_t iz = 0; iz < k; ++iz) {
        for (std::size_t iy = 0; iy < k; ++iy) {
            for (std::size_t ix = 0; ix < k; ++ix) {
                const std::size_t row = iz * plane + iy * k + ix;
                if (iz > 0) t.push_back({row, row - plane, -1.0});
                if (iy > 0) t.push_back({row, row - k, -1.0});
                if (ix > 0) t.push_back({row, row - 1, -1.0});
                t.push_back({row, row, 6.0});
                if (ix + 1 < k) t.push_back({row, row + 1, -1.0});
                if (iy + 1 < k) t.push_back({row, row + k, -1.0});
                if (iz + 1 < k) t.push_back({row, row + plane, -1.0});
            }
        }
    }
    return CsrMatrix::from_triplets(n, std::move(t));
}

} // namespace twincg
