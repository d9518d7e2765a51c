#ifndef TWINCG_SPARSE_HPP
#define TWINCG_SPARSE_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace twincg {

using DenseVector = std::vector<double>;

/// Raised when operand lengths do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// One (row, col, value) entry, 0-based.
struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Square sparse matrix in compressed-row storage.
///
/// Rows are kept in canonical form (strictly increasing column index). The
/// Frobenius norm is computed once at construction and reflects the values
/// at that point; transient in-place edits through values_mut() do not
/// refresh it.
class CsrMatrix {
public:
    CsrMatrix() = default;

    /// Takes ownership of already-built CSR arrays. Validates every
    /// structural invariant and throws std::invalid_argument on violation.
    CsrMatrix(std::size_t n, std::vector<std::size_t> row_ptr,
              std::vector<std::size_t> col_idx, std::vector<double> values);

    /// Builds from unordered triplets; duplicates are summed.
    static CsrMatrix from_triplets(std::size_t n, std::vector<Triplet> entries);

    std::size_t n() const noexcept { return n_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values_mut() noexcept { return values_; }

    /// Frobenius norm over stored nonzeros.
    double frobenius_norm() const noexcept { return frobenius_; }

    /// Value at (i, j), 0 if not stored. Binary search within the row.
    double at(std::size_t i, std::size_t j) const;

    bool is_structurally_symmetric() const;
    bool is_symmetric() const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
    double frobenius_ = 0.0;
};

// Vector kernels. All reductions accumulate strictly left to right so two
// calls on identical inputs give identical bits.

/// y = A * x, rows accumulated in ascending column order.
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
DenseVector spmv(const CsrMatrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// y = x + beta * y (the CG direction update)
void xpby(std::span<const double> x, double beta, std::span<double> y);

void copy(std::span<const double> src, std::span<double> dst);

/// Frobenius norm over stored nonzeros.
inline double matrix_norm(const CsrMatrix& a) { return a.frobenius_norm(); }

/// 5-point Laplacian on a k x k grid, n = k^2.
CsrMatrix gen_poisson2d(std::size_t k);
/// 7-point Laplacian on a k x k x k grid, n = k^3.
CsrMatrix gen_poisson3d(std::size_t k);

/// Malformed Matrix Market input. what() carries the line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message, const std::string& source = {});
    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

CsrMatrix load_matrix_market(const std::filesystem::path& path);
CsrMatrix parse_matrix_market(std::istream& in);

/// Writes every stored entry with a "general" header, 17 significant digits.
void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path);
void write_matrix_market(const CsrMatrix& a, std::ostream& out);

} // namespace twincg

#endif // TWINCG_SPARSE_HPP
