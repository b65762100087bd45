#pragma once

#include "ellq/types.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace ellq {

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing within
/// each row and no explicit zeros are stored.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols);

    /// Duplicate (row, col) entries are summed; entries that sum to exactly
    /// zero are dropped.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);
    static SparseMatrix identity(std::size_t n);
    static SparseMatrix from_dense(const DenseMatrix& dense);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }

    [[nodiscard]] std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    [[nodiscard]] std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

    /// Entry lookup by binary search in the row; zero when not stored.
    [[nodiscard]] double coeff(std::size_t row, std::size_t col) const;

    /// out = M * in. `out` is resized. No allocation when already sized.
    void multiply(const Vector& in, Vector& out) const;
    /// out = M^T * in.
    void multiply_transpose(const Vector& in, Vector& out) const;

    /// M * diag(d)
    [[nodiscard]] SparseMatrix scale_columns(const Vector& d) const;
    [[nodiscard]] SparseMatrix scaled(double factor) const;
    [[nodiscard]] std::vector<std::size_t> column_counts() const;
    [[nodiscard]] DenseMatrix to_dense() const;

    /// True when the CSR structural invariants hold.
    [[nodiscard]] bool well_formed() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

/// Throws DimensionMismatch when v.size() != M.cols().
[[nodiscard]] Vector spmv(const SparseMatrix& m, const Vector& v);
/// Throws DimensionMismatch when v.size() != M.rows().
[[nodiscard]] Vector spmv_transpose(const SparseMatrix& m, const Vector& v);

/// Matrix Market coordinate format, 1-based indices, full precision.
void write_matrix_market(const SparseMatrix& m, const std::filesystem::path& path);
[[nodiscard]] SparseMatrix read_matrix_market(const std::filesystem::path& path);

void write_vector(const Vector& v, const std::filesystem::path& path);
[[nodiscard]] Vector read_vector(const std::filesystem::path& path);

}  // namespace ellq
