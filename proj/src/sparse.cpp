#include "ellq/sparse.hpp"

#include "ellq/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

namespace ellq {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
    for (const auto& t : entries) {
        if (t.row >= rows || t.col >= cols) {
            throw DimensionMismatch("SparseMatrix::from_triplets: entry (" + std::to_string(t.row) + ", " +
                                    std::to_string(t.col) + ") outside " + std::to_string(rows) + "x" +
                                    std::to_string(cols));
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseMatrix m(rows, cols);
    std::size_t i = 0;
    while (i < entries.size()) {
        const std::size_t r = entries[i].row;
        const std::size_t c = entries[i].col;
        double sum = 0.0;
        for (; i < entries.size() && entries[i].row == r && entries[i].col == c; ++i) {
            sum += entries[i].value;
        }
        if (sum != 0.0) {
            m.col_idx_.push_back(c);
            m.values_.push_back(sum);
            ++m.row_ptr_[r + 1];
        }
    }
    for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(t));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
    std::vector<Triplet> t;
    for (Eigen::Index r = 0; r < dense.rows(); ++r) {
        for (Eigen::Index c = 0; c < dense.cols(); ++c) {
            if (dense(r, c) != 0.0) {
                t.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), dense(r, c)});
            }
        }
    }
    return from_triplets(static_cast<std::size_t>(dense.rows()), static_cast<std::size_t>(dense.cols()),
                         std::move(t));
}

double SparseMatrix::coeff(std::size_t row, std::size_t col) const {
    const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_.at(row));
    const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_.at(row + 1));
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void SparseMatrix::multiply(const Vector& in, Vector& out) const {
    if (static_cast<std::size_t>(in.size()) != cols_) {
        throw DimensionMismatch("spmv: vector length " + std::to_string(in.size()) + " vs " +
                                std::to_string(cols_) + " columns");
    }
    out.resize(static_cast<Eigen::Index>(rows_));
    const double* x = in.data();
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += values_[k] * x[col_idx_[k]];
        out[static_cast<Eigen::Index>(r)] = acc;
    }
}

void SparseMatrix::multiply_transpose(const Vector& in, Vector& out) const {
    if (static_cast<std::size_t>(in.size()) != rows_) {
        throw DimensionMismatch("spmv_transpose: vector length " + std::to_string(in.size()) + " vs " +
                                std::to_string(rows_) + " rows");
    }
    out.setZero(static_cast<Eigen::Index>(cols_));
    double* y = out.data();
    for (std::size_t r = 0; r < rows_; ++r) {
        const double xr = in[static_cast<Eigen::Index>(r)];
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) y[col_idx_[k]] += values_[k] * xr;
    }
}

SparseMatrix SparseMatrix::scale_columns(const Vector& d) const {
    if (static_cast<std::size_t>(d.size()) != cols_) {
        throw DimensionMismatch("scale_columns: scaling length does not match column count");
    }
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            t.push_back({r, col_idx_[k], values_[k] * d[static_cast<Eigen::Index>(col_idx_[k])]});
        }
    }
    return from_triplets(rows_, cols_, std::move(t));
}

SparseMatrix SparseMatrix::scaled(double factor) const {
    SparseMatrix m = *this;
    if (factor == 0.0) return SparseMatrix(rows_, cols_);
    for (auto& v : m.values_) v *= factor;
    return m;
}

std::vector<std::size_t> SparseMatrix::column_counts() const {
    std::vector<std::size_t> counts(cols_, 0);
    for (auto c : col_idx_) ++counts[c];
    return counts;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix d = DenseMatrix::Zero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_idx_[k])) = values_[k];
        }
    }
    return d;
}

bool SparseMatrix::well_formed() const {
    if (row_ptr_.size() != rows_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != values_.size() ||
        col_idx_.size() != values_.size()) {
        return false;
    }
    for (std::size_t r = 0; r < rows_; ++r) {
        if (row_ptr_[r] > row_ptr_[r + 1]) return false;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            if (col_idx_[k] >= cols_ || values_[k] == 0.0) return false;
            if (k > row_ptr_[r] && col_idx_[k] <= col_idx_[k - 1]) return false;
        }
    }
    return true;
}

Vector spmv(const SparseMatrix& m, const Vector& v) {
    Vector out;
    m.multiply(v, out);
    return out;
}

Vector spmv_transpose(const SparseMatrix& m, const Vector& v) {
    Vector out;
    m.multiply_transpose(v, out);
    return out;
}

void write_matrix_market(const SparseMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_matrix_market: cannot open " + path.string());
    out.precision(17);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    const auto rp = m.row_ptr();
    const auto ci = m.col_idx();
    const auto vals = m.values();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
            out << r + 1 << ' ' << ci[k] + 1 << ' ' << vals[k] << '\n';
        }
    }
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_matrix_market: cannot open " + path.string());
    std::string line;
    while (std::getline(in, line) && !line.empty() && line[0] == '%') {
    }
    std::istringstream header(line);
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t nnz = 0;
    if (!(header >> rows >> cols >> nnz)) throw Error("read_matrix_market: malformed size line in " + path.string());
    std::vector<Triplet> t;
    t.reserve(nnz);
    for (std::size_t k = 0; k < nnz; ++k) {
        std::size_t r = 0;
        std::size_t c = 0;
        double v = 0.0;
        if (!(in >> r >> c >> v) || r == 0 || c == 0) {
            throw Error("read_matrix_market: malformed entry " + std::to_string(k) + " in " + path.string());
        }
        t.push_back({r - 1, c - 1, v});
    }
    return SparseMatrix::from_triplets(rows, cols, std::move(t));
}

void write_vector(const Vector& v, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_vector: cannot open " + path.string());
    out.precision(17);
    for (Eigen::Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
}

Vector read_vector(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("read_vector: cannot open " + path.string());
    std::vector<double> values;
    double x = 0.0;
    while (in >> x) values.push_back(x);
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace ellq
