#pragma once

#include "ellq/sparse.hpp"
#include "ellq/types.hpp"

#include <Eigen/Cholesky>
#include <cstddef>
#include <string_view>

namespace ellq {

/// Size ceiling for every dense operation. Defaults to 4096 unknowns and can
/// be overridden through the ELLQ_DENSE_CEILING environment variable.
[[nodiscard]] std::size_t dense_ceiling();

/// Throws SizeLimitExceeded when `n` exceeds dense_ceiling().
void require_dense(std::size_t n, std::string_view what);

struct SymmetricEigen {
    Vector values;        ///< ascending
    DenseMatrix vectors;  ///< orthonormal columns
};

/// Throws InvalidParameter when `a` is not symmetric to 1e-12 (relative to
/// its largest entry).
[[nodiscard]] SymmetricEigen dense_eig_sym(const DenseMatrix& a);

/// e^{tM} v by scaling and squaring with a Pade approximant.
[[nodiscard]] Vector dense_expm_apply(const DenseMatrix& m, double t, const Vector& v);
[[nodiscard]] DenseMatrix dense_expm(const DenseMatrix& m, double t);

/// Dense Cholesky factorization of A = G^T G, reused across solves.
class GramCholesky {
public:
    explicit GramCholesky(const SparseMatrix& g);

    [[nodiscard]] Vector solve(const Vector& rhs) const;
    [[nodiscard]] std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_ = 0;
    Eigen::LLT<DenseMatrix> llt_;
};

/// Reference solution of G^T G x = b; throws FactorizationError when the
/// Gram matrix is not numerically SPD.
[[nodiscard]] Vector direct_solve(const SparseMatrix& g, const Vector& b);

}  // namespace ellq
