#include "ellq/dense.hpp"

#include "ellq/error.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <cstdlib>
#include <string>

namespace ellq {

std::size_t dense_ceiling() {
    constexpr std::size_t kDefault = 4096;
    if (const char* env = std::getenv("ELLQ_DENSE_CEILING")) {
        try {
            const long long v = std::stoll(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return kDefault;
}

void require_dense(std::size_t n, std::string_view what) {
    const std::size_t ceiling = dense_ceiling();
    if (n > ceiling) {
        throw SizeLimitExceeded(std::string(what) + ": " + std::to_string(n) +
                                " unknowns exceed the dense ceiling of " + std::to_string(ceiling) +
                                "; use iterative estimates or raise ELLQ_DENSE_CEILING");
    }
}

SymmetricEigen dense_eig_sym(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw InvalidParameter("dense_eig_sym: matrix is not square");
    require_dense(static_cast<std::size_t>(a.rows()), "dense_eig_sym");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InvalidParameter("dense_eig_sym: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(a);
    if (solver.info() != Eigen::Success) throw FactorizationError("dense_eig_sym: eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

DenseMatrix dense_expm(const DenseMatrix& m, double t) {
    if (m.rows() != m.cols()) throw InvalidParameter("dense_expm: matrix is not square");
    require_dense(static_cast<std::size_t>(m.rows()), "dense_expm");
    if (t == 0.0) return DenseMatrix::Identity(m.rows(), m.cols());
    const DenseMatrix scaled = t * m;
    return scaled.exp();
}

Vector dense_expm_apply(const DenseMatrix& m, double t, const Vector& v) {
    if (v.size() != m.cols()) throw DimensionMismatch("dense_expm_apply: vector length mismatch");
    if (t == 0.0) return v;
    return dense_expm(m, t) * v;
}

GramCholesky::GramCholesky(const SparseMatrix& g) : n_(g.cols()) {
    require_dense(n_, "direct_solve");
    const DenseMatrix gd = g.to_dense();
    const DenseMatrix a = gd.transpose() * gd;
    llt_.compute(a);
    if (llt_.info() != Eigen::Success) {
        throw FactorizationError("direct_solve: Cholesky breakdown, G^T G is not positive definite");
    }
    // rounding can leave a tiny positive pivot on a singular Gram matrix
    const Vector d = llt_.matrixL().toDenseMatrix().diagonal();
    if (n_ > 0 && !(d.minCoeff() > 1e-8 * d.maxCoeff())) {
        throw FactorizationError("direct_solve: G^T G is numerically singular (G has dependent columns)");
    }
}

Vector GramCholesky::solve(const Vector& rhs) const {
    if (static_cast<std::size_t>(rhs.size()) != n_) throw DimensionMismatch("direct_solve: rhs length mismatch");
    return llt_.solve(rhs);
}

Vector direct_solve(const SparseMatrix& g, const Vector& b) {
    return GramCholesky(g).solve(b);
}

}  // namespace ellq
