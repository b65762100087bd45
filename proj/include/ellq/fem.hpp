#pragma once

#include "ellq/dense.hpp"
#include "ellq/mesh.hpp"
#include "ellq/sparse.hpp"
#include "ellq/types.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <ostream>
#include <string>

namespace ellq {

using ScalarField = std::function<double(double, double)>;

/// Isotropic scalar diffusivity a(x, y) > 0.
struct CoefficientField {
    ScalarField evaluate;

    static CoefficientField constant(double value);
};

struct SpectralSummary {
    double sigma_min_G = 0.0;
    double norm_G = 0.0;
    double lambda_min_A = 0.0;
    double lambda_max_A = 0.0;
    double kappa_A = 0.0;
};

/// Mass-normalized first-order system: A = G^T G, right-hand side b.
///
/// G has two rows per triangle (the x and y components of the weighted
/// gradient) and one column per interior DOF. Vectors live in discrete-L2
/// coordinates, i.e. x = M^{1/2} u_nodal with the lumped mass M.
/// Copies share the lazily computed spectral data and Cholesky factor, so
/// G must never change after construction.
class EllipticSystem {
public:
    EllipticSystem(SparseMatrix g, Vector b, Vector mass_sqrt_inv,
                   std::shared_ptr<const Mesh> mesh = nullptr);

    [[nodiscard]] const SparseMatrix& G() const noexcept { return g_; }
    [[nodiscard]] const Vector& b() const noexcept { return b_; }
    [[nodiscard]] const Vector& mass_sqrt_inv() const noexcept { return mass_sqrt_inv_; }
    [[nodiscard]] const std::shared_ptr<const Mesh>& mesh() const noexcept { return mesh_; }
    [[nodiscard]] const std::string& mass_model() const noexcept { return mass_model_; }

    [[nodiscard]] std::size_t n_dof() const noexcept { return g_.cols(); }
    [[nodiscard]] std::size_t n_flux() const noexcept { return g_.rows(); }

    /// Same operator, different load vector.
    [[nodiscard]] EllipticSystem with_load(Vector b) const;

    /// Dense SVD of G, computed once on first use.
    [[nodiscard]] const SpectralSummary& spectral() const;
    /// Cholesky of G^T G, computed once on first use.
    [[nodiscard]] const GramCholesky& factorization() const;

private:
    struct Cache;

    SparseMatrix g_;
    Vector b_;
    Vector mass_sqrt_inv_;
    std::shared_ptr<const Mesh> mesh_;
    std::string mass_model_ = "lumped";
    std::shared_ptr<Cache> cache_;
};

/// Rows 2K, 2K+1 hold sqrt(|K| a(centroid_K)) * grad(phi_j)|_K for the
/// interior vertices j of triangle K. Throws AssemblyError naming the
/// triangle when the coefficient is not positive at a centroid.
[[nodiscard]] SparseMatrix assemble_gradient_factor(const Mesh& mesh, const CoefficientField& coeff);

struct LumpedMass {
    Vector node;      ///< every mesh node
    Vector interior;  ///< restricted to interior DOFs
};

[[nodiscard]] LumpedMass assemble_lumped_mass(const Mesh& mesh);

/// Load integrals against interior hat functions, mid-edge rule per triangle.
[[nodiscard]] Vector assemble_load(const Mesh& mesh, const ScalarField& f);

/// G = G_raw diag(M^{-1/2}), b = diag(M^{-1/2}) b_raw. Throws AssemblyError
/// for non-positive mass entries.
[[nodiscard]] EllipticSystem normalize_system(const SparseMatrix& raw_factor, const Vector& raw_load,
                                              const Vector& interior_mass,
                                              std::shared_ptr<const Mesh> mesh = nullptr);

[[nodiscard]] EllipticSystem assemble_system(const Mesh& mesh, const CoefficientField& coeff,
                                             const ScalarField& f);

/// Throws SizeLimitExceeded above the dense ceiling.
[[nodiscard]] SpectralSummary spectral_summary(const EllipticSystem& system);

[[nodiscard]] Vector direct_solve(const EllipticSystem& system, const Vector& b);

/// Nodal interpolant of `u` at interior nodes, mapped to normalized
/// coordinates (multiplied by M^{1/2}).
[[nodiscard]] Vector interpolate_normalized(const EllipticSystem& system, const ScalarField& u);

/// `n,h,sigma_min,norm_G,lambda_min,lambda_max,kappa`
void write_spectral_header(std::ostream& out);
void write_spectral_row(std::ostream& out, int n, const SpectralSummary& s);

void dump_system(const EllipticSystem& system, const std::filesystem::path& g_path,
                 const std::filesystem::path& b_path);

}  // namespace ellq
