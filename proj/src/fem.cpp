#include "ellq/fem.hpp"

#include "ellq/error.hpp"

#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <mutex>
#include <optional>

namespace ellq {

struct EllipticSystem::Cache {
    std::once_flag spectral_once;
    SpectralSummary spectral;
    std::once_flag factor_once;
    std::optional<GramCholesky> factor;
};

CoefficientField CoefficientField::constant(double value) {
    return {[value](double, double) { return value; }};
}

EllipticSystem::EllipticSystem(SparseMatrix g, Vector b, Vector mass_sqrt_inv, std::shared_ptr<const Mesh> mesh)
    : g_(std::move(g)),
      b_(std::move(b)),
      mass_sqrt_inv_(std::move(mass_sqrt_inv)),
      mesh_(std::move(mesh)),
      cache_(std::make_shared<Cache>()) {
    if (static_cast<std::size_t>(b_.size()) != g_.cols()) {
        throw DimensionMismatch("EllipticSystem: load length " + std::to_string(b_.size()) + " vs " +
                                std::to_string(g_.cols()) + " DOFs");
    }
    if (static_cast<std::size_t>(mass_sqrt_inv_.size()) != g_.cols()) {
        throw DimensionMismatch("EllipticSystem: mass scaling length does not match DOF count");
    }
}

EllipticSystem EllipticSystem::with_load(Vector b) const {
    if (b.size() != b_.size()) throw DimensionMismatch("EllipticSystem::with_load: load length mismatch");
    EllipticSystem copy = *this;
    copy.b_ = std::move(b);
    return copy;
}

const SpectralSummary& EllipticSystem::spectral() const {
    std::call_once(cache_->spectral_once, [this] { cache_->spectral = spectral_summary(*this); });
    return cache_->spectral;
}

const GramCholesky& EllipticSystem::factorization() const {
    std::call_once(cache_->factor_once, [this] { cache_->factor.emplace(g_); });
    return *cache_->factor;
}

namespace {

// Gradients of the three P1 basis functions of a triangle.
std::array<Point, 3> basis_gradients(const Point& p0, const Point& p1, const Point& p2, double area2) {
    return {Point{(p1.y - p2.y) / area2, (p2.x - p1.x) / area2},
            Point{(p2.y - p0.y) / area2, (p0.x - p2.x) / area2},
            Point{(p0.y - p1.y) / area2, (p1.x - p0.x) / area2}};
}

}  // namespace

SparseMatrix assemble_gradient_factor(const Mesh& mesh, const CoefficientField& coeff) {
    std::vector<Triplet> entries;
    entries.reserve(6 * mesh.num_triangles());
    for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
        const auto& tri = mesh.triangles[k];
        const Point& p0 = mesh.nodes[tri[0]];
        const Point& p1 = mesh.nodes[tri[1]];
        const Point& p2 = mesh.nodes[tri[2]];
        const double area = mesh.signed_area(k);
        const Point c = mesh.centroid(k);
        const double a = coeff.evaluate(c.x, c.y);
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw AssemblyError("assemble_gradient_factor: coefficient " + std::to_string(a) +
                                " is not positive at the centroid of triangle " + std::to_string(k));
        }
        const double weight = std::sqrt(area * a);
        const auto grads = basis_gradients(p0, p1, p2, 2.0 * area);
        for (int local = 0; local < 3; ++local) {
            const auto& dof = mesh.interior_index[tri[static_cast<std::size_t>(local)]];
            if (!dof) continue;
            entries.push_back({2 * k, *dof, weight * grads[static_cast<std::size_t>(local)].x});
            entries.push_back({2 * k + 1, *dof, weight * grads[static_cast<std::size_t>(local)].y});
        }
    }
    return SparseMatrix::from_triplets(2 * mesh.num_triangles(), mesh.n_dof, std::move(entries));
}

LumpedMass assemble_lumped_mass(const Mesh& mesh) {
    LumpedMass mass{Vector::Zero(static_cast<Eigen::Index>(mesh.nodes.size())),
                    Vector::Zero(static_cast<Eigen::Index>(mesh.n_dof))};
    for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
        const double share = mesh.signed_area(k) / 3.0;
        for (auto v : mesh.triangles[k]) mass.node[static_cast<Eigen::Index>(v)] += share;
    }
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
        if (const auto& dof = mesh.interior_index[v]) {
            mass.interior[static_cast<Eigen::Index>(*dof)] = mass.node[static_cast<Eigen::Index>(v)];
        }
    }
    return mass;
}

Vector assemble_load(const Mesh& mesh, const ScalarField& f) {
    Vector load = Vector::Zero(static_cast<Eigen::Index>(mesh.n_dof));
    for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
        const auto& tri = mesh.triangles[k];
        const double w = mesh.signed_area(k) / 3.0;
        std::array<double, 3> f_mid{};  // f_mid[i] sits on the edge opposite vertex i
        for (std::size_t i = 0; i < 3; ++i) {
            const Point& a = mesh.nodes[tri[(i + 1) % 3]];
            const Point& b = mesh.nodes[tri[(i + 2) % 3]];
            f_mid[i] = f(0.5 * (a.x + b.x), 0.5 * (a.y + b.y));
        }
        // phi_i is 1/2 on the two edges touching vertex i and 0 on the opposite one.
        for (std::size_t i = 0; i < 3; ++i) {
            if (const auto& dof = mesh.interior_index[tri[i]]) {
                load[static_cast<Eigen::Index>(*dof)] += w * 0.5 * (f_mid[(i + 1) % 3] + f_mid[(i + 2) % 3]);
            }
        }
    }
    return load;
}

EllipticSystem normalize_system(const SparseMatrix& raw_factor, const Vector& raw_load, const Vector& interior_mass,
                                std::shared_ptr<const Mesh> mesh) {
    if (static_cast<std::size_t>(interior_mass.size()) != raw_factor.cols()) {
        throw DimensionMismatch("normalize_system: mass length does not match DOF count");
    }
    Vector scale(interior_mass.size());
    for (Eigen::Index i = 0; i < interior_mass.size(); ++i) {
        if (!(interior_mass[i] > 0.0)) {
            throw AssemblyError("normalize_system: mass entry " + std::to_string(i) + " is not positive");
        }
        scale[i] = 1.0 / std::sqrt(interior_mass[i]);
    }
    if (raw_load.size() != scale.size()) throw DimensionMismatch("normalize_system: load length mismatch");
    return EllipticSystem(raw_factor.scale_columns(scale), scale.cwiseProduct(raw_load), scale, std::move(mesh));
}

EllipticSystem assemble_system(const Mesh& mesh, const CoefficientField& coeff, const ScalarField& f) {
    const auto shared = std::make_shared<const Mesh>(mesh);
    const LumpedMass mass = assemble_lumped_mass(mesh);
    return normalize_system(assemble_gradient_factor(mesh, coeff), assemble_load(mesh, f), mass.interior, shared);
}

SpectralSummary spectral_summary(const EllipticSystem& system) {
    require_dense(system.n_dof(), "spectral_summary");
    const DenseMatrix g = system.G().to_dense();
    Eigen::BDCSVD<DenseMatrix> svd(g);
    const Vector& sv = svd.singularValues();
    SpectralSummary s;
    s.norm_G = sv[0];
    s.sigma_min_G = sv[sv.size() - 1];
    s.lambda_max_A = s.norm_G * s.norm_G;
    s.lambda_min_A = s.sigma_min_G * s.sigma_min_G;
    s.kappa_A = s.lambda_max_A / s.lambda_min_A;
    return s;
}

Vector direct_solve(const EllipticSystem& system, const Vector& b) {
    return system.factorization().solve(b);
}

Vector interpolate_normalized(const EllipticSystem& system, const ScalarField& u) {
    if (!system.mesh()) throw InvalidParameter("interpolate_normalized: system carries no mesh");
    const Mesh& mesh = *system.mesh();
    Vector out(static_cast<Eigen::Index>(system.n_dof()));
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
        if (const auto& dof = mesh.interior_index[v]) {
            const auto i = static_cast<Eigen::Index>(*dof);
            out[i] = u(mesh.nodes[v].x, mesh.nodes[v].y) / system.mass_sqrt_inv()[i];
        }
    }
    return out;
}

void write_spectral_header(std::ostream& out) {
    out << "n,h,sigma_min,norm_G,lambda_min,lambda_max,kappa\n";
}

void write_spectral_row(std::ostream& out, int n, const SpectralSummary& s) {
    const auto old = out.precision(17);
    out << n << ',' << 1.0 / n << ',' << s.sigma_min_G << ',' << s.norm_G << ',' << s.lambda_min_A << ','
        << s.lambda_max_A << ',' << s.kappa_A << '\n';
    out.precision(old);
}

void dump_system(const EllipticSystem& system, const std::filesystem::path& g_path,
                 const std::filesystem::path& b_path) {
    write_matrix_market(system.G(), g_path);
    write_vector(system.b(), b_path);
}

}  // namespace ellq
