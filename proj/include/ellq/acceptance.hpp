#pragma once

#include "ellq/mesh.hpp"
#include "ellq/sparse.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ellq {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::vector<int> criteria;  ///< empty: all fourteen
    /// Scratch directory for the reproducibility runs.
    std::filesystem::path work_dir = "acceptance_work";
    double theta = 0.0;  ///< 0: library default
    /// Matrix Market file for G at n = 16; freshly assembled when empty.
    std::optional<std::filesystem::path> gram_dump;
    std::uint64_t seed = 1;
    std::ostream* progress = nullptr;
};

[[nodiscard]] std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// `criterion,name,status,detail,seconds`
void write_report_csv(std::ostream& out, const std::vector<CriterionResult>& results);
/// One `PASS|FAIL [id] name: detail` line per criterion.
void print_report(std::ostream& out, const std::vector<CriterionResult>& results);

/// Normalized stiffness entry K_ij / sqrt(m_i m_j) for interior DOFs i, j of a
/// unit-coefficient Poisson problem, integrated with the cotangent formula
/// and a lumped mass computed from triangle areas.
[[nodiscard]] double reference_normalized_stiffness(const Mesh& mesh, std::size_t i, std::size_t j);

/// Compares `samples` random entries of G^T G (half of them on the stencil,
/// half uniform) with reference_normalized_stiffness.
[[nodiscard]] CriterionResult check_gram_identity(const SparseMatrix& g, const Mesh& mesh, std::uint64_t seed,
                                                  std::size_t samples = 20);

/// L2 error of the P1 solution against the manufactured solution,
/// 7-point Gauss quadrature per triangle.
[[nodiscard]] double manufactured_l2_error(int n);

/// Lumped-mass discrete L2 distance between the P1 solution and the nodal
/// interpolant of the manufactured solution, sqrt(sum_i m_i (u_i - u_ex(p_i))^2).
[[nodiscard]] double manufactured_discrete_error(int n);

}  // namespace ellq
