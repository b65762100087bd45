#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ellq {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Uniform triangulation of the unit square. Nodes are numbered row-major
/// (y outer, x inner); every square is split along its lower-left to
/// upper-right diagonal and both triangles are counterclockwise.
struct Mesh {
    int n = 0;        ///< cells per side
    double h = 0.0;   ///< 1/n
    std::vector<Point> nodes;
    std::vector<std::array<std::size_t, 3>> triangles;
    /// Interior DOF of each node; boundary nodes hold nullopt.
    std::vector<std::optional<std::size_t>> interior_index;
    std::size_t n_dof = 0;

    [[nodiscard]] std::size_t num_triangles() const noexcept { return triangles.size(); }
    [[nodiscard]] double signed_area(std::size_t tri) const;
    [[nodiscard]] Point centroid(std::size_t tri) const;
};

/// Throws InvalidParameter for n < 2.
[[nodiscard]] Mesh build_uniform_mesh(int n);

struct MeshCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct MeshReport {
    std::vector<MeshCheck> checks;
    [[nodiscard]] bool ok() const noexcept;
};

/// Checks every structural invariant of a uniform mesh; never throws.
[[nodiscard]] MeshReport validate_mesh(const Mesh& mesh);

/// Writes `id,x,y,interior_id` and `id,v0,v1,v2` tables.
void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& nodes_csv,
                    const std::filesystem::path& triangles_csv);

}  // namespace ellq
