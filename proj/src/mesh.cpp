#include "ellq/mesh.hpp"

#include "ellq/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ellq {

double Mesh::signed_area(std::size_t tri) const {
    const auto& [a, b, c] = triangles.at(tri);
    const Point& p = nodes[a];
    const Point& q = nodes[b];
    const Point& r = nodes[c];
    return 0.5 * ((q.x - p.x) * (r.y - p.y) - (r.x - p.x) * (q.y - p.y));
}

Point Mesh::centroid(std::size_t tri) const {
    const auto& [a, b, c] = triangles.at(tri);
    return {(nodes[a].x + nodes[b].x + nodes[c].x) / 3.0,
            (nodes[a].y + nodes[b].y + nodes[c].y) / 3.0};
}

Mesh build_uniform_mesh(int n) {
    if (n < 2) {
        throw InvalidParameter("build_uniform_mesh: n must be >= 2 (got " + std::to_string(n) +
                               "), otherwise there is no interior DOF");
    }
    Mesh mesh;
    mesh.n = n;
    mesh.h = 1.0 / n;
    const auto side = static_cast<std::size_t>(n) + 1;
    mesh.nodes.reserve(side * side);
    mesh.interior_index.reserve(side * side);

    std::size_t dof = 0;
    for (std::size_t j = 0; j < side; ++j) {
        for (std::size_t i = 0; i < side; ++i) {
            mesh.nodes.push_back({static_cast<double>(i) * mesh.h, static_cast<double>(j) * mesh.h});
            const bool boundary = i == 0 || j == 0 || i + 1 == side || j + 1 == side;
            mesh.interior_index.push_back(boundary ? std::nullopt : std::optional<std::size_t>(dof++));
        }
    }
    mesh.n_dof = dof;

    mesh.triangles.reserve(2 * static_cast<std::size_t>(n) * n);
    for (std::size_t j = 0; j + 1 < side; ++j) {
        for (std::size_t i = 0; i + 1 < side; ++i) {
            const std::size_t v00 = j * side + i;
            const std::size_t v10 = v00 + 1;
            const std::size_t v01 = v00 + side;
            const std::size_t v11 = v01 + 1;
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }
    return mesh;
}

bool MeshReport::ok() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const MeshCheck& c) { return c.passed; });
}

MeshReport validate_mesh(const Mesh& mesh) {
    MeshReport report;
    auto add = [&](std::string name, bool passed, std::string detail = {}) {
        report.checks.push_back({std::move(name), passed, std::move(detail)});
    };

    const auto n = static_cast<std::size_t>(std::max(mesh.n, 0));
    const std::size_t side = n + 1;
    add("triangle_count", mesh.triangles.size() == 2 * n * n,
        std::to_string(mesh.triangles.size()) + " vs " + std::to_string(2 * n * n));
    add("dof_count", n >= 1 && mesh.n_dof == (n - 1) * (n - 1),
        std::to_string(mesh.n_dof));
    add("node_count", mesh.nodes.size() == side * side && mesh.interior_index.size() == mesh.nodes.size());

    bool indices_ok = true;
    for (const auto& tri : mesh.triangles) {
        for (auto v : tri) indices_ok = indices_ok && v < mesh.nodes.size();
    }
    add("vertex_indices", indices_ok);
    if (!indices_ok || mesh.nodes.size() != side * side) {
        return report;
    }

    const double target = 0.5 * mesh.h * mesh.h;
    const double tol = 1e-14;
    std::size_t worst_orient = mesh.triangles.size();
    std::size_t worst_area = mesh.triangles.size();
    double total = 0.0;
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        const double a = mesh.signed_area(k);
        total += a;
        if (a <= 0.0 && worst_orient == mesh.triangles.size()) worst_orient = k;
        if (std::abs(std::abs(a) - target) > tol && worst_area == mesh.triangles.size()) worst_area = k;
    }
    add("positive_orientation", worst_orient == mesh.triangles.size(),
        worst_orient == mesh.triangles.size() ? "" : "triangle " + std::to_string(worst_orient));
    add("triangle_area", worst_area == mesh.triangles.size(),
        worst_area == mesh.triangles.size() ? "" : "triangle " + std::to_string(worst_area));
    add("total_area", std::abs(total - 1.0) <= tol, std::to_string(total));

    // Each triangle must contain the lower-left to upper-right diagonal of its cell.
    bool diagonal_ok = true;
    for (std::size_t k = 0; k < mesh.triangles.size() && diagonal_ok; ++k) {
        const std::size_t cell = k / 2;
        const std::size_t ci = cell % n;
        const std::size_t cj = cell / n;
        const std::size_t ll = cj * side + ci;
        const std::size_t ur = ll + side + 1;
        const auto& tri = mesh.triangles[k];
        const bool has_ll = std::find(tri.begin(), tri.end(), ll) != tri.end();
        const bool has_ur = std::find(tri.begin(), tri.end(), ur) != tri.end();
        diagonal_ok = has_ll && has_ur;
    }
    add("uniform_diagonal", diagonal_ok);

    std::vector<bool> seen(mesh.n_dof, false);
    bool bijection = true;
    std::size_t interior_nodes = 0;
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
        const std::size_t i = v % side;
        const std::size_t j = v / side;
        const bool boundary = i == 0 || j == 0 || i == n || j == n;
        const auto& idx = mesh.interior_index[v];
        if (boundary != !idx.has_value()) {
            bijection = false;
            continue;
        }
        if (idx) {
            ++interior_nodes;
            if (*idx >= mesh.n_dof || seen[*idx]) {
                bijection = false;
            } else {
                seen[*idx] = true;
            }
        }
    }
    add("interior_bijection", bijection && interior_nodes == mesh.n_dof);
    return report;
}

void write_mesh_csv(const Mesh& mesh, const std::filesystem::path& nodes_csv,
                    const std::filesystem::path& triangles_csv) {
    std::ofstream nodes(nodes_csv);
    std::ofstream tris(triangles_csv);
    if (!nodes || !tris) {
        throw Error("write_mesh_csv: cannot open output files");
    }
    nodes.precision(17);
    nodes << "id,x,y,interior_id\n";
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
        nodes << v << ',' << mesh.nodes[v].x << ',' << mesh.nodes[v].y << ',';
        if (mesh.interior_index[v]) nodes << *mesh.interior_index[v];
        nodes << '\n';
    }
    tris << "id,v0,v1,v2\n";
    for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
        const auto& t = mesh.triangles[k];
        tris << k << ',' << t[0] << ',' << t[1] << ',' << t[2] << '\n';
    }
}

}  // namespace ellq
