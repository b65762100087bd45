#include "ellq/error.hpp"
#include "ellq/mesh.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

using namespace ellq;

namespace {

bool check_passed(const MeshReport& report, const std::string& name) {
    for (const auto& c : report.checks) {
        if (c.name == name) return c.passed;
    }
    FAIL("no check named " << name);
    return false;
}

}  // namespace

TEST_CASE("uniform mesh counts") {
    for (int n : {2, 4, 16}) {
        const Mesh m = build_uniform_mesh(n);
        CHECK(m.num_triangles() == static_cast<std::size_t>(2 * n * n));
        CHECK(m.n_dof == static_cast<std::size_t>((n - 1) * (n - 1)));
        CHECK(m.nodes.size() == static_cast<std::size_t>((n + 1) * (n + 1)));
        CHECK(m.h == doctest::Approx(1.0 / n));
    }
    CHECK(build_uniform_mesh(16).num_triangles() == 512);
    CHECK(build_uniform_mesh(16).n_dof == 225);
}

TEST_CASE("n below 2 is rejected") {
    CHECK_THROWS_AS((void)build_uniform_mesh(1), InvalidParameter);
    CHECK_THROWS_AS((void)build_uniform_mesh(0), InvalidParameter);
}

TEST_CASE("areas, orientation and numbering") {
    const Mesh m = build_uniform_mesh(8);
    double total = 0.0;
    for (std::size_t k = 0; k < m.num_triangles(); ++k) {
        CHECK(m.signed_area(k) == doctest::Approx(m.h * m.h / 2).epsilon(1e-14));
        total += m.signed_area(k);
    }
    CHECK(std::abs(total - 1.0) < 1e-14);
    // row-major: node 1 is (h, 0), node n+1 is (0, h)
    CHECK(m.nodes[1].x == doctest::Approx(m.h));
    CHECK(m.nodes[1].y == 0.0);
    CHECK(m.nodes[9].x == 0.0);
    CHECK(m.nodes[9].y == doctest::Approx(m.h));

    std::vector<bool> seen(m.n_dof, false);
    for (std::size_t v = 0; v < m.nodes.size(); ++v) {
        const auto& p = m.nodes[v];
        const bool boundary = p.x == 0.0 || p.y == 0.0 || p.x == 1.0 || p.y == 1.0;
        CHECK(boundary == !m.interior_index[v].has_value());
        if (m.interior_index[v]) {
            REQUIRE(*m.interior_index[v] < m.n_dof);
            CHECK_FALSE(seen[*m.interior_index[v]]);
            seen[*m.interior_index[v]] = true;
        }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
}

TEST_CASE("validate_mesh accepts the constructor output") {
    const MeshReport report = validate_mesh(build_uniform_mesh(8));
    CHECK(report.ok());
    CHECK(report.checks.size() >= 5);
}

TEST_CASE("validate_mesh catches a perturbed vertex") {
    Mesh m = build_uniform_mesh(4);
    m.nodes[6].x += 0.3 * m.h;
    const MeshReport report = validate_mesh(m);
    CHECK_FALSE(report.ok());
    CHECK_FALSE(check_passed(report, "triangle_area"));
}

TEST_CASE("validate_mesh catches a flipped triangle") {
    Mesh m = build_uniform_mesh(4);
    std::swap(m.triangles[3][1], m.triangles[3][2]);
    const MeshReport report = validate_mesh(m);
    CHECK_FALSE(report.ok());
    CHECK_FALSE(check_passed(report, "positive_orientation"));
}

TEST_CASE("mesh csv dump") {
    const auto dir = std::filesystem::temp_directory_path() / "ellq_mesh_test";
    std::filesystem::create_directories(dir);
    write_mesh_csv(build_uniform_mesh(2), dir / "nodes.csv", dir / "tris.csv");
    std::ifstream nodes(dir / "nodes.csv");
    std::string header;
    std::getline(nodes, header);
    CHECK(header == "id,x,y,interior_id");
    int rows = 0;
    for (std::string line; std::getline(nodes, line);) ++rows;
    CHECK(rows == 9);
    std::ifstream tris(dir / "tris.csv");
    std::getline(tris, header);
    CHECK(header == "id,v0,v1,v2");
}
