/*
 * cube - trivariate B-spline feature volumes for 3D surface representation.
 *
 * Copyright 2026 The cube authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include "cube/error.hpp"
#include "cube/mesh_io.hpp"

#include <doctest.h>

#include <cstring>
#include <fstream>
#include <sstream>

using namespace cube;

TEST_CASE("mesh validation")
{
    TriMesh mesh = testing::uv_sphere(4, 5);
    CHECK_NOTHROW(mesh.validate());
    TriMesh bad = mesh;
    bad.faces[0][1] = static_cast<std::uint32_t>(bad.vertices.size());
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = mesh;
    bad.faces[0][1] = bad.faces[0][0];
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = mesh;
    bad.vertices[2].y() = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("closest point on triangle matches the brute-force distance")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int n = 0; n < 2000; ++n) {
        const Eigen::Vector3d a(U(rng), U(rng), U(rng)), b(U(rng), U(rng), U(rng)), c(U(rng), U(rng), U(rng));
        const Eigen::Vector3d q(2 * U(rng), 2 * U(rng), 2 * U(rng));
        const Eigen::Vector3d x = closest_point_on_triangle(q, a, b, c);
        CHECK(std::abs((x - q).norm() - oracle::point_triangle(q, a, b, c)) < 1e-12);
    }
    // Degenerate triangles fall back to the segments.
    const Eigen::Vector3d a(0, 0, 0), b(1, 0, 0), q(0.5, 1, 0);
    CHECK((closest_point_on_triangle(q, a, b, b) - Eigen::Vector3d(0.5, 0, 0)).norm() < 1e-15);
    CHECK((closest_point_on_triangle(q, a, a, a) - a).norm() == 0.0);
    CHECK((closest_point_on_triangle(q, a, b, Eigen::Vector3d(2, 0, 0)) - Eigen::Vector3d(0.5, 0, 0)).norm() < 1e-15);
}

TEST_CASE("OBJ reading")
{
    std::istringstream in("# comment\n"
                          "v 0 0 0\n"
                          "v 1 0 0\n"
                          "vn 0 0 1\n"
                          "vt 0 0\n"
                          "v 1 1 0\n"
                          "v 0 1 0\n"
                          "f 1/1/1 2//1 3 4\n"
                          "f -4 -2 -1\n");
    const TriMesh mesh = read_obj(in);
    CHECK(mesh.vertices.size() == 4);
    REQUIRE(mesh.faces.size() == 3);
    CHECK(mesh.faces[0] == Face{0, 1, 2});
    CHECK(mesh.faces[1] == Face{0, 2, 3});
    CHECK(mesh.faces[2] == Face{0, 2, 3});

    std::istringstream bad("v 0 0 0\nv 1 0 0\nv x 1 0\n");
    try {
        read_obj(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    std::istringstream oob("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
    CHECK_THROWS_AS(read_obj(oob), ValidationError);
    CHECK_THROWS_AS(load_obj("/nonexistent/mesh.obj"), IoError);
}

TEST_CASE("OBJ and PLY round trips")
{
    const TriMesh mesh = testing::uv_sphere(101, 100);
    REQUIRE(mesh.vertices.size() >= 10000);
    const auto dir = testing::scratch_dir("mesh_io");

    save_mesh(mesh, dir / "a.obj");
    const TriMesh obj = load_mesh(dir / "a.obj");
    CHECK(obj == mesh);

    save_mesh(mesh, dir / "a.ply");
    const TriMesh ply = load_mesh(dir / "a.ply");
    CHECK(ply == mesh);

    CHECK_THROWS_AS(save_mesh(mesh, dir / "a.stl"), IoError);
}

TEST_CASE("binary little-endian PLY")
{
    std::string data = "ply\nformat binary_little_endian 1.0\nelement vertex 3\n"
                       "property float x\nproperty float y\nproperty float z\n"
                       "element face 1\nproperty list uchar int vertex_indices\nend_header\n";
    const float xyz[9] = {0, 0, 0, 1, 0, 0, 0, 2, 0};
    data.append(reinterpret_cast<const char*>(xyz), sizeof xyz);
    const unsigned char count = 3;
    data.push_back(static_cast<char>(count));
    const std::int32_t idx[3] = {0, 1, 2};
    data.append(reinterpret_cast<const char*>(idx), sizeof idx);
    std::istringstream in(data);
    const TriMesh mesh = read_ply(in);
    REQUIRE(mesh.vertices.size() == 3);
    CHECK(mesh.vertices[2] == Eigen::Vector3d(0, 2, 0));
    REQUIRE(mesh.faces.size() == 1);
    CHECK(mesh.faces[0] == Face{0, 1, 2});

    std::istringstream truncated(data.substr(0, data.size() - 4));
    CHECK_THROWS_AS(read_ply(truncated), ParseError);
}
