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

#pragma once

#include "cube/camera.hpp"
#include "cube/fitting.hpp"
#include "cube/model.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

namespace cube::testing {

/// Latitude/longitude sphere; (n_lat - 1) * n_lon + 2 vertices.
inline TriMesh uv_sphere(int n_lat, int n_lon, double radius = 0.4,
                         const Eigen::Vector3d& center = Eigen::Vector3d::Constant(0.5))
{
    TriMesh mesh;
    const double pi = std::numbers::pi;
    mesh.vertices.push_back(center + Eigen::Vector3d(0, 0, radius));
    for (int i = 1; i < n_lat; ++i) {
        const double theta = pi * i / n_lat;
        for (int j = 0; j < n_lon; ++j) {
            const double phi = 2.0 * pi * j / n_lon;
            mesh.vertices.push_back(center + radius * Eigen::Vector3d(std::sin(theta) * std::cos(phi),
                                                                      std::sin(theta) * std::sin(phi), std::cos(theta)));
        }
    }
    mesh.vertices.push_back(center - Eigen::Vector3d(0, 0, radius));
    const auto ring = [&](int i, int j) { return static_cast<std::uint32_t>(1 + (i - 1) * n_lon + (j % n_lon)); };
    const auto south = static_cast<std::uint32_t>(mesh.vertices.size() - 1);
    for (int j = 0; j < n_lon; ++j)
        mesh.faces.push_back({0, ring(1, j), ring(1, j + 1)});
    for (int i = 1; i + 1 < n_lat; ++i) {
        for (int j = 0; j < n_lon; ++j) {
            mesh.faces.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
            mesh.faces.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
        }
    }
    for (int j = 0; j < n_lon; ++j)
        mesh.faces.push_back({ring(n_lat - 1, j), south, ring(n_lat - 1, j + 1)});
    return mesh;
}

/// 1242-vertex sphere used as the default template.
inline TriMesh sphere_template()
{
    return uv_sphere(32, 40);
}

/// Smooth bounded deformation of the unit cube.
inline Eigen::Vector3d smooth_warp(const Eigen::Vector3d& x, double amplitude = 0.08)
{
    const double pi = std::numbers::pi;
    return x + amplitude * Eigen::Vector3d(std::sin(pi * x.y()) * (x.z() - 0.5),
                                           0.5 * std::sin(pi * x.x()) + 0.5 * (x.x() - 0.5) * (x.z() - 0.5),
                                           std::cos(pi * x.x()) * std::sin(pi * x.y()));
}

/// smooth_warp after a radial ripple of frequency `freq` about the cube center; the
/// ripple has more detail than a 4^3 quadratic lattice can follow.
inline Eigen::Vector3d rippled_warp(const Eigen::Vector3d& x, double amplitude = 0.08, double ripple = 0.03,
                                    double freq = 3.0)
{
    const double pi = std::numbers::pi;
    const Eigen::Vector3d radial = (x - Eigen::Vector3d::Constant(0.5)).normalized();
    const double b = ripple * std::sin(freq * pi * x.x()) * std::sin(freq * pi * x.y()) * std::sin(freq * pi * x.z());
    return smooth_warp(x + b * radial, amplitude);
}

inline TriMesh warped(const TriMesh& mesh, double amplitude = 0.08)
{
    TriMesh out = mesh;
    for (auto& v : out.vertices)
        v = smooth_warp(v, amplitude);
    return out;
}

/// Model with random features, weights in (0.5, 2) and a nonzero MLP.
inline CubeModel random_model(std::mt19937_64& rng, int m = 4, int dim = 5, int degree = 2,
                              const TriMesh& tmpl = uv_sphere(6, 8))
{
    ModelOptions opts;
    opts.controls = m;
    opts.dim = dim;
    opts.degree = degree;
    opts.seed = rng();
    CubeModel model = create_model(tmpl, opts);
    std::uniform_real_distribution<double> feat(-0.2, 0.2);
    std::uniform_real_distribution<double> w(0.5, 2.0);
    for (auto& f : model.lattice.features())
        f += feat(rng);
    for (auto& h : model.lattice.weights())
        h = w(rng);
    std::normal_distribution<double> g(0.0, 0.3);
    for (auto& layer : model.mlp.layers()) {
        for (Eigen::Index n = 0; n < layer.weight.size(); ++n)
            layer.weight.data()[n] = g(rng);
        for (Eigen::Index n = 0; n < layer.bias.size(); ++n)
            layer.bias[n] = g(rng);
    }
    return model;
}

/// Camera looking down -z at the unit cube from `distance` units away.
inline Camera front_camera(double distance = 3.0, double focal = 1000.0)
{
    Camera cam;
    cam.fx = cam.fy = focal;
    cam.cx = 320.0;
    cam.cy = 240.0;
    cam.rotation = Eigen::Matrix3d::Identity();
    cam.translation = Eigen::Vector3d(-0.5, -0.5, distance - 0.5);
    return cam;
}

/// Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("cube_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace cube::testing
