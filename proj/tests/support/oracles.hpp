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

// Deliberately naive reference implementations used to check the library.

#include "cube/camera.hpp"
#include "cube/feature_volume.hpp"
#include "cube/mesh.hpp"
#include "cube/mlp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace cube::oracle {

/// Textbook Cox-de Boor, 0-based i. The last nonempty span is closed at its right end.
inline double cox_de_boor(const std::vector<double>& t, int i, int p, double u)
{
    if (p == 0) {
        if (t[i] <= u && u < t[i + 1])
            return 1.0;
        if (u == t.back() && t[i] < t[i + 1] && t[i + 1] == t.back())
            return 1.0;
        return 0.0;
    }
    double left = 0.0, right = 0.0;
    const double dl = t[i + p] - t[i];
    const double dr = t[i + p + 1] - t[i + 1];
    if (dl != 0.0)
        left = (u - t[i]) / dl * cox_de_boor(t, i, p - 1, u);
    if (dr != 0.0)
        right = (t[i + p + 1] - u) / dr * cox_de_boor(t, i + 1, p - 1, u);
    return left + right;
}

/// Full sum over every control of the lattice.
inline Eigen::VectorXd triple_sum(const std::vector<double>& t, int r, int m, int dim,
                                  const std::vector<double>& features, const std::vector<double>& weights,
                                  const Eigen::Vector3d& p)
{
    Eigen::VectorXd num = Eigen::VectorXd::Zero(dim);
    double den = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const int n = (i * m + j) * m + k;
                const double b = cox_de_boor(t, i, r, p.x()) * cox_de_boor(t, j, r, p.y()) *
                                 cox_de_boor(t, k, r, p.z()) * weights[n];
                for (int c = 0; c < dim; ++c)
                    num[c] += b * features[static_cast<std::size_t>(n) * dim + c];
                den += b;
            }
    return num / den;
}

inline Eigen::VectorXd triple_sum(const KnotVector& kv, const ControlLattice& lat, const Eigen::Vector3d& p)
{
    return triple_sum(std::vector<double>(kv.knots().begin(), kv.knots().end()), kv.degree(), lat.m(), lat.dim(), lat.features(), lat.weights(), p);
}

/// Dense layers with scalar loops; ReLU on all but the last.
inline Eigen::Vector3d mlp_forward(const ResidualMlp& mlp, const Eigen::VectorXd& z)
{
    std::vector<double> x(z.data(), z.data() + z.size());
    const auto& layers = mlp.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        std::vector<double> y(static_cast<std::size_t>(L.weight.rows()), 0.0);
        for (Eigen::Index o = 0; o < L.weight.rows(); ++o) {
            double s = L.bias[o];
            for (Eigen::Index c = 0; c < L.weight.cols(); ++c)
                s += L.weight(o, c) * x[static_cast<std::size_t>(c)];
            y[static_cast<std::size_t>(o)] = (l + 1 < layers.size()) ? std::max(0.0, s) : s;
        }
        x = std::move(y);
    }
    return {x[0], x[1], x[2]};
}

inline double segment_distance(const Eigen::Vector3d& q, const Eigen::Vector3d& a, const Eigen::Vector3d& b)
{
    const Eigen::Vector3d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (a + s * ab - q).norm();
}

/// Plane projection with an inside test, else nearest edge.
inline double point_triangle(const Eigen::Vector3d& q, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                             const Eigen::Vector3d& c)
{
    const Eigen::Vector3d n = (b - a).cross(c - a);
    const double area2 = n.squaredNorm();
    if (area2 > 0.0) {
        const Eigen::Vector3d proj = q - n * ((q - a).dot(n) / area2);
        const double wa = (c - b).cross(proj - b).dot(n);
        const double wb = (a - c).cross(proj - c).dot(n);
        const double wc = (b - a).cross(proj - a).dot(n);
        if (wa >= 0.0 && wb >= 0.0 && wc >= 0.0)
            return (proj - q).norm();
    }
    return std::min({segment_distance(q, a, b), segment_distance(q, b, c), segment_distance(q, c, a)});
}

inline double point_mesh(const Eigen::Vector3d& q, const TriMesh& mesh)
{
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : mesh.faces)
        best = std::min(best, point_triangle(q, mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]));
    return best;
}

/// K [R | t] as a 3x4 product applied to homogeneous coordinates.
inline Eigen::Vector2d project(const Camera& cam, const Eigen::Vector3d& x)
{
    Eigen::Matrix<double, 3, 4> K = Eigen::Matrix<double, 3, 4>::Zero();
    K(0, 0) = cam.fx;
    K(1, 1) = cam.fy;
    K(0, 2) = cam.cx;
    K(1, 2) = cam.cy;
    K(2, 2) = 1.0;
    Eigen::Matrix4d E = Eigen::Matrix4d::Identity();
    E.topLeftCorner<3, 3>() = cam.rotation;
    E.topRightCorner<3, 1>() = cam.translation;
    const Eigen::Vector3d h = K * E * x.homogeneous();
    return h.hnormalized();
}

inline double relative_error(double a, double b)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace cube::oracle
