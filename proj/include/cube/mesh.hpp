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

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

namespace cube {

using Face = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh.
struct TriMesh
{
    std::vector<Eigen::Vector3d> vertices;
    std::vector<Face> faces;

    /// Throws ValidationError: face index out of range, repeated index in a face, non-finite coordinate.
    void validate() const;

    bool operator==(const TriMesh&) const = default;
};

/// Axis-aligned bounds of a point set. Empty input gives min = +inf, max = -inf.
struct Aabb
{
    Eigen::Vector3d min = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector3d max = Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity());

    void extend(const Eigen::Vector3d& p)
    {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    void extend(const Aabb& b)
    {
        min = min.cwiseMin(b.min);
        max = max.cwiseMax(b.max);
    }
    Eigen::Vector3d center() const { return 0.5 * (min + max); }
    Eigen::Vector3d extent() const { return max - min; }
    double squared_distance(const Eigen::Vector3d& p) const
    {
        const Eigen::Vector3d d = (min - p).cwiseMax(p - max).cwiseMax(0.0);
        return d.squaredNorm();
    }
};

Aabb bounds(const std::vector<Eigen::Vector3d>& points);

/// Point on triangle (a, b, c) closest to p.
Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, const Eigen::Vector3d& c);

} // namespace cube
