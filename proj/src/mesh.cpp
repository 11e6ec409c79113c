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

#include "cube/mesh.hpp"

#include "cube/error.hpp"

#include <algorithm>
#include <string>

namespace cube {

void TriMesh::validate() const
{
    for (std::size_t v = 0; v < vertices.size(); ++v) {
        if (!vertices[v].allFinite())
            throw ValidationError("vertices", "vertex " + std::to_string(v) + " has a non-finite coordinate");
    }
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& face = faces[f];
        for (auto idx : face) {
            if (idx >= vertices.size())
                throw ValidationError("faces", "face " + std::to_string(f) + " references vertex " +
                                                   std::to_string(idx) + " of " + std::to_string(vertices.size()));
        }
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
            throw ValidationError("faces", "face " + std::to_string(f) + " repeats a vertex index");
    }
}

Aabb bounds(const std::vector<Eigen::Vector3d>& points)
{
    Aabb box;
    for (const auto& p : points)
        box.extend(p);
    return box;
}

// Region classification from Ericson, Real-Time Collision Detection, 5.1.5.
Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, const Eigen::Vector3d& c)
{
    const Eigen::Vector3d ab = b - a;
    const Eigen::Vector3d ac = c - a;
    const Eigen::Vector3d ap = p - a;
    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0)
        return a;

    const Eigen::Vector3d bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3)
        return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return a + v * ab;
    }

    const Eigen::Vector3d cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6)
        return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return a + w * ac;
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + w * (c - b);
    }

    const double sum = va + vb + vc;
    if (!(sum > 0.0)) {
        // Degenerate (zero-area) triangle: closest point lies on one of its edges.
        auto on_segment = [&p](const Eigen::Vector3d& s0, const Eigen::Vector3d& s1) -> Eigen::Vector3d {
            const Eigen::Vector3d e = s1 - s0;
            const double len2 = e.squaredNorm();
            if (len2 == 0.0)
                return s0;
            return s0 + std::clamp((p - s0).dot(e) / len2, 0.0, 1.0) * e;
        };
        Eigen::Vector3d best = on_segment(a, b);
        for (const Eigen::Vector3d& q : {on_segment(b, c), on_segment(c, a)}) {
            if ((q - p).squaredNorm() < (best - p).squaredNorm())
                best = q;
        }
        return best;
    }
    const double denom = 1.0 / sum;
    const double v = vb * denom;
    const double w = vc * denom;
    return a + ab * v + ac * w;
}

} // namespace cube
