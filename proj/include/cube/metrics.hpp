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

#include "cube/mesh.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cube {

/**
 * Axis-aligned bounding-volume hierarchy over the triangles of a mesh, for
 * exact closest-point queries. Built once; queries are const and may run
 * concurrently.
 */
class TriangleBvh
{
public:
    /// Throws ValidationError on an invalid mesh and Error on a mesh without faces.
    explicit TriangleBvh(TriMesh mesh);

    struct Hit
    {
        double distance = 0.0;
        Eigen::Vector3d point = Eigen::Vector3d::Zero();
        std::size_t face = 0;
    };

    Hit closest(const Eigen::Vector3d& query) const;
    double distance(const Eigen::Vector3d& query) const { return closest(query).distance; }

    const TriMesh& mesh() const noexcept { return mesh_; }

private:
    struct Node
    {
        Aabb box;
        std::uint32_t left = 0;  ///< child index, or first entry of order_ for a leaf
        std::uint32_t right = 0; ///< child index, or triangle count for a leaf
        bool leaf = false;
    };

    std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::vector<Eigen::Vector3d>& centroids);

    TriMesh mesh_;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
};

/// Exact distance from a point to the surface of a mesh. Builds a temporary BVH.
double point_to_surface(const Eigen::Vector3d& query, const TriMesh& mesh);

/// Mean, median and population standard deviation of a set of distances.
struct MetricSummary
{
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0;
    std::size_t count = 0;
};

MetricSummary summarize(std::span<const double> values);

/// Point-to-scan: distance from every predicted vertex to the scan surface.
MetricSummary pts_metric(const TriMesh& pred, const TriMesh& scan);
std::vector<double> pts_distances(const TriMesh& pred, const TriMesh& scan);

/// Vertex-to-vertex: per-index Euclidean distance. Vertex counts must match.
MetricSummary v2v_metric(const TriMesh& pred, const TriMesh& gt);
std::vector<double> v2v_distances(const std::vector<Eigen::Vector3d>& pred, const std::vector<Eigen::Vector3d>& gt);

/// `mean=... median=... std=... count=...`, one key per line.
std::string format_key_value(const MetricSummary& s);
/// Aligned two-row table with a header.
std::string format_table(const std::string& label, const MetricSummary& s);

} // namespace cube
