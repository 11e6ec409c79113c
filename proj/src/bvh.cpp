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

#include "cube/error.hpp"
#include "cube/metrics.hpp"

#include <algorithm>
#include <limits>

namespace cube {

namespace {
constexpr std::uint32_t leaf_size = 4;
}

TriangleBvh::TriangleBvh(TriMesh mesh) : mesh_(std::move(mesh))
{
    mesh_.validate();
    if (mesh_.faces.empty())
        throw ValidationError("faces", "cannot build a surface query structure for a mesh without faces");
    const auto n = static_cast<std::uint32_t>(mesh_.faces.size());
    order_.resize(n);
    std::vector<Eigen::Vector3d> centroids(n);
    for (std::uint32_t f = 0; f < n; ++f) {
        order_[f] = f;
        const auto& face = mesh_.faces[f];
        centroids[f] = (mesh_.vertices[face[0]] + mesh_.vertices[face[1]] + mesh_.vertices[face[2]]) / 3.0;
    }
    nodes_.reserve(2 * n / leaf_size + 1);
    build(0, n, centroids);
}

std::uint32_t TriangleBvh::build(std::uint32_t begin, std::uint32_t end, std::vector<Eigen::Vector3d>& centroids)
{
    const auto index = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    Aabb box;
    Aabb centroid_box;
    for (std::uint32_t n = begin; n < end; ++n) {
        const auto& face = mesh_.faces[order_[n]];
        for (auto v : face)
            box.extend(mesh_.vertices[v]);
        centroid_box.extend(centroids[order_[n]]);
    }
    nodes_[index].box = box;

    if (end - begin <= leaf_size) {
        nodes_[index].leaf = true;
        nodes_[index].left = begin;
        nodes_[index].right = end - begin;
        return index;
    }

    int axis = 0;
    centroid_box.extent().maxCoeff(&axis);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return centroids[a][axis] < centroids[b][axis]; });
    const auto left = build(begin, mid, centroids);
    const auto right = build(mid, end, centroids);
    nodes_[index].left = left;
    nodes_[index].right = right;
    return index;
}

TriangleBvh::Hit TriangleBvh::closest(const Eigen::Vector3d& query) const
{
    Hit best;
    double best_sq = std::numeric_limits<double>::infinity();
    std::uint32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (node.box.squared_distance(query) > best_sq)
            continue;
        if (node.leaf) {
            for (std::uint32_t n = node.left; n < node.left + node.right; ++n) {
                const auto f = order_[n];
                const auto& face = mesh_.faces[f];
                const Eigen::Vector3d p = closest_point_on_triangle(query, mesh_.vertices[face[0]],
                                                                    mesh_.vertices[face[1]], mesh_.vertices[face[2]]);
                const double sq = (p - query).squaredNorm();
                if (sq < best_sq) {
                    best_sq = sq;
                    best.point = p;
                    best.face = f;
                }
            }
            continue;
        }
        // Visit the nearer child first.
        const double dl = nodes_[node.left].box.squared_distance(query);
        const double dr = nodes_[node.right].box.squared_distance(query);
        if (dl < dr) {
            stack[top++] = node.right;
            stack[top++] = node.left;
        } else {
            stack[top++] = node.left;
            stack[top++] = node.right;
        }
    }
    best.distance = std::sqrt(best_sq);
    return best;
}

double point_to_surface(const Eigen::Vector3d& query, const TriMesh& mesh)
{
    return TriangleBvh(mesh).distance(query);
}

} // namespace cube
