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

#include "cube/metrics.hpp"

#include "cube/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cube {

MetricSummary summarize(std::span<const double> values)
{
    MetricSummary s;
    s.count = values.size();
    if (values.empty())
        return s;
    double sum = 0.0;
    for (double v : values)
        sum += v;
    s.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values)
        sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size()));

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return s;
}

std::vector<double> pts_distances(const TriMesh& pred, const TriMesh& scan)
{
    if (pred.vertices.empty())
        throw Error("point-to-scan: prediction has no vertices");
    if (scan.vertices.empty() || scan.faces.empty())
        throw Error("point-to-scan: scan has no surface");
    const TriangleBvh bvh(scan);
    std::vector<double> d(pred.vertices.size());
    for (std::size_t n = 0; n < d.size(); ++n)
        d[n] = bvh.distance(pred.vertices[n]);
    return d;
}

MetricSummary pts_metric(const TriMesh& pred, const TriMesh& scan)
{
    const auto d = pts_distances(pred, scan);
    return summarize(d);
}

std::vector<double> v2v_distances(const std::vector<Eigen::Vector3d>& pred, const std::vector<Eigen::Vector3d>& gt)
{
    if (pred.size() != gt.size())
        throw ValidationError("vertices", "vertex counts differ (" + std::to_string(pred.size()) + " vs " +
                                              std::to_string(gt.size()) + ")");
    if (pred.empty())
        throw Error("vertex-to-vertex: meshes have no vertices");
    std::vector<double> d(pred.size());
    for (std::size_t n = 0; n < d.size(); ++n)
        d[n] = (pred[n] - gt[n]).norm();
    return d;
}

MetricSummary v2v_metric(const TriMesh& pred, const TriMesh& gt)
{
    const auto d = v2v_distances(pred.vertices, gt.vertices);
    return summarize(d);
}

std::string format_key_value(const MetricSummary& s)
{
    std::ostringstream out;
    out.precision(10);
    out << "mean=" << s.mean << "\nmedian=" << s.median << "\nstd=" << s.std << "\ncount=" << s.count << '\n';
    return out.str();
}

std::string format_table(const std::string& label, const MetricSummary& s)
{
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-8s %14s %14s %14s %10s\n", "metric", "mean", "median", "std", "count");
    out += buf;
    std::snprintf(buf, sizeof buf, "%-8s %14.6g %14.6g %14.6g %10zu\n", label.c_str(), s.mean, s.median, s.std, s.count);
    out += buf;
    return out;
}

} // namespace cube
