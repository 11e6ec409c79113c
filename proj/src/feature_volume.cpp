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

#include "cube/feature_volume.hpp"

#include "cube/error.hpp"

#include <cassert>
#include <cmath>
#include <string>

namespace cube {

namespace {

void check_sizes(const ControlLattice& lattice, const KnotVector& kv)
{
    if (kv.num_controls() != lattice.m())
        throw ConfigError("knot vector built for " + std::to_string(kv.num_controls()) +
                          " controls, lattice has " + std::to_string(lattice.m()));
}

void check_point(const Eigen::Vector3d& p, std::size_t index = DomainError::no_index)
{
    for (int a = 0; a < 3; ++a) {
        if (!(p[a] >= 0.0 && p[a] <= 1.0)) {
            std::string what = "parametric point outside [0, 1]^3";
            if (index != DomainError::no_index)
                what = "point " + std::to_string(index) + ": " + what;
            throw DomainError(what, index);
        }
    }
}

} // namespace

ControlLattice::ControlLattice(int m, int dim)
    : ControlLattice(m, dim, std::vector<double>(static_cast<std::size_t>(m > 0 ? m : 0) * m * m * (dim > 0 ? dim : 0), 0.0),
                     std::vector<double>(static_cast<std::size_t>(m > 0 ? m : 0) * m * m, 1.0))
{
}

ControlLattice::ControlLattice(int m, int dim, std::vector<double> features, std::vector<double> weights)
    : m_(m), dim_(dim), features_(std::move(features)), weights_(std::move(weights))
{
    validate();
}

ControlLattice ControlLattice::greville_identity(const KnotVector& kv, int dim)
{
    ControlLattice lattice(kv.num_controls(), dim);
    const int m = lattice.m();
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                auto f = lattice.feature(lattice.index(i, j, k));
                f[0] = kv.greville(i);
                f[1] = kv.greville(j);
                f[2] = kv.greville(k);
            }
    return lattice;
}

Index3 ControlLattice::unflatten(std::size_t flat) const noexcept
{
    const auto m = static_cast<std::size_t>(m_);
    return {static_cast<int>(flat / (m * m)), static_cast<int>((flat / m) % m), static_cast<int>(flat % m)};
}

bool ControlLattice::in_range(const Index3& c) const noexcept
{
    for (int a : c) {
        if (a < 0 || a >= m_)
            return false;
    }
    return true;
}

void ControlLattice::validate() const
{
    if (m_ < 1)
        throw ValidationError("m", "lattice needs at least one control per axis");
    if (dim_ < 3)
        throw ValidationError("dim", "feature dimension must be at least 3");
    const auto count = static_cast<std::size_t>(m_) * m_ * m_;
    if (weights_.size() != count)
        throw ValidationError("weights", "expected " + std::to_string(count) + " entries, got " +
                                             std::to_string(weights_.size()));
    if (features_.size() != count * dim_)
        throw ValidationError("features", "expected " + std::to_string(count * dim_) + " entries, got " +
                                              std::to_string(features_.size()));
    for (std::size_t n = 0; n < count; ++n) {
        if (!(weights_[n] > 0.0) || !std::isfinite(weights_[n]))
            throw ValidationError("weights", "weight " + std::to_string(n) + " is not a positive finite number");
    }
}

Stencil make_stencil(const KnotVector& kv, const Eigen::Vector3d& p)
{
    check_point(p);
    Stencil s;
    s.order = kv.degree() + 1;
    for (int a = 0; a < 3; ++a) {
        s.basis[a].resize(s.order);
        s.first[a] = basis_values(kv, p[a], s.basis[a]).first;
    }
    return s;
}

double evaluate(const ControlLattice& lattice, const Stencil& stencil, std::span<double> out)
{
    const int d = lattice.dim();
    assert(static_cast<int>(out.size()) == d);
    std::fill(out.begin(), out.end(), 0.0);
    double denominator = 0.0;
    const int n = stencil.order;
    for (int a = 0; a < n; ++a) {
        const double bu = stencil.basis[0][a];
        if (bu == 0.0)
            continue;
        for (int b = 0; b < n; ++b) {
            const double buv = bu * stencil.basis[1][b];
            if (buv == 0.0)
                continue;
            for (int c = 0; c < n; ++c) {
                const std::size_t flat =
                    lattice.index(stencil.first[0] + a, stencil.first[1] + b, stencil.first[2] + c);
                const double w = buv * stencil.basis[2][c] * lattice.weight(flat);
                if (w == 0.0)
                    continue;
                denominator += w;
                const auto f = lattice.feature(flat);
                for (int e = 0; e < d; ++e)
                    out[e] += w * f[e];
            }
        }
    }
    assert(denominator > 0.0);
    for (auto& v : out)
        v /= denominator;
    return denominator;
}

Eigen::VectorXd evaluate(const ControlLattice& lattice, const KnotVector& kv, const Eigen::Vector3d& p)
{
    check_sizes(lattice, kv);
    const Stencil s = make_stencil(kv, p);
    Eigen::VectorXd z(lattice.dim());
    evaluate(lattice, s, std::span<double>(z.data(), z.size()));
    return z;
}

std::vector<Eigen::VectorXd> evaluate_batch(const ControlLattice& lattice, const KnotVector& kv,
                                            std::span<const Eigen::Vector3d> points)
{
    check_sizes(lattice, kv);
    for (std::size_t n = 0; n < points.size(); ++n)
        check_point(points[n], n);
    std::vector<Eigen::VectorXd> result;
    result.reserve(points.size());
    for (const auto& p : points)
        result.push_back(evaluate(lattice, kv, p));
    return result;
}

Box support_region(const ControlLattice& lattice, const KnotVector& kv, const Index3& c)
{
    check_sizes(lattice, kv);
    if (!lattice.in_range(c))
        throw IndexError("control index out of range");
    return {{support_interval(kv, c[0]), support_interval(kv, c[1]), support_interval(kv, c[2])}};
}

std::vector<Index3> controls_affecting(const ControlLattice& lattice, const KnotVector& kv, const Eigen::Vector3d& p)
{
    check_sizes(lattice, kv);
    check_point(p);
    std::array<Span, 3> spans{nonzero_span(kv, p.x()), nonzero_span(kv, p.y()), nonzero_span(kv, p.z())};
    std::vector<Index3> result;
    result.reserve(static_cast<std::size_t>(spans[0].count) * spans[1].count * spans[2].count);
    for (int a = 0; a < spans[0].count; ++a)
        for (int b = 0; b < spans[1].count; ++b)
            for (int c = 0; c < spans[2].count; ++c)
                result.push_back({spans[0].first + a, spans[1].first + b, spans[2].first + c});
    return result;
}

} // namespace cube
