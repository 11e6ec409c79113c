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

#include "cube/spline.hpp"

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace cube {

using Index3 = std::array<int, 3>;

/**
 * M x M x M lattice of d-dimensional control features with positive rational
 * weights. The first three feature entries are spatial coordinates.
 *
 * Storage is row-major over (i, j, k) with k fastest; each control's d
 * features are contiguous. Indices are 0-based.
 */
class ControlLattice
{
public:
    /// Zero features, unit weights.
    ControlLattice(int m, int dim);
    /// Takes ownership of flat arrays; throws ValidationError on size or weight violations.
    ControlLattice(int m, int dim, std::vector<double> features, std::vector<double> weights);

    /// First three dims at the Greville abscissae of `kv`, remaining dims zero, unit weights.
    /// With these controls the volume reproduces the identity map on [0, 1]^3.
    static ControlLattice greville_identity(const KnotVector& kv, int dim);

    int m() const noexcept { return m_; }
    int dim() const noexcept { return dim_; }
    std::size_t num_controls() const noexcept { return weights_.size(); }

    std::size_t index(int i, int j, int k) const noexcept
    {
        return (static_cast<std::size_t>(i) * m_ + j) * m_ + k;
    }
    std::size_t index(const Index3& c) const noexcept { return index(c[0], c[1], c[2]); }
    Index3 unflatten(std::size_t flat) const noexcept;
    bool in_range(const Index3& c) const noexcept;

    std::span<double> feature(std::size_t flat) noexcept { return {features_.data() + flat * dim_, static_cast<std::size_t>(dim_)}; }
    std::span<const double> feature(std::size_t flat) const noexcept
    {
        return {features_.data() + flat * dim_, static_cast<std::size_t>(dim_)};
    }
    double& weight(std::size_t flat) noexcept { return weights_[flat]; }
    double weight(std::size_t flat) const noexcept { return weights_[flat]; }

    std::vector<double>& features() noexcept { return features_; }
    const std::vector<double>& features() const noexcept { return features_; }
    std::vector<double>& weights() noexcept { return weights_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    /// Throws ValidationError if any invariant is broken (e.g. after raw mutation).
    void validate() const;

    bool operator==(const ControlLattice&) const = default;

private:
    int m_;
    int dim_;
    std::vector<double> features_;
    std::vector<double> weights_;
};

/**
 * Per-axis basis windows for one parametric point. Depends only on the knots
 * and the point, so it can be computed once and reused for any lattice.
 */
struct Stencil
{
    Index3 first{};
    int order = 0; ///< degree + 1 entries per axis
    std::array<std::vector<double>, 3> basis;
};

Stencil make_stencil(const KnotVector& kv, const Eigen::Vector3d& p);

/// Rational B-spline blend of the lattice at a point. `out` has lattice.dim() entries.
/// Returns the denominator sum of N_i N_j N_k h_ijk.
double evaluate(const ControlLattice& lattice, const Stencil& stencil, std::span<double> out);

Eigen::VectorXd evaluate(const ControlLattice& lattice, const KnotVector& kv, const Eigen::Vector3d& p);

/// Pointwise evaluate; a DomainError carries the index of the first bad point.
std::vector<Eigen::VectorXd> evaluate_batch(const ControlLattice& lattice, const KnotVector& kv,
                                            std::span<const Eigen::Vector3d> points);

struct Box
{
    std::array<Interval, 3> axis;
    bool contains(const Eigen::Vector3d& p) const noexcept
    {
        return axis[0].contains(p.x()) && axis[1].contains(p.y()) && axis[2].contains(p.z());
    }
};

/// Parametric box outside of which control (i, j, k) has no influence.
Box support_region(const ControlLattice& lattice, const KnotVector& kv, const Index3& c);

/// Controls in the (r+1)^3 basis window at p, i-major then j then k.
std::vector<Index3> controls_affecting(const ControlLattice& lattice, const KnotVector& kv, const Eigen::Vector3d& p);

/// True when control `c` falls inside the stencil's basis window.
inline bool stencil_covers(const Stencil& s, const Index3& c) noexcept
{
    for (int a = 0; a < 3; ++a) {
        if (c[a] < s.first[a] || c[a] >= s.first[a] + s.order)
            return false;
    }
    return true;
}

} // namespace cube
