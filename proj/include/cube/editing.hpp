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

#include "cube/model.hpp"

#include <string>
#include <vector>

namespace cube {

/**
 * A set of lattice controls: an inclusive index box or an explicit list.
 * Indices are 0-based in C++; the text form uses 1-based inclusive indices:
 *
 *     box i0:i1,j0:j1,k0:k1
 *     set (i,j,k);(i,j,k);...
 */
class LatticeRegion
{
public:
    static LatticeRegion box(Index3 lo, Index3 hi);
    static LatticeRegion set(std::vector<Index3> indices);
    static LatticeRegion all(int m);
    static LatticeRegion none();

    /// Parses the text form; throws ParseError.
    static LatticeRegion parse(const std::string& text);

    bool contains(const Index3& c) const;
    /// Throws IndexError if any index is outside [0, m)^3.
    void validate(int m) const;
    /// Explicit list of member indices for an m^3 lattice.
    std::vector<Index3> members(int m) const;

private:
    bool is_box_ = true;
    Index3 lo_{0, 0, 0};
    Index3 hi_{-1, -1, -1};
    std::vector<Index3> set_;
};

/// Copy of `model` with c_ijk[0:3] += delta. Other feature dims are unchanged.
CubeModel displace_control(const CubeModel& model, const Index3& c, const Eigen::Vector3d& delta);

/// Controls (features and weights) from `b` inside `region`, from `a` elsewhere.
CubeModel swap_region(const CubeModel& a, const CubeModel& b, const LatticeRegion& region);

/// (1 - alpha) a + alpha b on features and weights; MLP, knots and template from `a`.
CubeModel interpolate(const CubeModel& a, const CubeModel& b, double alpha);

/// target + (source_expr - source_neutral) on features and weights.
CubeModel transfer_expression(const CubeModel& source_neutral, const CubeModel& source_expr,
                              const CubeModel& target_neutral);

/// Throws IncompatibleError naming the first differing field (m, dim, knots, template, mlp).
void check_compatible(const CubeModel& a, const CubeModel& b);

} // namespace cube
