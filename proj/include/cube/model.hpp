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

#include "cube/feature_volume.hpp"
#include "cube/mesh.hpp"
#include "cube/mlp.hpp"
#include "cube/spline.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cube {

/// Isotropic scale + translation taking scene coordinates into the unit cube.
struct UnitTransform
{
    double scale = 1.0;
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return scale * x + translation; }
    Eigen::Vector3d inverse(const Eigen::Vector3d& p) const { return (p - translation) / scale; }

    bool operator==(const UnitTransform&) const = default;
};

/// Where on the template a parametric sample comes from.
enum class SampleOrigin : std::uint8_t
{
    vertex,  ///< template vertex `index`
    surface, ///< face `index` at barycentric coordinates `bary`
};

struct SurfaceSample
{
    SampleOrigin origin = SampleOrigin::vertex;
    std::uint32_t index = 0;
    Eigen::Vector3d bary = Eigen::Vector3d(1.0, 0.0, 0.0);
    Eigen::Vector3d param = Eigen::Vector3d::Zero(); ///< in [0, 1]^3

    bool operator==(const SurfaceSample&) const = default;
};

/// Barycentric location on a template face.
struct FacePoint
{
    std::uint32_t face = 0;
    Eigen::Vector3d bary = Eigen::Vector3d(1.0, 0.0, 0.0);
};

/**
 * Fixed template mesh normalized into the unit cube, and the parametric
 * sample points decoded for every model built on it. `faces` is the output
 * connectivity over the samples (the template faces when samples are its
 * vertices).
 */
struct TemplateParam
{
    TriMesh mesh;
    UnitTransform to_unit;
    std::vector<SurfaceSample> samples;
    std::vector<Face> faces;

    bool operator==(const TemplateParam&) const = default;
};

/// Center the bounding box at (0.5, 0.5, 0.5) and scale its longest side to 1 - 2 margin.
/// Samples are the template vertices.
TemplateParam normalize_template(const TriMesh& mesh, double margin = 0.01);

/// Parametric sample for a point on the template surface. Throws on bad face or barycentrics.
SurfaceSample make_surface_sample(const TemplateParam& tmpl, const FacePoint& fp);

struct CubeModel
{
    KnotVector knots;
    ControlLattice lattice;
    ResidualMlp mlp;
    TemplateParam tmpl;

    /// Throws ValidationError / ConfigError when the parts do not fit together.
    void validate() const;

    bool operator==(const CubeModel&) const = default;
};

struct ModelOptions
{
    int controls = 4;
    int dim = 16;
    int degree = 2;
    double margin = 0.01;
    std::uint64_t seed = 0;
    /// Place the identity lattice in scene coordinates (decode reproduces the template as given)
    /// instead of unit-cube coordinates.
    bool scene_space = false;
};

/// Greville identity lattice, unit weights, zero-output MLP over a normalized template.
CubeModel create_model(const TriMesh& template_mesh, const ModelOptions& options = {});

struct DecodedPoint
{
    Eigen::Vector3d base;
    Eigen::Vector3d out;
    Eigen::VectorXd z;
};

DecodedPoint decode_point(const CubeModel& model, const Eigen::Vector3d& p);
DecodedPoint decode_point(const CubeModel& model, const Stencil& stencil);

/// Decoded final positions of every template sample, with the template's output faces.
TriMesh decode_mesh(const CubeModel& model);
/// Same connectivity, base-shape positions (before the residual).
TriMesh decode_base_mesh(const CubeModel& model);

/// Decode at arbitrary template-surface points. `faces` (optional) indexes into `samples`.
TriMesh resample_topology(const CubeModel& model, std::span<const FacePoint> samples,
                          std::span<const Face> faces = {});

/// Stencils of every template sample, in sample order.
std::vector<Stencil> sample_stencils(const CubeModel& model);

} // namespace cube
