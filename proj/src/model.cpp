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

#include "cube/model.hpp"

#include "cube/error.hpp"

#include <cmath>
#include <string>

namespace cube {

namespace {

constexpr double barycentric_tolerance = 1e-9;

Eigen::Vector3d clamp_unit(const Eigen::Vector3d& p)
{
    return p.cwiseMax(0.0).cwiseMin(1.0);
}

} // namespace

TemplateParam normalize_template(const TriMesh& mesh, double margin)
{
    if (mesh.vertices.empty())
        throw ValidationError("template", "mesh has no vertices");
    mesh.validate();
    if (!(margin >= 0.0 && margin < 0.5))
        throw ConfigError("margin must lie in [0, 0.5)");
    const Aabb box = bounds(mesh.vertices);
    const double extent = box.extent().maxCoeff();
    if (!(extent > 0.0))
        throw ValidationError("template", "bounding box has zero extent");

    TemplateParam t;
    t.mesh = mesh;
    t.to_unit.scale = (1.0 - 2.0 * margin) / extent;
    t.to_unit.translation = Eigen::Vector3d::Constant(0.5) - t.to_unit.scale * box.center();
    t.samples.reserve(mesh.vertices.size());
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
        SurfaceSample s;
        s.origin = SampleOrigin::vertex;
        s.index = static_cast<std::uint32_t>(v);
        // Rounding can push a point a few ulps past the cube; samples must stay in the domain.
        s.param = clamp_unit(t.to_unit.apply(mesh.vertices[v]));
        t.samples.push_back(s);
    }
    t.faces = mesh.faces;
    return t;
}

SurfaceSample make_surface_sample(const TemplateParam& tmpl, const FacePoint& fp)
{
    if (fp.face >= tmpl.mesh.faces.size())
        throw IndexError("face index " + std::to_string(fp.face) + " out of range");
    const auto& b = fp.bary;
    if (!b.allFinite() || b.minCoeff() < -barycentric_tolerance || std::abs(b.sum() - 1.0) > barycentric_tolerance)
        throw ValidationError("barycentric", "coordinates must be non-negative and sum to 1");
    const auto& face = tmpl.mesh.faces[fp.face];
    const Eigen::Vector3d x =
        b[0] * tmpl.mesh.vertices[face[0]] + b[1] * tmpl.mesh.vertices[face[1]] + b[2] * tmpl.mesh.vertices[face[2]];
    SurfaceSample s;
    s.origin = SampleOrigin::surface;
    s.index = fp.face;
    s.bary = b;
    s.param = clamp_unit(tmpl.to_unit.apply(x));
    return s;
}

void CubeModel::validate() const
{
    lattice.validate();
    mlp.validate();
    tmpl.mesh.validate();
    if (knots.num_controls() != lattice.m())
        throw ValidationError("knots", "built for " + std::to_string(knots.num_controls()) +
                                           " controls, lattice has " + std::to_string(lattice.m()));
    if (mlp.input_dim() != lattice.dim())
        throw ValidationError("mlp", "input width " + std::to_string(mlp.input_dim()) + " != lattice dim " +
                                         std::to_string(lattice.dim()));
    if (!(tmpl.to_unit.scale > 0.0) || !std::isfinite(tmpl.to_unit.scale))
        throw ValidationError("transform", "scale must be positive");
    for (std::size_t n = 0; n < tmpl.samples.size(); ++n) {
        const auto& s = tmpl.samples[n];
        if (!(s.param.minCoeff() >= 0.0 && s.param.maxCoeff() <= 1.0))
            throw ValidationError("samples", "sample " + std::to_string(n) + " outside [0, 1]^3");
        const std::size_t limit = s.origin == SampleOrigin::vertex ? tmpl.mesh.vertices.size() : tmpl.mesh.faces.size();
        if (s.index >= limit)
            throw ValidationError("samples", "sample " + std::to_string(n) + " references a missing template element");
    }
    for (const auto& f : tmpl.faces) {
        for (auto idx : f) {
            if (idx >= tmpl.samples.size())
                throw ValidationError("faces", "output face references sample " + std::to_string(idx));
        }
    }
}

CubeModel create_model(const TriMesh& template_mesh, const ModelOptions& options)
{
    if (options.dim < 3)
        throw ConfigError("feature dimension must be at least 3");
    KnotVector knots = make_clamped_uniform_knots(options.controls, options.degree);
    ControlLattice lattice = ControlLattice::greville_identity(knots, options.dim);
    TemplateParam tmpl = normalize_template(template_mesh, options.margin);
    if (options.scene_space) {
        for (std::size_t n = 0; n < lattice.num_controls(); ++n) {
            auto f = lattice.feature(n);
            const Eigen::Vector3d x = tmpl.to_unit.inverse(Eigen::Vector3d(f[0], f[1], f[2]));
            f[0] = x.x();
            f[1] = x.y();
            f[2] = x.z();
        }
    }
    CubeModel model{std::move(knots), std::move(lattice), ResidualMlp::create(options.dim, options.dim, options.seed),
                    std::move(tmpl)};
    model.validate();
    return model;
}

DecodedPoint decode_point(const CubeModel& model, const Stencil& stencil)
{
    DecodedPoint d;
    d.z.resize(model.lattice.dim());
    evaluate(model.lattice, stencil, std::span<double>(d.z.data(), d.z.size()));
    d.base = d.z.head<3>();
    d.out = d.base + model.mlp.forward(d.z);
    return d;
}

DecodedPoint decode_point(const CubeModel& model, const Eigen::Vector3d& p)
{
    return decode_point(model, make_stencil(model.knots, p));
}

std::vector<Stencil> sample_stencils(const CubeModel& model)
{
    std::vector<Stencil> stencils;
    stencils.reserve(model.tmpl.samples.size());
    for (const auto& s : model.tmpl.samples)
        stencils.push_back(make_stencil(model.knots, s.param));
    return stencils;
}

namespace {

TriMesh decode_samples(const CubeModel& model, bool base_only)
{
    TriMesh out;
    out.vertices.reserve(model.tmpl.samples.size());
    for (const auto& s : model.tmpl.samples) {
        const auto d = decode_point(model, s.param);
        out.vertices.push_back(base_only ? d.base : d.out);
    }
    out.faces = model.tmpl.faces;
    return out;
}

} // namespace

TriMesh decode_mesh(const CubeModel& model)
{
    return decode_samples(model, false);
}

TriMesh decode_base_mesh(const CubeModel& model)
{
    return decode_samples(model, true);
}

TriMesh resample_topology(const CubeModel& model, std::span<const FacePoint> samples, std::span<const Face> faces)
{
    TriMesh out;
    out.vertices.reserve(samples.size());
    for (const auto& fp : samples)
        out.vertices.push_back(decode_point(model, make_surface_sample(model.tmpl, fp).param).out);
    out.faces.assign(faces.begin(), faces.end());
    out.validate();
    return out;
}

} // namespace cube
