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

#include <filesystem>
#include <iosfwd>

namespace cube {

/// Pinhole camera with fixed intrinsics. x_cam = rotation * x + translation.
struct Camera
{
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    /// Focal lengths positive, rotation orthonormal to 1e-10.
    void validate() const;

    Eigen::Vector3d to_camera(const Eigen::Vector3d& x) const { return rotation * x + translation; }
};

/// (fx X/Z + cx, fy Y/Z + cy) of the camera-space point. Throws DomainError when Z <= 0.
Eigen::Vector2d project(const Camera& camera, const Eigen::Vector3d& x);

/// d project / d x, 2 x 3, at a point in front of the camera.
Eigen::Matrix<double, 2, 3> project_jacobian(const Camera& camera, const Eigen::Vector3d& x);

/// Text form: a line `fx fy cx cy`, then three rows `r00 r01 r02 t0` of [R | t]. `#` starts a comment.
Camera read_camera(std::istream& in);
Camera load_camera(const std::filesystem::path& path);
void write_camera(std::ostream& out, const Camera& camera);

} // namespace cube
