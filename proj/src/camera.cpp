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

#include "cube/camera.hpp"

#include "cube/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace cube {

void Camera::validate() const
{
    if (!(fx > 0.0) || !(fy > 0.0))
        throw ValidationError("camera", "focal lengths must be positive");
    if (!rotation.allFinite() || !translation.allFinite() || !std::isfinite(cx) || !std::isfinite(cy))
        throw ValidationError("camera", "non-finite camera parameter");
    if ((rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm() >= 1e-10)
        throw ValidationError("camera", "rotation is not orthonormal");
}

Eigen::Vector2d project(const Camera& camera, const Eigen::Vector3d& x)
{
    const Eigen::Vector3d c = camera.to_camera(x);
    if (!(c.z() > 0.0))
        throw DomainError("point is not in front of the camera (depth " + std::to_string(c.z()) + ")");
    return {camera.fx * c.x() / c.z() + camera.cx, camera.fy * c.y() / c.z() + camera.cy};
}

Eigen::Matrix<double, 2, 3> project_jacobian(const Camera& camera, const Eigen::Vector3d& x)
{
    const Eigen::Vector3d c = camera.to_camera(x);
    const double iz = 1.0 / c.z();
    Eigen::Matrix<double, 2, 3> j;
    j << camera.fx * iz, 0.0, -camera.fx * c.x() * iz * iz,
         0.0, camera.fy * iz, -camera.fy * c.y() * iz * iz;
    return j * camera.rotation;
}

Camera read_camera(std::istream& in)
{
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        double v = 0.0;
        while (ls >> v)
            values.push_back(v);
        if (!ls.eof())
            throw ParseError("malformed camera value", line_no);
    }
    if (values.size() != 16)
        throw ParseError("camera file needs 16 numbers (fx fy cx cy and a 3x4 [R|t]), found " +
                         std::to_string(values.size()));
    Camera cam;
    cam.fx = values[0];
    cam.fy = values[1];
    cam.cx = values[2];
    cam.cy = values[3];
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c)
            cam.rotation(r, c) = values[4 + 4 * r + c];
        cam.translation[r] = values[4 + 4 * r + 3];
    }
    cam.validate();
    return cam;
}

Camera load_camera(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    return read_camera(in);
}

void write_camera(std::ostream& out, const Camera& camera)
{
    out << std::setprecision(17) << camera.fx << ' ' << camera.fy << ' ' << camera.cx << ' ' << camera.cy << '\n';
    for (int r = 0; r < 3; ++r) {
        out << camera.rotation(r, 0) << ' ' << camera.rotation(r, 1) << ' ' << camera.rotation(r, 2) << ' '
            << camera.translation[r] << '\n';
    }
}

} // namespace cube
