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

#include <filesystem>
#include <iosfwd>

namespace cube {

/**
 * Wavefront OBJ subset: `v x y z` and `f a b c ...` lines. Face entries may
 * use the `v/vt/vn` forms and negative (relative) indices; texture and normal
 * references are dropped. Polygons are fan-triangulated around their first
 * vertex: (0,1,2), (0,2,3), ... All other line types are ignored.
 */
TriMesh read_obj(std::istream& in);
TriMesh load_obj(const std::filesystem::path& path);

/// Coordinates are written with 17 significant digits, so a save/load round trip is exact.
void write_obj(std::ostream& out, const TriMesh& mesh);
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);

/// ASCII and binary little-endian PLY; needs x, y, z vertex properties and an optional face list.
TriMesh read_ply(std::istream& in);
TriMesh load_ply(const std::filesystem::path& path);

/// ASCII PLY with double x, y, z and int face lists.
void write_ply(std::ostream& out, const TriMesh& mesh);
void save_ply(const TriMesh& mesh, const std::filesystem::path& path);

/// Dispatch on extension (.obj or .ply).
TriMesh load_mesh(const std::filesystem::path& path);
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);

} // namespace cube
