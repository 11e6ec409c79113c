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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>

namespace cube {

/**
 * `.cube` model container, format version 1.
 *
 * A text header of `key value` lines, terminated by a line `end`:
 *
 *     CUBE 1
 *     m <controls per axis>
 *     d <feature dim>
 *     r <degree>
 *     activation relu
 *     layers <d> <h1> <h2> <h3> 3
 *     provenance vertex|surface|mixed
 *     samples <count>
 *     template_vertices <count>
 *     template_faces <count>
 *     output_faces <count>
 *     payload_bytes <byte count>
 *     end
 *
 * followed by `payload_bytes` bytes of payload and an 8-byte little-endian
 * FNV-1a 64 checksum of the payload. The payload is a sequence of arrays,
 * each prefixed with its element count as a little-endian u64. Floats are
 * little-endian IEEE binary64, integers little-endian u32, in this order:
 *
 *  1. knots               m + r + 1 f64
 *  2. weights             m^3 f64, (i, j, k) row-major, k fastest
 *  3. features            m^3 * d f64, same control order, feature dims contiguous
 *  4. per MLP layer l:    weight (rows * cols f64, row-major), then bias (rows f64)
 *  5. transform           4 f64: scale, tx, ty, tz
 *  6. template vertices   3 * V f64
 *  7. template faces      3 * F u32
 *  8. samples             8 * S f64 per sample: origin (0 vertex, 1 surface), index,
 *                         bary[3], param[3]
 *  9. output faces        3 * G u32 (indices into samples)
 */
void write_model(std::ostream& out, const CubeModel& model);
CubeModel read_model(std::istream& in);

void save_model(const CubeModel& model, const std::filesystem::path& path);
CubeModel load_model(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

inline constexpr int model_format_version = 1;

} // namespace cube
