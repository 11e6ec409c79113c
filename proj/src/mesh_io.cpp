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

#include "cube/mesh_io.hpp"

#include "cube/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cube {

namespace {

std::ifstream open_input(const std::filesystem::path& path, bool binary = false)
{
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    return out;
}

std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
            ++pos;
        const std::size_t start = pos;
        while (pos < line.size() && !std::isspace(static_cast<unsigned char>(line[pos])))
            ++pos;
        if (pos > start)
            tokens.push_back(line.substr(start, pos - start));
    }
    return tokens;
}

bool parse_double(std::string_view s, double& value)
{
    // std::from_chars for floating point is incomplete in some toolchains; strtod is fine here.
    std::string tmp(s);
    char* end = nullptr;
    value = std::strtod(tmp.c_str(), &end);
    return end == tmp.c_str() + tmp.size() && !tmp.empty();
}

bool parse_long(std::string_view s, long long& value)
{
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

void fan_triangulate(const std::vector<std::uint32_t>& poly, std::vector<Face>& faces)
{
    for (std::size_t n = 1; n + 1 < poly.size(); ++n)
        faces.push_back({poly[0], poly[n], poly[n + 1]});
}

} // namespace

TriMesh read_obj(std::istream& in)
{
    TriMesh mesh;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::uint32_t> poly;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty() || tokens[0].front() == '#')
            continue;
        if (tokens[0] == "v") {
            if (tokens.size() < 4)
                throw ParseError("vertex needs three coordinates", line_no);
            Eigen::Vector3d p;
            for (int a = 0; a < 3; ++a) {
                if (!parse_double(tokens[a + 1], p[a]))
                    throw ParseError("malformed coordinate '" + std::string(tokens[a + 1]) + "'", line_no);
            }
            mesh.vertices.push_back(p);
        } else if (tokens[0] == "f") {
            if (tokens.size() < 4)
                throw ParseError("face needs at least three vertices", line_no);
            poly.clear();
            for (std::size_t t = 1; t < tokens.size(); ++t) {
                const auto ref = tokens[t].substr(0, tokens[t].find('/'));
                long long idx = 0;
                if (!parse_long(ref, idx) || idx == 0)
                    throw ParseError("malformed face index '" + std::string(tokens[t]) + "'", line_no);
                const long long n = static_cast<long long>(mesh.vertices.size());
                const long long resolved = idx > 0 ? idx - 1 : n + idx;
                if (resolved < 0 || resolved >= n)
                    throw ValidationError("faces", "line " + std::to_string(line_no) + ": index " +
                                                       std::to_string(idx) + " out of range");
                poly.push_back(static_cast<std::uint32_t>(resolved));
            }
            fan_triangulate(poly, mesh.faces);
        }
    }
    mesh.validate();
    return mesh;
}

TriMesh load_obj(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return read_obj(in);
}

void write_obj(std::ostream& out, const TriMesh& mesh)
{
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices)
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path)
{
    auto out = open_output(path);
    write_obj(out, mesh);
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

namespace {

enum class PlyFormat
{
    ascii,
    binary_le,
};

struct PlyProperty
{
    std::string name;
    std::string type;
    bool is_list = false;
    std::string count_type;
};

struct PlyElement
{
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

std::size_t ply_type_size(const std::string& t)
{
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8")
        return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16")
        return 2;
    if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32")
        return 4;
    if (t == "double" || t == "float64")
        return 8;
    throw ParseError("unknown PLY property type '" + t + "'");
}

template <typename T>
T read_le(std::istream& in)
{
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T)))
        throw ParseError("unexpected end of binary PLY data");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(std::begin(buf), std::end(buf));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

double read_binary_scalar(std::istream& in, const std::string& t)
{
    if (t == "char" || t == "int8")
        return read_le<std::int8_t>(in);
    if (t == "uchar" || t == "uint8")
        return read_le<std::uint8_t>(in);
    if (t == "short" || t == "int16")
        return read_le<std::int16_t>(in);
    if (t == "ushort" || t == "uint16")
        return read_le<std::uint16_t>(in);
    if (t == "int" || t == "int32")
        return read_le<std::int32_t>(in);
    if (t == "uint" || t == "uint32")
        return read_le<std::uint32_t>(in);
    if (t == "float" || t == "float32")
        return read_le<float>(in);
    if (t == "double" || t == "float64")
        return read_le<double>(in);
    throw ParseError("unknown PLY property type '" + t + "'");
}

} // namespace

TriMesh read_ply(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() -> bool {
        if (!std::getline(in, line))
            return false;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        return true;
    };

    if (!next_line() || line != "ply")
        throw ParseError("missing 'ply' magic", 1);
    PlyFormat format = PlyFormat::ascii;
    std::vector<PlyElement> elements;
    bool header_done = false;
    while (next_line()) {
        const auto tokens = split_ws(line);
        if (tokens.empty())
            continue;
        if (tokens[0] == "format") {
            if (tokens.size() < 2)
                throw ParseError("malformed format line", line_no);
            if (tokens[1] == "ascii")
                format = PlyFormat::ascii;
            else if (tokens[1] == "binary_little_endian")
                format = PlyFormat::binary_le;
            else
                throw ParseError("unsupported PLY format '" + std::string(tokens[1]) + "'", line_no);
        } else if (tokens[0] == "element") {
            long long count = 0;
            if (tokens.size() != 3 || !parse_long(tokens[2], count) || count < 0)
                throw ParseError("malformed element line", line_no);
            elements.push_back({std::string(tokens[1]), static_cast<std::size_t>(count), {}});
        } else if (tokens[0] == "property") {
            if (elements.empty())
                throw ParseError("property before any element", line_no);
            PlyProperty prop;
            if (tokens.size() == 5 && tokens[1] == "list") {
                prop.is_list = true;
                prop.count_type = tokens[2];
                prop.type = tokens[3];
                prop.name = tokens[4];
                ply_type_size(prop.count_type);
            } else if (tokens.size() == 3) {
                prop.type = tokens[1];
                prop.name = tokens[2];
            } else {
                throw ParseError("malformed property line", line_no);
            }
            ply_type_size(prop.type);
            elements.back().props.push_back(prop);
        } else if (tokens[0] == "end_header") {
            header_done = true;
            break;
        }
        // comment / obj_info lines are skipped
    }
    if (!header_done)
        throw ParseError("PLY header has no end_header", line_no);

    TriMesh mesh;
    std::vector<std::uint32_t> poly;
    for (const auto& element : elements) {
        int xi = -1, yi = -1, zi = -1, fi = -1;
        for (std::size_t p = 0; p < element.props.size(); ++p) {
            const auto& name = element.props[p].name;
            if (name == "x")
                xi = static_cast<int>(p);
            else if (name == "y")
                yi = static_cast<int>(p);
            else if (name == "z")
                zi = static_cast<int>(p);
            else if (element.props[p].is_list && (name == "vertex_indices" || name == "vertex_index"))
                fi = static_cast<int>(p);
        }
        const bool is_vertex = element.name == "vertex";
        const bool is_face = element.name == "face";
        if (is_vertex && (xi < 0 || yi < 0 || zi < 0))
            throw ParseError("PLY vertex element lacks x, y, z properties");

        for (std::size_t n = 0; n < element.count; ++n) {
            Eigen::Vector3d v = Eigen::Vector3d::Zero();
            poly.clear();
            if (format == PlyFormat::ascii) {
                if (!next_line())
                    throw ParseError("unexpected end of PLY data in element '" + element.name + "'", line_no);
                const auto tokens = split_ws(line);
                std::size_t t = 0;
                for (std::size_t p = 0; p < element.props.size(); ++p) {
                    const auto& prop = element.props[p];
                    auto take = [&]() -> double {
                        double value = 0.0;
                        if (t >= tokens.size() || !parse_double(tokens[t], value))
                            throw ParseError("malformed PLY value in element '" + element.name + "'", line_no);
                        ++t;
                        return value;
                    };
                    if (prop.is_list) {
                        const auto len = static_cast<long long>(take());
                        for (long long q = 0; q < len; ++q) {
                            const double idx = take();
                            if (static_cast<int>(p) == fi)
                                poly.push_back(static_cast<std::uint32_t>(idx));
                        }
                    } else {
                        const double value = take();
                        if (static_cast<int>(p) == xi)
                            v.x() = value;
                        else if (static_cast<int>(p) == yi)
                            v.y() = value;
                        else if (static_cast<int>(p) == zi)
                            v.z() = value;
                    }
                }
            } else {
                for (std::size_t p = 0; p < element.props.size(); ++p) {
                    const auto& prop = element.props[p];
                    if (prop.is_list) {
                        const auto len = static_cast<long long>(read_binary_scalar(in, prop.count_type));
                        for (long long q = 0; q < len; ++q) {
                            const double idx = read_binary_scalar(in, prop.type);
                            if (static_cast<int>(p) == fi)
                                poly.push_back(static_cast<std::uint32_t>(idx));
                        }
                    } else {
                        const double value = read_binary_scalar(in, prop.type);
                        if (static_cast<int>(p) == xi)
                            v.x() = value;
                        else if (static_cast<int>(p) == yi)
                            v.y() = value;
                        else if (static_cast<int>(p) == zi)
                            v.z() = value;
                    }
                }
            }
            if (is_vertex)
                mesh.vertices.push_back(v);
            else if (is_face && fi >= 0) {
                if (poly.size() < 3)
                    throw ParseError("PLY face with fewer than three vertices", line_no);
                fan_triangulate(poly, mesh.faces);
            }
        }
    }
    mesh.validate();
    return mesh;
}

TriMesh load_ply(const std::filesystem::path& path)
{
    auto in = open_input(path, true);
    return read_ply(in);
}

void write_ply(std::ostream& out, const TriMesh& mesh)
{
    out << "ply\nformat ascii 1.0\n"
        << "element vertex " << mesh.vertices.size() << "\n"
        << "property double x\nproperty double y\nproperty double z\n"
        << "element face " << mesh.faces.size() << "\n"
        << "property list uchar int vertex_indices\nend_header\n";
    out << std::setprecision(17);
    for (const auto& v : mesh.vertices)
        out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& f : mesh.faces)
        out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void save_ply(const TriMesh& mesh, const std::filesystem::path& path)
{
    auto out = open_output(path);
    write_ply(out, mesh);
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

namespace {

std::string lower_extension(const std::filesystem::path& path)
{
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

} // namespace

TriMesh load_mesh(const std::filesystem::path& path)
{
    const auto ext = lower_extension(path);
    if (ext == ".ply")
        return load_ply(path);
    if (ext == ".obj")
        return load_obj(path);
    throw IoError("unsupported mesh extension '" + ext + "' (expected .obj or .ply)");
}

void save_mesh(const TriMesh& mesh, const std::filesystem::path& path)
{
    const auto ext = lower_extension(path);
    if (ext == ".ply")
        save_ply(mesh, path);
    else if (ext == ".obj")
        save_obj(mesh, path);
    else
        throw IoError("unsupported mesh extension '" + ext + "' (expected .obj or .ply)");
}

} // namespace cube
