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

#include "cube/model_io.hpp"

#include "cube/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace cube {

std::uint64_t fnv1a64(std::span<const unsigned char> bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

template <typename T>
void put_le(std::vector<unsigned char>& buf, T value)
{
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(std::begin(bytes), std::end(bytes));
    buf.insert(buf.end(), std::begin(bytes), std::end(bytes));
}

class PayloadWriter
{
public:
    void doubles(std::span<const double> values)
    {
        put_le<std::uint64_t>(buf_, values.size());
        for (double v : values)
            put_le(buf_, v);
    }
    void u32s(std::span<const std::uint32_t> values)
    {
        put_le<std::uint64_t>(buf_, values.size());
        for (auto v : values)
            put_le(buf_, v);
    }
    const std::vector<unsigned char>& bytes() const { return buf_; }

private:
    std::vector<unsigned char> buf_;
};

class PayloadReader
{
public:
    explicit PayloadReader(std::span<const unsigned char> bytes) : bytes_(bytes) {}

    std::vector<double> doubles(const std::string& field, std::size_t expected)
    {
        const auto n = count(field, expected);
        std::vector<double> values(n);
        for (auto& v : values)
            v = get<double>(field);
        return values;
    }
    std::vector<std::uint32_t> u32s(const std::string& field, std::size_t expected)
    {
        const auto n = count(field, expected);
        std::vector<std::uint32_t> values(n);
        for (auto& v : values)
            v = get<std::uint32_t>(field);
        return values;
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    std::size_t count(const std::string& field, std::size_t expected)
    {
        const auto n = get<std::uint64_t>(field);
        if (n != expected)
            throw ValidationError(field, "expected " + std::to_string(expected) + " values, file holds " +
                                             std::to_string(n));
        return static_cast<std::size_t>(n);
    }

    template <typename T>
    T get(const std::string& field)
    {
        if (bytes_.size() - pos_ < sizeof(T))
            throw ParseError("payload ends inside field '" + field + "'");
        unsigned char raw[sizeof(T)];
        std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        if constexpr (std::endian::native == std::endian::big)
            std::reverse(std::begin(raw), std::end(raw));
        T value;
        std::memcpy(&value, raw, sizeof(T));
        return value;
    }

    std::span<const unsigned char> bytes_;
    std::size_t pos_ = 0;
};

std::string provenance_name(const std::vector<SurfaceSample>& samples)
{
    bool any_vertex = false;
    bool any_surface = false;
    for (const auto& s : samples) {
        (s.origin == SampleOrigin::vertex ? any_vertex : any_surface) = true;
    }
    if (any_vertex && any_surface)
        return "mixed";
    return any_surface ? "surface" : "vertex";
}

std::vector<std::uint32_t> flatten_faces(const std::vector<Face>& faces)
{
    std::vector<std::uint32_t> flat;
    flat.reserve(faces.size() * 3);
    for (const auto& f : faces)
        flat.insert(flat.end(), f.begin(), f.end());
    return flat;
}

std::vector<Face> unflatten_faces(const std::vector<std::uint32_t>& flat)
{
    std::vector<Face> faces(flat.size() / 3);
    for (std::size_t n = 0; n < faces.size(); ++n)
        faces[n] = {flat[3 * n], flat[3 * n + 1], flat[3 * n + 2]};
    return faces;
}

constexpr std::size_t max_header_lines = 64;

std::size_t header_size(const std::map<std::string, std::string>& header, const std::string& key)
{
    const auto it = header.find(key);
    if (it == header.end())
        throw ParseError("header lacks '" + key + "'");
    std::size_t pos = 0;
    long long value = 0;
    try {
        value = std::stoll(it->second, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != it->second.size() || value < 0)
        throw ParseError("header field '" + key + "' is not a non-negative integer");
    return static_cast<std::size_t>(value);
}

} // namespace

void write_model(std::ostream& out, const CubeModel& model)
{
    model.validate();
    const auto& lat = model.lattice;
    const auto& tmpl = model.tmpl;

    PayloadWriter w;
    w.doubles(model.knots.knots());
    w.doubles(lat.weights());
    w.doubles(lat.features());
    for (const auto& layer : model.mlp.layers()) {
        std::vector<double> row_major;
        row_major.reserve(static_cast<std::size_t>(layer.weight.size()));
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                row_major.push_back(layer.weight(r, c));
        w.doubles(row_major);
        w.doubles(std::span<const double>(layer.bias.data(), static_cast<std::size_t>(layer.bias.size())));
    }
    const double transform[4] = {tmpl.to_unit.scale, tmpl.to_unit.translation.x(), tmpl.to_unit.translation.y(),
                                 tmpl.to_unit.translation.z()};
    w.doubles(transform);
    std::vector<double> verts;
    verts.reserve(tmpl.mesh.vertices.size() * 3);
    for (const auto& v : tmpl.mesh.vertices)
        verts.insert(verts.end(), {v.x(), v.y(), v.z()});
    w.doubles(verts);
    w.u32s(flatten_faces(tmpl.mesh.faces));
    std::vector<double> samples;
    samples.reserve(tmpl.samples.size() * 8);
    for (const auto& s : tmpl.samples) {
        samples.insert(samples.end(), {s.origin == SampleOrigin::vertex ? 0.0 : 1.0, static_cast<double>(s.index),
                                       s.bary.x(), s.bary.y(), s.bary.z(), s.param.x(), s.param.y(), s.param.z()});
    }
    w.doubles(samples);
    w.u32s(flatten_faces(tmpl.faces));

    const auto& payload = w.bytes();
    out << "CUBE " << model_format_version << '\n'
        << "m " << lat.m() << '\n'
        << "d " << lat.dim() << '\n'
        << "r " << model.knots.degree() << '\n'
        << "activation " << to_string(model.mlp.activation()) << '\n'
        << "layers";
    for (int d : model.mlp.layer_dims())
        out << ' ' << d;
    out << '\n'
        << "provenance " << provenance_name(tmpl.samples) << '\n'
        << "samples " << tmpl.samples.size() << '\n'
        << "template_vertices " << tmpl.mesh.vertices.size() << '\n'
        << "template_faces " << tmpl.mesh.faces.size() << '\n'
        << "output_faces " << tmpl.faces.size() << '\n'
        << "payload_bytes " << payload.size() << '\n'
        << "end\n";
    out.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    std::vector<unsigned char> checksum;
    put_le(checksum, fnv1a64(payload));
    out.write(reinterpret_cast<const char*>(checksum.data()), static_cast<std::streamsize>(checksum.size()));
}

CubeModel read_model(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("empty model file");
    {
        std::istringstream magic(line);
        std::string tag;
        int version = 0;
        if (!(magic >> tag >> version) || tag != "CUBE")
            throw ParseError("not a .cube model file (bad magic)", 1);
        if (version != model_format_version)
            throw ParseError("unsupported model format version " + std::to_string(version) + " (expected " +
                                 std::to_string(model_format_version) + ")",
                             1);
    }

    std::map<std::string, std::string> header;
    bool ended = false;
    for (std::size_t n = 2; n < max_header_lines + 2 && std::getline(in, line); ++n) {
        if (line == "end") {
            ended = true;
            break;
        }
        const auto sp = line.find(' ');
        if (sp == std::string::npos)
            throw ParseError("malformed header line '" + line + "'", n);
        header[line.substr(0, sp)] = line.substr(sp + 1);
    }
    if (!ended)
        throw ParseError("model header is truncated or missing 'end'");

    const auto m = header_size(header, "m");
    const auto d = header_size(header, "d");
    const auto r = header_size(header, "r");
    const auto n_samples = header_size(header, "samples");
    const auto n_verts = header_size(header, "template_vertices");
    const auto n_faces = header_size(header, "template_faces");
    const auto n_out_faces = header_size(header, "output_faces");
    const auto payload_bytes = header_size(header, "payload_bytes");
    if (payload_bytes > (std::size_t{1} << 34))
        throw ValidationError("payload_bytes", "implausibly large payload");
    if (m == 0 || m > 1024 || d > 1 << 16 || r > 15)
        throw ValidationError("header", "implausible lattice size");
    const auto activation_it = header.find("activation");
    if (activation_it == header.end())
        throw ParseError("header lacks 'activation'");
    const Activation activation = activation_from_string(activation_it->second);
    std::vector<std::size_t> dims;
    {
        const auto it = header.find("layers");
        if (it == header.end())
            throw ParseError("header lacks 'layers'");
        std::istringstream ls(it->second);
        std::size_t v = 0;
        while (ls >> v)
            dims.push_back(v);
        if (!ls.eof())
            throw ParseError("header field 'layers' is malformed");
        if (dims.size() != ResidualMlp::num_layers + 1)
            throw ValidationError("layers", "expected " + std::to_string(ResidualMlp::num_layers + 1) + " widths");
        for (auto w : dims) {
            if (w == 0 || w > 1 << 16)
                throw ValidationError("layers", "implausible layer width");
        }
    }

    std::vector<unsigned char> payload(payload_bytes);
    if (!in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload_bytes)))
        throw ParseError("model payload is truncated (expected " + std::to_string(payload_bytes) + " bytes)");
    unsigned char checksum_raw[8];
    if (!in.read(reinterpret_cast<char*>(checksum_raw), 8))
        throw ParseError("model file is truncated (missing checksum)");
    std::uint64_t stored = 0;
    for (int b = 7; b >= 0; --b)
        stored = (stored << 8) | checksum_raw[b];
    if (stored != fnv1a64(payload))
        throw ValidationError("checksum", "payload checksum mismatch");

    PayloadReader rd(payload);
    auto knots = rd.doubles("knots", m + r + 1);
    auto weights = rd.doubles("weights", m * m * m);
    auto features = rd.doubles("features", m * m * m * d);
    std::vector<DenseLayer> layers(ResidualMlp::num_layers);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto rows = dims[l + 1];
        const auto cols = dims[l];
        const std::string name = "mlp.layer" + std::to_string(l);
        const auto wv = rd.doubles(name + ".weight", rows * cols);
        const auto bv = rd.doubles(name + ".bias", rows);
        layers[l].weight.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t rr = 0; rr < rows; ++rr)
            for (std::size_t cc = 0; cc < cols; ++cc)
                layers[l].weight(static_cast<Eigen::Index>(rr), static_cast<Eigen::Index>(cc)) = wv[rr * cols + cc];
        layers[l].bias = Eigen::Map<const Eigen::VectorXd>(bv.data(), static_cast<Eigen::Index>(rows));
    }
    const auto transform = rd.doubles("transform", 4);
    const auto verts = rd.doubles("template_vertices", 3 * n_verts);
    const auto faces = rd.u32s("template_faces", 3 * n_faces);
    const auto samples = rd.doubles("samples", 8 * n_samples);
    const auto out_faces = rd.u32s("output_faces", 3 * n_out_faces);
    if (!rd.at_end())
        throw ValidationError("payload", "trailing bytes after the last field");

    TemplateParam tmpl;
    tmpl.to_unit.scale = transform[0];
    tmpl.to_unit.translation = Eigen::Vector3d(transform[1], transform[2], transform[3]);
    tmpl.mesh.vertices.resize(n_verts);
    for (std::size_t v = 0; v < n_verts; ++v)
        tmpl.mesh.vertices[v] = Eigen::Vector3d(verts[3 * v], verts[3 * v + 1], verts[3 * v + 2]);
    tmpl.mesh.faces = unflatten_faces(faces);
    tmpl.samples.resize(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        const double* p = samples.data() + 8 * s;
        if (p[0] != 0.0 && p[0] != 1.0)
            throw ValidationError("samples", "sample " + std::to_string(s) + " has an unknown origin code");
        if (!(p[1] >= 0.0 && p[1] <= 4294967295.0) || p[1] != std::floor(p[1]))
            throw ValidationError("samples", "sample " + std::to_string(s) + " has an invalid index");
        auto& out = tmpl.samples[s];
        out.origin = p[0] == 0.0 ? SampleOrigin::vertex : SampleOrigin::surface;
        out.index = static_cast<std::uint32_t>(p[1]);
        out.bary = Eigen::Vector3d(p[2], p[3], p[4]);
        out.param = Eigen::Vector3d(p[5], p[6], p[7]);
    }
    tmpl.faces = unflatten_faces(out_faces);

    CubeModel model{KnotVector(static_cast<int>(r), std::move(knots)),
                    ControlLattice(static_cast<int>(m), static_cast<int>(d), std::move(features), std::move(weights)),
                    ResidualMlp(std::move(layers), activation), std::move(tmpl)};
    model.validate();
    return model;
}

void save_model(const CubeModel& model, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    write_model(out, model);
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

CubeModel load_model(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    return read_model(in);
}

} // namespace cube
