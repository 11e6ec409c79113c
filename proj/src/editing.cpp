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

#include "cube/editing.hpp"

#include "cube/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace cube {

LatticeRegion LatticeRegion::box(Index3 lo, Index3 hi)
{
    LatticeRegion r;
    r.is_box_ = true;
    r.lo_ = lo;
    r.hi_ = hi;
    return r;
}

LatticeRegion LatticeRegion::set(std::vector<Index3> indices)
{
    LatticeRegion r;
    r.is_box_ = false;
    r.set_ = std::move(indices);
    return r;
}

LatticeRegion LatticeRegion::all(int m)
{
    return box({0, 0, 0}, {m - 1, m - 1, m - 1});
}

LatticeRegion LatticeRegion::none()
{
    return set({});
}

namespace {

std::string strip(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (!std::isspace(static_cast<unsigned char>(c)))
            out.push_back(c);
    }
    return out;
}

int parse_index(const std::string& s, const std::string& context)
{
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size())
        throw ParseError("bad index '" + s + "' in region " + context);
    if (v < 1)
        throw ParseError("region indices are 1-based; got " + s);
    return v - 1;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

} // namespace

LatticeRegion LatticeRegion::parse(const std::string& text)
{
    std::istringstream in(text);
    std::string kind;
    in >> kind;
    std::string rest;
    std::getline(in, rest);
    rest = strip(rest);
    if (kind == "box") {
        const auto axes = split(rest, ',');
        if (axes.size() != 3)
            throw ParseError("box region needs three ranges i0:i1,j0:j1,k0:k1");
        Index3 lo{}, hi{};
        for (int a = 0; a < 3; ++a) {
            const auto ends = split(axes[a], ':');
            if (ends.size() == 1) {
                lo[a] = hi[a] = parse_index(ends[0], "box");
            } else if (ends.size() == 2) {
                lo[a] = parse_index(ends[0], "box");
                hi[a] = parse_index(ends[1], "box");
            } else {
                throw ParseError("bad range '" + axes[a] + "' in box region");
            }
            if (hi[a] < lo[a])
                throw ParseError("empty range '" + axes[a] + "' in box region");
        }
        return box(lo, hi);
    }
    if (kind == "set") {
        std::vector<Index3> indices;
        if (rest.empty())
            return set({});
        for (const auto& item : split(rest, ';')) {
            if (item.empty())
                continue;
            if (item.size() < 2 || item.front() != '(' || item.back() != ')')
                throw ParseError("set entries must look like (i,j,k); got '" + item + "'");
            const auto parts = split(item.substr(1, item.size() - 2), ',');
            if (parts.size() != 3)
                throw ParseError("set entries need three indices; got '" + item + "'");
            indices.push_back({parse_index(parts[0], "set"), parse_index(parts[1], "set"), parse_index(parts[2], "set")});
        }
        return set(std::move(indices));
    }
    throw ParseError("region must start with 'box' or 'set'");
}

bool LatticeRegion::contains(const Index3& c) const
{
    if (is_box_) {
        for (int a = 0; a < 3; ++a) {
            if (c[a] < lo_[a] || c[a] > hi_[a])
                return false;
        }
        return true;
    }
    return std::find(set_.begin(), set_.end(), c) != set_.end();
}

void LatticeRegion::validate(int m) const
{
    auto check = [m](const Index3& c) {
        for (int a : c) {
            if (a < 0 || a >= m)
                throw IndexError("region index outside the " + std::to_string(m) + "^3 lattice");
        }
    };
    if (is_box_) {
        if (hi_[0] >= lo_[0] && hi_[1] >= lo_[1] && hi_[2] >= lo_[2]) {
            check(lo_);
            check(hi_);
        }
    } else {
        for (const auto& c : set_)
            check(c);
    }
}

std::vector<Index3> LatticeRegion::members(int m) const
{
    std::vector<Index3> out;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                if (contains({i, j, k}))
                    out.push_back({i, j, k});
            }
    return out;
}

void check_compatible(const CubeModel& a, const CubeModel& b)
{
    if (a.lattice.m() != b.lattice.m())
        throw IncompatibleError("m", "lattice sizes differ");
    if (a.lattice.dim() != b.lattice.dim())
        throw IncompatibleError("dim", "feature dimensions differ");
    if (!(a.knots == b.knots))
        throw IncompatibleError("knots", "knot vectors differ");
    if (!(a.tmpl == b.tmpl))
        throw IncompatibleError("template", "templates or sample sets differ");
    if (!(a.mlp == b.mlp))
        throw IncompatibleError("mlp", "residual MLP parameters differ");
}

CubeModel displace_control(const CubeModel& model, const Index3& c, const Eigen::Vector3d& delta)
{
    if (!model.lattice.in_range(c))
        throw IndexError("control index out of range");
    if (!delta.allFinite())
        throw DomainError("displacement must be finite");
    CubeModel out = model;
    auto f = out.lattice.feature(out.lattice.index(c));
    f[0] += delta.x();
    f[1] += delta.y();
    f[2] += delta.z();
    return out;
}

CubeModel swap_region(const CubeModel& a, const CubeModel& b, const LatticeRegion& region)
{
    check_compatible(a, b);
    const int m = a.lattice.m();
    region.validate(m);
    CubeModel out = a;
    for (const auto& c : region.members(m)) {
        const auto flat = out.lattice.index(c);
        const auto src = b.lattice.feature(flat);
        std::copy(src.begin(), src.end(), out.lattice.feature(flat).begin());
        out.lattice.weight(flat) = b.lattice.weight(flat);
    }
    return out;
}

CubeModel interpolate(const CubeModel& a, const CubeModel& b, double alpha)
{
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw DomainError("alpha must lie in [0, 1]");
    check_compatible(a, b);
    CubeModel out = a;
    if (alpha == 0.0)
        return out;
    if (alpha == 1.0) {
        out.lattice = b.lattice;
        return out;
    }
    auto& f = out.lattice.features();
    const auto& fb = b.lattice.features();
    for (std::size_t n = 0; n < f.size(); ++n)
        f[n] = (1.0 - alpha) * f[n] + alpha * fb[n];
    auto& h = out.lattice.weights();
    const auto& hb = b.lattice.weights();
    for (std::size_t n = 0; n < h.size(); ++n)
        h[n] = (1.0 - alpha) * h[n] + alpha * hb[n];
    return out;
}

CubeModel transfer_expression(const CubeModel& source_neutral, const CubeModel& source_expr,
                              const CubeModel& target_neutral)
{
    check_compatible(source_neutral, source_expr);
    check_compatible(source_neutral, target_neutral);
    CubeModel out = target_neutral;
    auto& f = out.lattice.features();
    const auto& fe = source_expr.lattice.features();
    const auto& fn = source_neutral.lattice.features();
    // Where target and source neutral agree the result is source_expr itself; taking
    // it directly keeps that case exact instead of off by a rounding step.
    for (std::size_t n = 0; n < f.size(); ++n)
        f[n] = f[n] == fn[n] ? fe[n] : f[n] + (fe[n] - fn[n]);
    auto& h = out.lattice.weights();
    const auto& he = source_expr.lattice.weights();
    const auto& hn = source_neutral.lattice.weights();
    for (std::size_t n = 0; n < h.size(); ++n)
        h[n] = h[n] == hn[n] ? he[n] : h[n] + (he[n] - hn[n]);
    out.lattice.validate();
    return out;
}

} // namespace cube
