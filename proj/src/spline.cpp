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

#include "cube/spline.hpp"

#include "cube/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cube {

namespace {

void check_parameter(double u)
{
    if (!(u >= 0.0 && u <= 1.0))
        throw DomainError("parameter " + std::to_string(u) + " outside [0, 1]");
}

void check_index(const KnotVector& kv, int i)
{
    if (i < 0 || i >= kv.num_controls())
        throw IndexError("basis index " + std::to_string(i) + " outside [0, " +
                         std::to_string(kv.num_controls()) + ")");
}

// Index s of the knot span with t_s <= u < t_{s+1}, restricted to r <= s <= M-1.
int find_span(const KnotVector& kv, double u)
{
    const int r = kv.degree();
    const int m = kv.num_controls();
    if (u >= 1.0)
        return m - 1;
    const auto knots = kv.knots();
    const auto it = std::upper_bound(knots.begin() + r, knots.begin() + m + 1, u);
    return static_cast<int>(it - knots.begin()) - 1;
}

double basis_recursive(const KnotVector& kv, int i, int degree, double u)
{
    const auto& t = kv;
    if (degree == 0) {
        if (t[i] <= u && u < t[i + 1])
            return 1.0;
        // Closed final span: the last non-empty span also owns u = 1.
        if (u == 1.0 && i == kv.num_controls() - 1)
            return 1.0;
        return 0.0;
    }
    double value = 0.0;
    const double left_den = t[i + degree] - t[i];
    if (left_den != 0.0)
        value += (u - t[i]) / left_den * basis_recursive(kv, i, degree - 1, u);
    const double right_den = t[i + degree + 1] - t[i + 1];
    if (right_den != 0.0)
        value += (t[i + degree + 1] - u) / right_den * basis_recursive(kv, i + 1, degree - 1, u);
    return value;
}

} // namespace

KnotVector::KnotVector(int degree, std::vector<double> knots) : degree_(degree), knots_(std::move(knots))
{
    if (degree_ < 0)
        throw ConfigError("degree must be non-negative");
    const auto n = static_cast<int>(knots_.size());
    if (n < 2 * (degree_ + 1))
        throw ConfigError("knot vector needs at least " + std::to_string(2 * (degree_ + 1)) +
                          " entries for degree " + std::to_string(degree_));
    for (int i = 0; i <= degree_; ++i) {
        if (knots_[i] != 0.0 || knots_[n - 1 - i] != 1.0)
            throw ConfigError("knot vector is not clamped to [0, 1]");
    }
    for (int i = 1; i < n; ++i) {
        if (!(knots_[i] >= knots_[i - 1]))
            throw ConfigError("knot vector is not non-decreasing at position " + std::to_string(i));
    }
}

double KnotVector::greville(int i) const
{
    if (degree_ < 1)
        throw ConfigError("Greville abscissae need degree >= 1");
    if (i < 0 || i >= num_controls())
        throw IndexError("basis index " + std::to_string(i) + " out of range");
    double sum = 0.0;
    for (int k = 1; k <= degree_; ++k)
        sum += knots_[i + k];
    return sum / degree_;
}

KnotVector make_clamped_uniform_knots(int num_controls, int degree)
{
    if (degree < 0 || num_controls < degree + 1)
        throw ConfigError("need num_controls >= degree + 1 (got M=" + std::to_string(num_controls) +
                          ", r=" + std::to_string(degree) + ")");
    std::vector<double> knots;
    knots.reserve(num_controls + degree + 1);
    knots.insert(knots.end(), degree + 1, 0.0);
    const int segments = num_controls - degree;
    for (int k = 1; k < segments; ++k)
        knots.push_back(static_cast<double>(k) / segments);
    knots.insert(knots.end(), degree + 1, 1.0);
    return KnotVector(degree, std::move(knots));
}

double basis_value(const KnotVector& kv, int i, double u)
{
    check_index(kv, i);
    check_parameter(u);
    return basis_recursive(kv, i, kv.degree(), u);
}

Span nonzero_span(const KnotVector& kv, double u)
{
    check_parameter(u);
    return {find_span(kv, u) - kv.degree(), kv.degree() + 1};
}

Interval support_interval(const KnotVector& kv, int i)
{
    check_index(kv, i);
    const int r = kv.degree();
    return {kv[i], kv[i + r + 1], i == kv.num_controls() - 1};
}

Span basis_values(const KnotVector& kv, double u, std::span<double> out)
{
    check_parameter(u);
    const int r = kv.degree();
    if (static_cast<int>(out.size()) < r + 1)
        throw ConfigError("basis output buffer must hold at least degree + 1 values");

    const int s = find_span(kv, u);
    // Triangular evaluation of the recursion over the non-vanishing functions
    // N_{s-r} .. N_s; left[j] = u - t_{s+1-j}, right[j] = t_{s+j} - u.
    double left[16];
    double right[16];
    if (r >= 16)
        throw ConfigError("degree too large for table evaluation");
    out[0] = 1.0;
    for (int j = 1; j <= r; ++j) {
        left[j] = u - kv[s + 1 - j];
        right[j] = kv[s + j] - u;
        double saved = 0.0;
        for (int k = 0; k < j; ++k) {
            const double den = right[k + 1] + left[j - k];
            const double temp = den != 0.0 ? out[k] / den : 0.0;
            out[k] = saved + right[k + 1] * temp;
            saved = left[j - k] * temp;
        }
        out[j] = saved;
    }
    return {s - r, r + 1};
}

} // namespace cube
