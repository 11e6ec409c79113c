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

#include <cstddef>
#include <span>
#include <vector>

namespace cube {

/**
 * Clamped, non-decreasing knot vector of a B-spline basis with M functions of
 * degree r. Holds M + r + 1 knots; the first r + 1 are exactly 0 and the last
 * r + 1 exactly 1, so the parameter domain is [0, 1].
 *
 * Basis indices in this API are 0-based: i = 0 .. M-1 (the first basis
 * function N_1 in the usual 1-based notation is index 0 here). The last knot
 * span is treated as closed, which makes N_{M-1}(1) = 1.
 *
 * Immutable after construction.
 */
class KnotVector
{
public:
    /// Validates the clamped invariants; throws ConfigError on violation.
    KnotVector(int degree, std::vector<double> knots);

    int degree() const noexcept { return degree_; }
    int num_controls() const noexcept { return static_cast<int>(knots_.size()) - degree_ - 1; }
    std::span<const double> knots() const noexcept { return knots_; }
    double operator[](std::size_t i) const noexcept { return knots_[i]; }

    /// Greville abscissa of basis i: the mean of knots i+1 .. i+r. Requires r >= 1.
    double greville(int i) const;

    bool operator==(const KnotVector&) const = default;

private:
    int degree_;
    std::vector<double> knots_;
};

/// Clamped knots with M - r - 1 uniform interior knots at k / (M - r), k = 1 .. M-r-1.
KnotVector make_clamped_uniform_knots(int num_controls, int degree);

/// N_i^r(u) by the Cox-de Boor recursion (zero-denominator terms are 0).
double basis_value(const KnotVector& kv, int i, double u);

/// Window of basis functions that may be nonzero at a parameter.
struct Span
{
    int first = 0; ///< 0-based index of the first basis in the window
    int count = 0; ///< always degree + 1 for clamped knots
    bool operator==(const Span&) const = default;
};

Span nonzero_span(const KnotVector& kv, double u);

/// Parametric interval [lo, hi), closed at hi when `closed` is set.
struct Interval
{
    double lo = 0.0;
    double hi = 1.0;
    bool closed = false;

    bool contains(double u) const noexcept { return u >= lo && (u < hi || (closed && u == hi)); }
    bool operator==(const Interval&) const = default;
};

/// [t_i, t_{i+r+1}); the last basis function's interval is closed at 1.
Interval support_interval(const KnotVector& kv, int i);

/**
 * Values of the degree + 1 basis functions in nonzero_span(kv, u), written to
 * `out` (at least degree + 1 long). Uses the triangular table form of the recursion,
 * so it costs O(r^2) instead of the O(2^r) of repeated basis_value calls.
 */
Span basis_values(const KnotVector& kv, double u, std::span<double> out);

} // namespace cube
