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

#include "support/oracles.hpp"

#include "cube/error.hpp"
#include "cube/feature_volume.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace cube;

namespace {

ControlLattice random_lattice(std::mt19937_64& rng, int m, int d)
{
    std::uniform_real_distribution<double> F(-1.0, 1.0);
    std::uniform_real_distribution<double> W(0.5, 2.0);
    std::vector<double> f(static_cast<std::size_t>(m * m * m * d)), w(static_cast<std::size_t>(m * m * m));
    for (auto& x : f)
        x = F(rng);
    for (auto& x : w)
        x = W(rng);
    return ControlLattice(m, d, f, w);
}

Eigen::Vector3d random_point(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    return {U(rng), U(rng), U(rng)};
}

} // namespace

TEST_CASE("lattice construction and validation")
{
    const ControlLattice lat(3, 4);
    CHECK(lat.num_controls() == 27);
    CHECK(lat.features().size() == 108);
    CHECK(std::all_of(lat.weights().begin(), lat.weights().end(), [](double h) { return h == 1.0; }));

    CHECK_THROWS_AS(ControlLattice(0, 4), ValidationError);
    CHECK_THROWS_AS(ControlLattice(3, 2), ValidationError);
    CHECK_THROWS_AS(ControlLattice(2, 3, std::vector<double>(23), std::vector<double>(8, 1.0)), ValidationError);
    std::vector<double> w(8, 1.0);
    w[3] = 0.0;
    CHECK_THROWS_AS(ControlLattice(2, 3, std::vector<double>(24), w), ValidationError);
    w[3] = -1.0;
    CHECK_THROWS_AS(ControlLattice(2, 3, std::vector<double>(24), w), ValidationError);

    for (std::size_t n = 0; n < lat.num_controls(); ++n)
        CHECK(lat.index(lat.unflatten(n)) == n);
    CHECK(lat.index(1, 2, 0) == (1 * 3 + 2) * 3 + 0);
    CHECK(lat.in_range({2, 2, 2}));
    CHECK_FALSE(lat.in_range({3, 0, 0}));
    CHECK_FALSE(lat.in_range({0, -1, 0}));
}

TEST_CASE("evaluate matches the full triple sum")
{
    std::mt19937_64 rng(1);
    const KnotVector kv = make_clamped_uniform_knots(4, 2);
    for (int n = 0; n < 100; ++n) {
        const ControlLattice lat = random_lattice(rng, 4, 5);
        const Eigen::Vector3d p = random_point(rng);
        const Eigen::VectorXd got = evaluate(lat, kv, p);
        const Eigen::VectorXd want = oracle::triple_sum(kv, lat, p);
        CHECK((got - want).norm() / want.norm() < 1e-12);
    }
    // Corners and faces of the domain.
    const ControlLattice lat = random_lattice(rng, 5, 4);
    const KnotVector k5 = make_clamped_uniform_knots(5, 3);
    for (const Eigen::Vector3d p : {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(1, 0, 0.5)}) {
        const Eigen::VectorXd got = evaluate(lat, k5, p);
        CHECK((got - oracle::triple_sum(k5, lat, p)).norm() < 1e-12);
    }
    // The corner reproduces the corner control exactly.
    const auto corner = lat.feature(lat.index(4, 4, 4));
    const Eigen::VectorXd at_one = evaluate(lat, k5, Eigen::Vector3d(1, 1, 1));
    for (int c = 0; c < 4; ++c)
        CHECK(at_one[c] == doctest::Approx(corner[static_cast<std::size_t>(c)]).epsilon(1e-15));
}

TEST_CASE("batch evaluation")
{
    std::mt19937_64 rng(2);
    const KnotVector kv = make_clamped_uniform_knots(6, 2);
    const ControlLattice lat = random_lattice(rng, 6, 4);
    std::vector<Eigen::Vector3d> pts;
    for (int n = 0; n < 1000; ++n)
        pts.push_back(random_point(rng));
    const auto out = evaluate_batch(lat, kv, pts);
    REQUIRE(out.size() == pts.size());
    for (std::size_t n = 0; n < pts.size(); ++n)
        CHECK(out[n] == evaluate(lat, kv, pts[n]));

    pts[17] = Eigen::Vector3d(0.5, 1.5, 0.5);
    try {
        evaluate_batch(lat, kv, pts);
        FAIL("expected a domain error");
    } catch (const DomainError& e) {
        CHECK(e.index() == 17);
    }
}

TEST_CASE("greville identity lattice")
{
    std::mt19937_64 rng(3);
    for (int r = 1; r <= 3; ++r) {
        const KnotVector kv = make_clamped_uniform_knots(6, r);
        const ControlLattice lat = ControlLattice::greville_identity(kv, 7);
        for (int n = 0; n < 200; ++n) {
            const Eigen::Vector3d p = random_point(rng);
            const Eigen::VectorXd z = evaluate(lat, kv, p);
            CHECK((z.head<3>() - p).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(z.tail(4).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("support regions")
{
    const KnotVector k4 = make_clamped_uniform_knots(4, 2);
    const ControlLattice l4(4, 3);
    const Box corner = support_region(l4, k4, {0, 0, 0});
    for (int a = 0; a < 3; ++a)
        CHECK(corner.axis[static_cast<std::size_t>(a)] == Interval{0.0, 0.5, false});

    const KnotVector k8 = make_clamped_uniform_knots(8, 2);
    const ControlLattice l8(8, 3);
    const Box mid = support_region(l8, k8, {3, 3, 3});
    for (int a = 0; a < 3; ++a)
        CHECK(mid.axis[static_cast<std::size_t>(a)] == support_interval(k8, 3));
    CHECK_THROWS_AS(support_region(l8, k8, {8, 0, 0}), IndexError);
}

TEST_CASE("controls affecting a point")
{
    const KnotVector k8 = make_clamped_uniform_knots(8, 2);
    std::mt19937_64 rng(4);
    const ControlLattice lat = random_lattice(rng, 8, 3);

    const Eigen::Vector3d p(0.1, 0.1, 0.1);
    const auto list = controls_affecting(lat, k8, p);
    const Span s = nonzero_span(k8, 0.1);
    std::vector<Index3> want;
    for (int i = s.first; i < s.first + s.count; ++i)
        for (int j = s.first; j < s.first + s.count; ++j)
            for (int k = s.first; k < s.first + s.count; ++k)
                want.push_back({i, j, k});
    auto sorted = list;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == want);

    // Perturb-and-compare: exactly the listed controls change the value at p.
    const Eigen::VectorXd base = evaluate(lat, k8, p);
    for (std::size_t n = 0; n < lat.num_controls(); ++n) {
        ControlLattice moved = lat;
        moved.feature(n)[0] += 0.5;
        const bool changed = evaluate(moved, k8, p) != base;
        const bool listed = std::find(list.begin(), list.end(), lat.unflatten(n)) != list.end();
        CHECK(changed == listed);
    }

    for (int n = 0; n < 200; ++n)
        CHECK(controls_affecting(lat, k8, random_point(rng)).size() <= 27);
}

TEST_CASE("locality: edits leave points outside the support unchanged")
{
    std::mt19937_64 rng(5);
    const KnotVector kv = make_clamped_uniform_knots(8, 2);
    const ControlLattice lat = random_lattice(rng, 8, 4);
    std::uniform_int_distribution<int> I(0, 7);
    for (int trial = 0; trial < 10; ++trial) {
        const Index3 c{I(rng), I(rng), I(rng)};
        ControlLattice moved = lat;
        moved.feature(lat.index(c))[1] -= 0.3;
        moved.weight(lat.index(c)) *= 1.5;
        const Box region = support_region(lat, kv, c);
        for (int n = 0; n < 300; ++n) {
            const Eigen::Vector3d p = random_point(rng);
            const Stencil st = make_stencil(kv, p);
            CHECK(stencil_covers(st, c) == region.contains(p));
            if (!region.contains(p))
                CHECK(evaluate(moved, kv, p) == evaluate(lat, kv, p));
        }
    }
}

TEST_CASE("evaluate rejects points outside the unit cube")
{
    const KnotVector kv = make_clamped_uniform_knots(4, 2);
    const ControlLattice lat(4, 3);
    CHECK_THROWS_AS(evaluate(lat, kv, Eigen::Vector3d(-0.01, 0.5, 0.5)), DomainError);
    CHECK_THROWS_AS(evaluate(lat, kv, Eigen::Vector3d(0.5, 0.5, 1.01)), DomainError);
    const KnotVector k5 = make_clamped_uniform_knots(5, 2);
    CHECK_THROWS(evaluate(lat, k5, Eigen::Vector3d(0.5, 0.5, 0.5)));
}
