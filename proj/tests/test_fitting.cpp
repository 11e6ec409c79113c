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

#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include "cube/editing.hpp"
#include "cube/error.hpp"
#include "cube/fitting.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace cube;
namespace ct = cube::testing;

namespace {

std::vector<double> as_vector(const KnotVector& kv)
{
    return {kv.knots().begin(), kv.knots().end()};
}

/// Rational blending coefficient of control c at p, straight from the definition.
double blend_coefficient(const CubeModel& model, const Index3& c, const Eigen::Vector3d& p)
{
    const auto t = as_vector(model.knots);
    const int r = model.knots.degree();
    const int m = model.lattice.m();
    double den = 0.0, mine = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const double b = oracle::cox_de_boor(t, i, r, p.x()) * oracle::cox_de_boor(t, j, r, p.y()) *
                                 oracle::cox_de_boor(t, k, r, p.z()) * model.lattice.weight(model.lattice.index(i, j, k));
                den += b;
                if (Index3{i, j, k} == c)
                    mine = b;
            }
    return mine / den;
}

std::vector<Landmark> landmarks_of(const CubeModel& model, const Camera& cam, std::size_t count, std::mt19937_64& rng)
{
    std::vector<FacePoint> pts;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (std::size_t n = 0; n < count; ++n) {
        double a = U(rng), b = U(rng);
        if (a + b > 1) {
            a = 1 - a;
            b = 1 - b;
        }
        pts.push_back({static_cast<std::uint32_t>(rng() % model.tmpl.mesh.faces.size()), Eigen::Vector3d(1 - a - b, a, b)});
    }
    const TriMesh seen = resample_topology(model, pts);
    std::vector<Landmark> out;
    for (std::size_t n = 0; n < pts.size(); ++n)
        out.push_back({pts[n], project(cam, seen.vertices[n])});
    return out;
}

} // namespace

TEST_CASE("gradient of a zero upstream is zero")
{
    std::mt19937_64 rng(1);
    const CubeModel model = ct::random_model(rng);
    const ModelGradient g = grad_decode(model, Eigen::Vector3d(0.3, 0.6, 0.2), Eigen::Vector3d::Zero());
    CHECK(std::all_of(g.features.begin(), g.features.end(), [](double x) { return x == 0.0; }));
    CHECK(std::all_of(g.weights.begin(), g.weights.end(), [](double x) { return x == 0.0; }));
    for (const auto& L : g.mlp) {
        CHECK(L.weight.isZero(0.0));
        CHECK(L.bias.isZero(0.0));
    }
}

TEST_CASE("with a zero output layer the position gradient is the blending coefficient")
{
    std::mt19937_64 rng(2);
    CubeModel model = ct::random_model(rng, 4, 6, 2);
    model.mlp = ResidualMlp::create(6, 6, 3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int n = 0; n < 20; ++n) {
        const Eigen::Vector3d p(U(rng), U(rng), U(rng));
        for (int axis = 0; axis < 3; ++axis) {
            const ModelGradient g = grad_decode(model, p, Eigen::Vector3d::Unit(axis));
            for (const Index3& c : controls_affecting(model.lattice, model.knots, p)) {
                const std::size_t base = model.lattice.index(c) * 6;
                const double B = blend_coefficient(model, c, p);
                for (int k = 0; k < 3; ++k)
                    CHECK(std::abs(g.features[base + k] - (k == axis ? B : 0.0)) < 1e-12);
            }
        }
    }
}

TEST_CASE("gradients match central finite differences and respect local support")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.02, 0.98);
    const double h = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        const CubeModel model = ct::random_model(rng, 5, 4, trial % 3 + 1);
        const Eigen::Vector3d p(U(rng), U(rng), U(rng));
        const Eigen::Vector3d up = Eigen::Vector3d::Random();
        const ModelGradient g = grad_decode(model, p, up);
        auto objective = [&](const CubeModel& m) { return up.dot(decode_point(m, p).out); };

        const auto affecting = controls_affecting(model.lattice, model.knots, p);
        const auto d = static_cast<std::size_t>(model.lattice.dim());
        for (std::size_t n = 0; n < model.lattice.num_controls(); ++n) {
            const bool listed = std::find(affecting.begin(), affecting.end(), model.lattice.unflatten(n)) != affecting.end();
            if (!listed) {
                for (std::size_t c = 0; c < d; ++c)
                    CHECK(g.features[n * d + c] == 0.0);
                CHECK(g.weights[n] == 0.0);
                continue;
            }
            for (std::size_t c = 0; c < d; ++c) {
                CubeModel a = model, b = model;
                a.lattice.features()[n * d + c] += h;
                b.lattice.features()[n * d + c] -= h;
                const double fd = (objective(a) - objective(b)) / (2 * h);
                CHECK(std::abs(g.features[n * d + c] - fd) / std::max(1.0, std::abs(fd)) < 1e-4);
            }
            CubeModel a = model, b = model;
            a.lattice.weights()[n] += h;
            b.lattice.weights()[n] -= h;
            const double fd = (objective(a) - objective(b)) / (2 * h);
            CHECK(std::abs(g.weights[n] - fd) / std::max(1.0, std::abs(fd)) < 1e-4);
        }
        for (std::size_t l = 0; l < g.mlp.size(); ++l) {
            for (Eigen::Index n = 0; n < g.mlp[l].bias.size(); ++n) {
                CubeModel a = model, b = model;
                a.mlp.layers()[l].bias[n] += h;
                b.mlp.layers()[l].bias[n] -= h;
                const double fd = (objective(a) - objective(b)) / (2 * h);
                CHECK(std::abs(g.mlp[l].bias[n] - fd) / std::max(1.0, std::abs(fd)) < 1e-4);
            }
        }
    }
}

TEST_CASE("fit config")
{
    FitConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(FitConfig::mesh_defaults().steps == 2000);
    CHECK(FitConfig::mesh_defaults().learning_rate == 1e-3);
    CHECK(FitConfig::landmark_defaults().steps == 500);
    CHECK(FitConfig::landmark_defaults().learning_rate == 1e-2);
    c.steps = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.learning_rate = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.base_loss_weight = c.out_loss_weight = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    std::istringstream json(R"({"steps": 10, "learning_rate": 0.5, "optimizer": "gd", "loss": "l2",
                                "optimize_weights": true, "optimize_mlp": false, "seed": 4})");
    const FitConfig r = read_fit_config(json);
    CHECK(r.steps == 10);
    CHECK(r.learning_rate == 0.5);
    CHECK(r.optimizer == OptimizerKind::gradient_descent);
    CHECK(r.loss == LossKind::l2);
    CHECK(r.optimize_weights);
    CHECK_FALSE(r.optimize_mlp);
    CHECK(r.seed == 4);

    std::istringstream again(to_json(r));
    const FitConfig back = read_fit_config(again);
    CHECK(back.steps == r.steps);
    CHECK(back.loss == r.loss);
    CHECK(back.optimizer == r.optimizer);

    std::istringstream unknown(R"({"stepz": 10})");
    CHECK_THROWS_AS(read_fit_config(unknown), ConfigError);
    std::istringstream broken("{ steps: ");
    CHECK_THROWS_AS(read_fit_config(broken), ParseError);
}

TEST_CASE("optimizer steps")
{
    std::vector<double> x{1.0, -2.0}, g{0.5, -4.0};
    Optimizer gd(OptimizerKind::gradient_descent, 2);
    gd.step(x, g, 0.1);
    CHECK(x[0] == doctest::Approx(0.95));
    CHECK(x[1] == doctest::Approx(-1.6));

    std::vector<double> y{1.0, -2.0};
    Optimizer adam(OptimizerKind::adam, 2);
    adam.step(y, g, 0.1);
    // First bias-corrected step moves each coordinate by lr * sign(g).
    CHECK(y[0] == doctest::Approx(0.9).epsilon(1e-7));
    CHECK(y[1] == doctest::Approx(-1.9).epsilon(1e-7));
    CHECK(adam.iterations() == 1);

    std::vector<double> z{1.0};
    std::vector<double> zero{0.0};
    Optimizer decay(OptimizerKind::adam, 1, 0.9, 0.999, 1e-8, 0.5);
    decay.step(z, zero, 0.1);
    CHECK(z[0] == doctest::Approx(0.95));
    CHECK_THROWS_AS(adam.step(z, zero, 0.1), ConfigError);
}

TEST_CASE("smoothed trace")
{
    CHECK(smoothed_trace({2, 2, 2}) == std::vector<double>{2, 2, 2});
    const auto s = smoothed_trace({1.0, 0.0}, 3);
    CHECK(s[1] == doctest::Approx(0.5));
}

TEST_CASE("mesh fitting")
{
    const CubeModel model = create_model(ct::uv_sphere(10, 12));
    FitConfig cfg;
    cfg.steps = 60;
    cfg.learning_rate = 1e-2;

    SUBCASE("a target equal to the current output is a fixed point")
    {
        const auto [fitted, report] = fit_to_mesh(model, decode_mesh(model), cfg);
        CHECK(report.losses.size() == 60);
        CHECK(report.losses[0] == 0.0);
        CHECK(report.final_loss <= report.losses[0] + 1e-12);
        CHECK(report.final_metric.mean < 1e-6);
    }

    TriMesh target = decode_mesh(model);
    for (auto& v : target.vertices)
        v = ct::smooth_warp(v);

    SUBCASE("loss decreases and the input is untouched")
    {
        const CubeModel copy = model;
        const auto [fitted, report] = fit_to_mesh(model, target, cfg);
        CHECK(model == copy);
        CHECK(report.final_loss < 0.5 * report.losses[0]);
        CHECK(report.final_metric.mean < report.initial_metric.mean);
        CHECK(report.metric_name == "v2v");
        CHECK(report.config.steps == 60);
    }

    SUBCASE("deterministic across runs and thread counts")
    {
        const auto a = fit_to_mesh(model, target, cfg).second;
        const auto b = fit_to_mesh(model, target, cfg).second;
        FitConfig threaded = cfg;
        threaded.threads = 3;
        const auto c = fit_to_mesh(model, target, threaded).second;
        CHECK(a.losses == b.losses);
        CHECK(a.losses == c.losses);
    }

    SUBCASE("plain gradient descent, L2 loss and weight optimization")
    {
        FitConfig other = cfg;
        other.optimizer = OptimizerKind::gradient_descent;
        other.loss = LossKind::l2;
        other.learning_rate = 0.2;
        other.optimize_weights = true;
        const auto [fitted, report] = fit_to_mesh(model, target, other);
        CHECK(report.final_loss < report.losses[0]);
        CHECK(fitted.lattice.weights() != model.lattice.weights());
        CHECK(std::all_of(fitted.lattice.weights().begin(), fitted.lattice.weights().end(),
                          [](double h) { return h > 0.0; }));
    }

    SUBCASE("frozen parts stay frozen")
    {
        FitConfig frozen = cfg;
        frozen.optimize_mlp = false;
        const auto [fitted, report] = fit_to_mesh(model, target, frozen);
        CHECK(fitted.mlp == model.mlp);
        CHECK(fitted.lattice.weights() == model.lattice.weights());
    }

    SUBCASE("vertex count mismatch")
    {
        TriMesh wrong = target;
        wrong.vertices.pop_back();
        CHECK_THROWS_AS(fit_to_mesh(model, wrong, cfg), ValidationError);
    }
}

TEST_CASE("landmark files")
{
    std::istringstream in("# face bu bv bw px py\n3 0.2 0.3 0.5 101.5 -7\n\n0 1 0 0 1 2\n");
    const auto lms = read_landmarks(in);
    REQUIRE(lms.size() == 2);
    CHECK(lms[0].point.face == 3);
    CHECK(lms[0].point.bary == Eigen::Vector3d(0.2, 0.3, 0.5));
    CHECK(lms[0].pixel == Eigen::Vector2d(101.5, -7));
    std::stringstream buf;
    write_landmarks(buf, lms);
    const auto back = read_landmarks(buf);
    CHECK(back[1].pixel == lms[1].pixel);

    std::istringstream bad("3 0.2 0.3\n");
    try {
        read_landmarks(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
    }
}

TEST_CASE("landmark fitting")
{
    std::mt19937_64 rng(4);
    const CubeModel model = create_model(ct::uv_sphere(10, 12));
    const Camera cam = ct::front_camera();
    FitConfig cfg = FitConfig::landmark_defaults();
    cfg.steps = 100;

    SUBCASE("own projections are a fixed point")
    {
        const auto lms = landmarks_of(model, cam, 50, rng);
        const auto [fitted, report] = fit_to_landmarks(model, lms, cam, cfg);
        CHECK(report.losses[0] < 1e-20);
        CHECK(report.final_rms < 1e-6);
        CHECK(report.metric_name == "reprojection");
    }

    SUBCASE("recovers a perturbed model")
    {
        const CubeModel truth = displace_control(model, {1, 2, 1}, Eigen::Vector3d(0.05, -0.04, 0.02));
        const auto lms = landmarks_of(truth, cam, 200, rng);
        const auto [fitted, report] = fit_to_landmarks(model, lms, cam, cfg);
        CHECK(report.initial_rms > 1.0);
        CHECK(report.final_rms < 0.3 * report.initial_rms);
        CHECK(reprojection_rms(fitted, lms, cam) == doctest::Approx(report.final_rms));
    }

    SUBCASE("few landmarks raise a warning")
    {
        const auto lms = landmarks_of(model, cam, 3, rng);
        const auto report = fit_to_landmarks(model, lms, cam, cfg).second;
        CHECK_FALSE(report.warnings.empty());
    }

    SUBCASE("landmarks behind the camera")
    {
        Camera behind = cam;
        behind.translation.z() = -5.0;
        const auto lms = landmarks_of(model, cam, 20, rng);
        CHECK_THROWS_AS(fit_to_landmarks(model, lms, behind, cfg), DomainError);
        CHECK_THROWS_AS(fit_to_landmarks(model, {}, cam, cfg), ValidationError);
    }

    SUBCASE("steps that cross the camera plane are rejected")
    {
        // Camera plane just in front of the surface and targets far off-centre: large
        // steps pull points through the plane.
        Camera close = cam;
        close.translation.z() = 0.005;
        std::vector<Landmark> lms = landmarks_of(model, cam, 40, rng);
        for (auto& l : lms)
            l.pixel = Eigen::Vector2d(5000.0, -5000.0);
        FitConfig wild = cfg;
        wild.steps = 40;
        wild.learning_rate = 1.0;
        bool all_in_front = true;
        const auto [fitted, report] = fit_to_landmarks(model, lms, close, wild);
        for (const auto& l : lms) {
            const TriMesh x = resample_topology(fitted, std::vector<FacePoint>{l.point});
            all_in_front = all_in_front && close.to_camera(x.vertices[0]).z() > 0.0;
        }
        CHECK(report.rejected_steps > 0);
        CHECK(all_in_front);
    }
}
