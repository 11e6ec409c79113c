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

#include "cube/fitting.hpp"

#include "cube/error.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace cube {

// ---------------------------------------------------------------------------
// Configuration

FitConfig FitConfig::mesh_defaults()
{
    return FitConfig{};
}

FitConfig FitConfig::landmark_defaults()
{
    FitConfig c;
    c.steps = 500;
    c.learning_rate = 1e-2;
    c.loss = LossKind::l2;
    return c;
}

void FitConfig::validate() const
{
    if (steps < 1)
        throw ConfigError("steps must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate must be positive");
    if (!(base_loss_weight >= 0.0) || !(out_loss_weight >= 0.0))
        throw ConfigError("loss weights must be non-negative");
    if (base_loss_weight == 0.0 && out_loss_weight == 0.0)
        throw ConfigError("base_loss_weight and out_loss_weight cannot both be zero");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0))
        throw ConfigError("invalid adam moments");
    if (!(weight_decay >= 0.0))
        throw ConfigError("weight_decay must be non-negative");
    if (threads < 1)
        throw ConfigError("threads must be at least 1");
}

namespace {

std::string optimizer_name(OptimizerKind k)
{
    return k == OptimizerKind::adam ? "adam" : "gd";
}

std::string loss_name(LossKind k)
{
    return k == LossKind::l1 ? "l1" : "l2";
}

} // namespace

FitConfig read_fit_config(std::istream& in, FitConfig c)
{
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("fit config: ") + e.what());
    }
    if (!j.is_object())
        throw ParseError("fit config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "steps")
                c.steps = value.get<int>();
            else if (key == "learning_rate")
                c.learning_rate = value.get<double>();
            else if (key == "optimizer") {
                const auto s = value.get<std::string>();
                if (s == "adam")
                    c.optimizer = OptimizerKind::adam;
                else if (s == "gd")
                    c.optimizer = OptimizerKind::gradient_descent;
                else
                    throw ConfigError("optimizer must be 'adam' or 'gd'");
            } else if (key == "beta1")
                c.beta1 = value.get<double>();
            else if (key == "beta2")
                c.beta2 = value.get<double>();
            else if (key == "epsilon")
                c.epsilon = value.get<double>();
            else if (key == "weight_decay")
                c.weight_decay = value.get<double>();
            else if (key == "optimize_weights")
                c.optimize_weights = value.get<bool>();
            else if (key == "optimize_mlp")
                c.optimize_mlp = value.get<bool>();
            else if (key == "loss") {
                const auto s = value.get<std::string>();
                if (s == "l1")
                    c.loss = LossKind::l1;
                else if (s == "l2")
                    c.loss = LossKind::l2;
                else
                    throw ConfigError("loss must be 'l1' or 'l2'");
            } else if (key == "base_loss_weight")
                c.base_loss_weight = value.get<double>();
            else if (key == "out_loss_weight")
                c.out_loss_weight = value.get<double>();
            else if (key == "seed")
                c.seed = value.get<std::uint64_t>();
            else if (key == "threads")
                c.threads = value.get<int>();
            else
                throw ConfigError("unknown fit config key '" + key + "'");
        }
    } catch (const nlohmann::json::type_error& e) {
        throw ConfigError(std::string("fit config: ") + e.what());
    }
    c.validate();
    return c;
}

FitConfig load_fit_config(const std::filesystem::path& path, FitConfig base)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    return read_fit_config(in, base);
}

std::string to_json(const FitConfig& c)
{
    nlohmann::json j;
    j["steps"] = c.steps;
    j["learning_rate"] = c.learning_rate;
    j["optimizer"] = optimizer_name(c.optimizer);
    j["beta1"] = c.beta1;
    j["beta2"] = c.beta2;
    j["epsilon"] = c.epsilon;
    j["weight_decay"] = c.weight_decay;
    j["optimize_weights"] = c.optimize_weights;
    j["optimize_mlp"] = c.optimize_mlp;
    j["loss"] = loss_name(c.loss);
    j["base_loss_weight"] = c.base_loss_weight;
    j["out_loss_weight"] = c.out_loss_weight;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Reports

void write_report(std::ostream& out, const FitReport& r)
{
    out << std::setprecision(17);
    out << "# metric: " << r.metric_name << '\n'
        << "# initial_mean: " << r.initial_metric.mean << '\n'
        << "# initial_median: " << r.initial_metric.median << '\n'
        << "# final_mean: " << r.final_metric.mean << '\n'
        << "# final_median: " << r.final_metric.median << '\n'
        << "# final_std: " << r.final_metric.std << '\n';
    if (r.metric_name == "reprojection")
        out << "# initial_rms: " << r.initial_rms << '\n' << "# final_rms: " << r.final_rms << '\n';
    out << "# final_loss: " << r.final_loss << '\n'
        << "# seconds: " << r.seconds << '\n'
        << "# rejected_steps: " << r.rejected_steps << '\n';
    for (const auto& w : r.warnings)
        out << "# warning: " << w << '\n';
    out << "# config: " << to_json(r.config) << '\n';
    out << "step loss\n";
    for (std::size_t n = 0; n < r.losses.size(); ++n)
        out << n << ' ' << r.losses[n] << '\n';
}

void save_report(const FitReport& report, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open '" + path.string() + "' for writing");
    write_report(out, report);
}

std::vector<double> smoothed_trace(const std::vector<double>& values, int window)
{
    std::vector<double> out;
    out.reserve(values.size());
    const double alpha = 2.0 / (window + 1.0);
    double ema = 0.0;
    for (std::size_t n = 0; n < values.size(); ++n) {
        ema = n == 0 ? values[0] : alpha * values[n] + (1.0 - alpha) * ema;
        out.push_back(ema);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gradients

ModelGradient ModelGradient::zeros(const CubeModel& model)
{
    ModelGradient g;
    g.features.assign(model.lattice.features().size(), 0.0);
    g.weights.assign(model.lattice.weights().size(), 0.0);
    g.mlp = zeros_like(model.mlp);
    return g;
}

void ModelGradient::set_zero()
{
    std::fill(features.begin(), features.end(), 0.0);
    std::fill(weights.begin(), weights.end(), 0.0);
    for (auto& l : mlp) {
        l.weight.setZero();
        l.bias.setZero();
    }
}

void ModelGradient::add(const ModelGradient& other)
{
    for (std::size_t n = 0; n < features.size(); ++n)
        features[n] += other.features[n];
    for (std::size_t n = 0; n < weights.size(); ++n)
        weights[n] += other.weights[n];
    for (std::size_t l = 0; l < mlp.size(); ++l) {
        mlp[l].weight += other.mlp[l].weight;
        mlp[l].bias += other.mlp[l].bias;
    }
}

namespace {

/// Forward values of one decoded point, kept for the backward pass.
struct PointPass
{
    Eigen::VectorXd z;
    double denominator = 0.0;
    std::vector<std::size_t> controls;
    std::vector<double> blend; ///< N_i N_j N_k h_ijk per entry of `controls`
    MlpTrace trace;
    Eigen::Vector3d base;
    Eigen::Vector3d out;
};

void forward_point(const CubeModel& model, const Stencil& stencil, PointPass& pass)
{
    const auto& lattice = model.lattice;
    const int d = lattice.dim();
    pass.z.setZero(d);
    pass.controls.clear();
    pass.blend.clear();
    pass.denominator = 0.0;
    const int n = stencil.order;
    for (int a = 0; a < n; ++a) {
        const double bu = stencil.basis[0][a];
        if (bu == 0.0)
            continue;
        for (int b = 0; b < n; ++b) {
            const double buv = bu * stencil.basis[1][b];
            if (buv == 0.0)
                continue;
            for (int c = 0; c < n; ++c) {
                const std::size_t flat =
                    lattice.index(stencil.first[0] + a, stencil.first[1] + b, stencil.first[2] + c);
                const double w = buv * stencil.basis[2][c] * lattice.weight(flat);
                if (w == 0.0)
                    continue;
                pass.denominator += w;
                const auto f = lattice.feature(flat);
                for (int e = 0; e < d; ++e)
                    pass.z[e] += w * f[e];
                pass.controls.push_back(flat);
                pass.blend.push_back(w);
            }
        }
    }
    pass.z /= pass.denominator;
    pass.base = pass.z.head<3>();
    pass.out = pass.base + model.mlp.forward(pass.z, pass.trace);
}

struct GradientMask
{
    bool weights = true;
    bool mlp = true;
};

void backward_point(const CubeModel& model, const PointPass& pass, const Eigen::Vector3d& grad_base,
                    const Eigen::Vector3d& grad_out, GradientMask mask, ModelGradient& grad)
{
    if (grad_base.isZero(0.0) && grad_out.isZero(0.0))
        return;
    const auto& lattice = model.lattice;
    const int d = lattice.dim();
    Eigen::VectorXd grad_z = model.mlp.backward(pass.trace, grad_out, mask.mlp ? &grad.mlp : nullptr);
    grad_z.head<3>() += grad_base + grad_out;

    for (std::size_t n = 0; n < pass.controls.size(); ++n) {
        const std::size_t flat = pass.controls[n];
        const double coeff = pass.blend[n] / pass.denominator;
        double* g = grad.features.data() + flat * d;
        for (int e = 0; e < d; ++e)
            g[e] += coeff * grad_z[e];
        if (mask.weights) {
            // dz/dh = N (c - z) / D, with N = blend / h.
            const auto f = lattice.feature(flat);
            double dot = 0.0;
            for (int e = 0; e < d; ++e)
                dot += grad_z[e] * (f[e] - pass.z[e]);
            grad.weights[flat] += coeff / lattice.weight(flat) * dot;
        }
    }
}

/// Flat view of the trainable parameters. Weights are optimized as log h.
class ParameterPacking
{
public:
    ParameterPacking(const CubeModel& model, const FitConfig& config)
        : n_features_(model.lattice.features().size()),
          n_weights_(config.optimize_weights ? model.lattice.weights().size() : 0),
          n_mlp_(config.optimize_mlp ? model.mlp.parameter_count() : 0)
    {
    }

    std::size_t size() const { return n_features_ + n_weights_ + n_mlp_; }

    std::vector<double> gather(const CubeModel& model) const
    {
        std::vector<double> p;
        p.reserve(size());
        p.insert(p.end(), model.lattice.features().begin(), model.lattice.features().end());
        if (n_weights_)
            for (double h : model.lattice.weights())
                p.push_back(std::log(h));
        if (n_mlp_)
            for (const auto& l : model.mlp.layers()) {
                p.insert(p.end(), l.weight.data(), l.weight.data() + l.weight.size());
                p.insert(p.end(), l.bias.data(), l.bias.data() + l.bias.size());
            }
        return p;
    }

    void scatter(const std::vector<double>& p, CubeModel& model) const
    {
        auto it = p.begin();
        std::copy(it, it + static_cast<std::ptrdiff_t>(n_features_), model.lattice.features().begin());
        it += static_cast<std::ptrdiff_t>(n_features_);
        if (n_weights_) {
            for (auto& h : model.lattice.weights())
                h = std::exp(*it++);
        }
        if (n_mlp_)
            for (auto& l : model.mlp.layers()) {
                std::copy(it, it + l.weight.size(), l.weight.data());
                it += l.weight.size();
                std::copy(it, it + l.bias.size(), l.bias.data());
                it += l.bias.size();
            }
    }

    std::vector<double> flatten(const ModelGradient& g, const CubeModel& model) const
    {
        std::vector<double> flat;
        flat.reserve(size());
        flat.insert(flat.end(), g.features.begin(), g.features.end());
        if (n_weights_)
            for (std::size_t n = 0; n < g.weights.size(); ++n)
                flat.push_back(g.weights[n] * model.lattice.weight(n)); // d/d log h
        if (n_mlp_)
            for (const auto& l : g.mlp) {
                flat.insert(flat.end(), l.weight.data(), l.weight.data() + l.weight.size());
                flat.insert(flat.end(), l.bias.data(), l.bias.data() + l.bias.size());
            }
        return flat;
    }

private:
    std::size_t n_features_;
    std::size_t n_weights_;
    std::size_t n_mlp_;
};

constexpr std::size_t chunk_size = 256;

/**
 * Sums per-point losses and gradients over all stencils. Points are split in
 * fixed-size chunks whose partial sums are reduced in chunk order, so the
 * result does not depend on the thread count.
 *
 * `point_loss(index, base, out, grad_base, grad_out)` returns the point's loss
 * and writes the cotangents of base and out.
 */
template <typename PointLoss>
double accumulate(const CubeModel& model, const std::vector<Stencil>& stencils, GradientMask mask, int threads,
                  std::vector<ModelGradient>& chunk_grads, ModelGradient& total, PointLoss&& point_loss)
{
    const std::size_t n_chunks = (stencils.size() + chunk_size - 1) / chunk_size;
    while (chunk_grads.size() < n_chunks)
        chunk_grads.push_back(ModelGradient::zeros(model));
    std::vector<double> chunk_loss(n_chunks, 0.0);

    auto run_chunk = [&](std::size_t c) {
        auto& grad = chunk_grads[c];
        grad.set_zero();
        PointPass pass;
        double loss = 0.0;
        const std::size_t end = std::min(stencils.size(), (c + 1) * chunk_size);
        for (std::size_t n = c * chunk_size; n < end; ++n) {
            forward_point(model, stencils[n], pass);
            Eigen::Vector3d gb = Eigen::Vector3d::Zero();
            Eigen::Vector3d go = Eigen::Vector3d::Zero();
            loss += point_loss(n, pass.base, pass.out, gb, go);
            backward_point(model, pass, gb, go, mask, grad);
        }
        chunk_loss[c] = loss;
    };

    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n_chunks < 2) {
        for (std::size_t c = 0; c < n_chunks; ++c)
            run_chunk(c);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(workers, n_chunks); ++w)
            pool.emplace_back([&, w] {
                for (std::size_t c = w; c < n_chunks; c += workers)
                    run_chunk(c);
            });
    }

    total.set_zero();
    double loss = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        total.add(chunk_grads[c]);
        loss += chunk_loss[c];
    }
    return loss;
}

double vector_loss(LossKind kind, const Eigen::Vector3d& r, double scale, Eigen::Vector3d& grad)
{
    if (kind == LossKind::l1) {
        for (int a = 0; a < 3; ++a)
            grad[a] += scale * ((r[a] > 0.0) - (r[a] < 0.0));
        return scale * r.cwiseAbs().sum();
    }
    grad += 2.0 * scale * r;
    return scale * r.squaredNorm();
}

double pixel_loss(LossKind kind, const Eigen::Vector2d& r, double scale, Eigen::Vector2d& grad)
{
    if (kind == LossKind::l1) {
        for (int a = 0; a < 2; ++a)
            grad[a] += scale * ((r[a] > 0.0) - (r[a] < 0.0));
        return scale * r.cwiseAbs().sum();
    }
    grad += 2.0 * scale * r;
    return scale * r.squaredNorm();
}

double elapsed_seconds(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

ModelGradient grad_decode(const CubeModel& model, const Eigen::Vector3d& p, const Eigen::Vector3d& upstream)
{
    const Stencil stencil = make_stencil(model.knots, p);
    ModelGradient grad = ModelGradient::zeros(model);
    PointPass pass;
    forward_point(model, stencil, pass);
    backward_point(model, pass, Eigen::Vector3d::Zero(), upstream, GradientMask{}, grad);
    return grad;
}

// ---------------------------------------------------------------------------
// Fitting

std::pair<CubeModel, FitReport> fit_to_mesh(const CubeModel& input, const TriMesh& target, const FitConfig& config)
{
    config.validate();
    input.validate();
    if (target.vertices.size() != input.tmpl.samples.size())
        throw ValidationError("target", "has " + std::to_string(target.vertices.size()) + " vertices but the model has " +
                                            std::to_string(input.tmpl.samples.size()) +
                                            " samples; resample the template to match");
    for (const auto& v : target.vertices) {
        if (!v.allFinite())
            throw ValidationError("target", "non-finite vertex coordinate");
    }

    const auto start = std::chrono::steady_clock::now();
    CubeModel model = input;
    const auto stencils = sample_stencils(model);
    const ParameterPacking packing(model, config);
    std::vector<double> params = packing.gather(model);
    Optimizer optimizer(config.optimizer, params.size(), config.beta1, config.beta2, config.epsilon,
                        config.weight_decay);
    const GradientMask mask{config.optimize_weights, config.optimize_mlp};
    const double scale = 1.0 / static_cast<double>(stencils.size());

    auto point_loss = [&](std::size_t n, const Eigen::Vector3d& base, const Eigen::Vector3d& out, Eigen::Vector3d& gb,
                          Eigen::Vector3d& go) {
        double loss = 0.0;
        if (config.base_loss_weight > 0.0)
            loss += vector_loss(config.loss, base - target.vertices[n], config.base_loss_weight * scale, gb);
        if (config.out_loss_weight > 0.0)
            loss += vector_loss(config.loss, out - target.vertices[n], config.out_loss_weight * scale, go);
        return loss;
    };

    FitReport report;
    report.config = config;
    report.metric_name = "v2v";
    report.initial_metric = v2v_metric(decode_mesh(model), target);

    std::vector<ModelGradient> chunk_grads;
    ModelGradient grad = ModelGradient::zeros(model);
    report.losses.reserve(config.steps);
    for (int step = 0; step < config.steps; ++step) {
        const double loss = accumulate(model, stencils, mask, config.threads, chunk_grads, grad, point_loss);
        report.losses.push_back(loss);
        optimizer.step(params, packing.flatten(grad, model), config.learning_rate);
        packing.scatter(params, model);
    }
    report.final_loss = accumulate(model, stencils, GradientMask{false, false}, config.threads, chunk_grads, grad,
                                   point_loss);
    report.final_metric = v2v_metric(decode_mesh(model), target);
    report.seconds = elapsed_seconds(start);
    return {std::move(model), std::move(report)};
}

std::vector<Landmark> read_landmarks(std::istream& in)
{
    std::vector<Landmark> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        long long face = 0;
        if (!(ls >> face)) {
            if (ls.eof())
                continue; // blank line
            throw ParseError("malformed landmark face index", line_no);
        }
        Landmark lm;
        if (face < 0)
            throw ParseError("negative face index", line_no);
        lm.point.face = static_cast<std::uint32_t>(face);
        if (!(ls >> lm.point.bary[0] >> lm.point.bary[1] >> lm.point.bary[2] >> lm.pixel[0] >> lm.pixel[1]))
            throw ParseError("landmark line needs: face_index bu bv bw px py", line_no);
        std::string rest;
        if (ls >> rest)
            throw ParseError("trailing data on landmark line", line_no);
        out.push_back(lm);
    }
    return out;
}

std::vector<Landmark> load_landmarks(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for reading");
    return read_landmarks(in);
}

void write_landmarks(std::ostream& out, const std::vector<Landmark>& landmarks)
{
    out << std::setprecision(17);
    for (const auto& lm : landmarks)
        out << lm.point.face << ' ' << lm.point.bary[0] << ' ' << lm.point.bary[1] << ' ' << lm.point.bary[2] << ' '
            << lm.pixel[0] << ' ' << lm.pixel[1] << '\n';
}

namespace {

std::vector<Stencil> landmark_stencils(const CubeModel& model, const std::vector<Landmark>& landmarks)
{
    std::vector<Stencil> stencils;
    stencils.reserve(landmarks.size());
    for (const auto& lm : landmarks)
        stencils.push_back(make_stencil(model.knots, make_surface_sample(model.tmpl, lm.point).param));
    return stencils;
}

std::vector<double> pixel_errors(const CubeModel& model, const std::vector<Stencil>& stencils,
                                 const std::vector<Landmark>& landmarks, const Camera& camera)
{
    std::vector<double> errors(landmarks.size());
    for (std::size_t n = 0; n < landmarks.size(); ++n) {
        const auto d = decode_point(model, stencils[n]);
        errors[n] = (project(camera, d.out) - landmarks[n].pixel).norm();
    }
    return errors;
}

double rms(const std::vector<double>& values)
{
    double sum = 0.0;
    for (double v : values)
        sum += v * v;
    return values.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(values.size()));
}

bool all_in_front(const CubeModel& model, const std::vector<Stencil>& stencils, const Camera& camera)
{
    for (const auto& s : stencils) {
        if (!(camera.to_camera(decode_point(model, s).out).z() > 0.0))
            return false;
    }
    return true;
}

} // namespace

double reprojection_rms(const CubeModel& model, const std::vector<Landmark>& landmarks, const Camera& camera)
{
    return rms(pixel_errors(model, landmark_stencils(model, landmarks), landmarks, camera));
}

std::pair<CubeModel, FitReport> fit_to_landmarks(const CubeModel& input, const std::vector<Landmark>& landmarks,
                                                 const Camera& camera, const FitConfig& config)
{
    config.validate();
    input.validate();
    camera.validate();
    if (landmarks.empty())
        throw ValidationError("landmarks", "no landmarks given");
    for (const auto& lm : landmarks) {
        if (!lm.pixel.allFinite())
            throw ValidationError("landmarks", "non-finite pixel coordinate");
    }

    const auto start = std::chrono::steady_clock::now();
    CubeModel model = input;
    const auto stencils = landmark_stencils(model, landmarks);
    if (!all_in_front(model, stencils, camera))
        throw DomainError("a landmark of the initial model lies behind the camera");

    FitReport report;
    report.config = config;
    report.metric_name = "reprojection";
    if (landmarks.size() < 6)
        report.warnings.push_back("only " + std::to_string(landmarks.size()) +
                                  " landmarks; the fit is rank-deficient and underdetermined");
    {
        const auto errors = pixel_errors(model, stencils, landmarks, camera);
        report.initial_metric = summarize(errors);
        report.initial_rms = rms(errors);
    }

    const ParameterPacking packing(model, config);
    std::vector<double> params = packing.gather(model);
    Optimizer optimizer(config.optimizer, params.size(), config.beta1, config.beta2, config.epsilon,
                        config.weight_decay);
    const GradientMask mask{config.optimize_weights, config.optimize_mlp};
    const double scale = 1.0 / static_cast<double>(stencils.size());

    auto point_loss = [&](std::size_t n, const Eigen::Vector3d&, const Eigen::Vector3d& out, Eigen::Vector3d&,
                          Eigen::Vector3d& go) {
        const Eigen::Vector2d r = project(camera, out) - landmarks[n].pixel;
        Eigen::Vector2d g = Eigen::Vector2d::Zero();
        const double loss = pixel_loss(config.loss, r, scale, g);
        go += project_jacobian(camera, out).transpose() * g;
        return loss;
    };

    std::vector<ModelGradient> chunk_grads;
    ModelGradient grad = ModelGradient::zeros(model);
    double learning_rate = config.learning_rate;
    report.losses.reserve(config.steps);
    for (int step = 0; step < config.steps; ++step) {
        const double loss = accumulate(model, stencils, mask, config.threads, chunk_grads, grad, point_loss);
        report.losses.push_back(loss);

        const auto saved_params = params;
        const auto saved_optimizer = optimizer;
        optimizer.step(params, packing.flatten(grad, model), learning_rate);
        packing.scatter(params, model);
        if (!all_in_front(model, stencils, camera)) {
            params = saved_params;
            optimizer = saved_optimizer;
            packing.scatter(params, model);
            learning_rate *= 0.5;
            ++report.rejected_steps;
        }
    }
    if (report.rejected_steps > 0)
        report.warnings.push_back(std::to_string(report.rejected_steps) +
                                  " steps rejected for moving a landmark behind the camera; final learning rate " +
                                  std::to_string(learning_rate));
    report.final_loss = accumulate(model, stencils, GradientMask{false, false}, config.threads, chunk_grads, grad,
                                   point_loss);
    {
        const auto errors = pixel_errors(model, stencils, landmarks, camera);
        report.final_metric = summarize(errors);
        report.final_rms = rms(errors);
    }
    report.seconds = elapsed_seconds(start);
    return {std::move(model), std::move(report)};
}

} // namespace cube
