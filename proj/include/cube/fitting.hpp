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

#include "cube/camera.hpp"
#include "cube/metrics.hpp"
#include "cube/model.hpp"
#include "cube/optimizer.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace cube {

enum class LossKind
{
    l1,
    l2,
};

/**
 * Optimizer hyperparameters. The JSON config file uses exactly these field
 * names; `optimizer` is "adam" or "gd", `loss` is "l1" or "l2".
 */
struct FitConfig
{
    int steps = 2000;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;
    bool optimize_weights = false;
    bool optimize_mlp = true;
    LossKind loss = LossKind::l1;
    double base_loss_weight = 1.0;
    double out_loss_weight = 1.0;
    std::uint64_t seed = 0;
    int threads = 1;

    /// 2000 steps at 1e-3, L1 on base and final shapes.
    static FitConfig mesh_defaults();
    /// 500 steps at 1e-2, L2 reprojection.
    static FitConfig landmark_defaults();

    void validate() const;
};

FitConfig read_fit_config(std::istream& in, FitConfig base = {});
FitConfig load_fit_config(const std::filesystem::path& path, FitConfig base = {});
std::string to_json(const FitConfig& config);

struct FitReport
{
    std::vector<double> losses; ///< loss before each step's update; size == steps
    double final_loss = 0.0;    ///< loss after the last update
    MetricSummary initial_metric;
    MetricSummary final_metric;
    std::string metric_name; ///< "v2v" or "reprojection"
    double initial_rms = 0.0;
    double final_rms = 0.0;
    double seconds = 0.0;
    int rejected_steps = 0;
    std::vector<std::string> warnings;
    FitConfig config;
};

/// `# key: value` header lines, then `step loss` rows.
void write_report(std::ostream& out, const FitReport& report);
void save_report(const FitReport& report, const std::filesystem::path& path);

/// Exponential moving average with smoothing 2 / (window + 1).
std::vector<double> smoothed_trace(const std::vector<double>& values, int window = 50);

/// Gradients with the same layout as the model parameters. `weights` is with respect to h_ijk.
struct ModelGradient
{
    std::vector<double> features;
    std::vector<double> weights;
    std::vector<DenseLayer> mlp;

    static ModelGradient zeros(const CubeModel& model);
    void set_zero();
    void add(const ModelGradient& other);
};

/// Exact reverse-mode gradient of <upstream, x_out(p)> with respect to all model parameters.
ModelGradient grad_decode(const CubeModel& model, const Eigen::Vector3d& p, const Eigen::Vector3d& upstream);

/// Minimizes base_w L(x_base, target) + out_w L(x_out, target) with vertexwise correspondence.
std::pair<CubeModel, FitReport> fit_to_mesh(const CubeModel& model, const TriMesh& target, const FitConfig& config);

/// A template surface point and where it was observed in the image.
struct Landmark
{
    FacePoint point;
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

/// Text lines `face_index bu bv bw px py`; `#` starts a comment.
std::vector<Landmark> read_landmarks(std::istream& in);
std::vector<Landmark> load_landmarks(const std::filesystem::path& path);
void write_landmarks(std::ostream& out, const std::vector<Landmark>& landmarks);

/**
 * Minimizes the mean reprojection error of the decoded landmark points under
 * a fixed camera. A step that would put any landmark behind the camera is
 * undone and the learning rate halved.
 */
std::pair<CubeModel, FitReport> fit_to_landmarks(const CubeModel& model, const std::vector<Landmark>& landmarks,
                                                 const Camera& camera, const FitConfig& config);

/// Root-mean-square pixel distance of the decoded landmarks.
double reprojection_rms(const CubeModel& model, const std::vector<Landmark>& landmarks, const Camera& camera);

} // namespace cube
