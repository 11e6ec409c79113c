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

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cube {

enum class Activation
{
    relu,
};

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct DenseLayer
{
    Eigen::MatrixXd weight; ///< out x in
    Eigen::VectorXd bias;   ///< out

    bool operator==(const DenseLayer& other) const
    {
        return weight.rows() == other.weight.rows() && weight.cols() == other.weight.cols() &&
               weight == other.weight && bias.size() == other.bias.size() && bias == other.bias;
    }
};

/// Intermediate values of one forward pass, kept for backpropagation.
struct MlpTrace
{
    std::vector<Eigen::VectorXd> pre;  ///< pre-activation of every layer
    std::vector<Eigen::VectorXd> post; ///< post[0] = input, post[l+1] = output of layer l
};

/**
 * Residual displacement network g: R^d -> R^3. Four dense layers
 * (d -> h -> h -> h -> 3), rectified-linear on the hidden layers and identity
 * on the output.
 */
class ResidualMlp
{
public:
    static constexpr int num_layers = 4;

    ResidualMlp() = default;
    explicit ResidualMlp(std::vector<DenseLayer> layers, Activation activation = Activation::relu);

    /// Hidden layers: He-normal weights from `seed`, zero biases. Output layer all zeros,
    /// so g(z) = 0 until the output layer is trained.
    static ResidualMlp create(int input_dim, int hidden_dim, std::uint64_t seed);

    int input_dim() const noexcept { return static_cast<int>(layers_.front().weight.cols()); }
    /// {d, h1, h2, h3, 3}
    std::vector<int> layer_dims() const;
    Activation activation() const noexcept { return activation_; }
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }
    std::size_t parameter_count() const noexcept;

    Eigen::Vector3d forward(const Eigen::Ref<const Eigen::VectorXd>& z) const;
    Eigen::Vector3d forward(const Eigen::Ref<const Eigen::VectorXd>& z, MlpTrace& trace) const;

    /**
     * Backpropagates `upstream` (cotangent of the output) through the pass in
     * `trace`. Adds parameter gradients into `grads` (same shapes as layers())
     * and returns the cotangent of the input.
     */
    Eigen::VectorXd backward(const MlpTrace& trace, const Eigen::Vector3d& upstream,
                             std::vector<DenseLayer>* grads) const;

    /// Throws ValidationError on shape problems.
    void validate() const;

    bool operator==(const ResidualMlp&) const = default;

private:
    std::vector<DenseLayer> layers_;
    Activation activation_ = Activation::relu;
};

/// Zero-filled layers with the same shapes as `mlp`.
std::vector<DenseLayer> zeros_like(const ResidualMlp& mlp);

} // namespace cube
