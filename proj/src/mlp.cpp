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

#include "cube/mlp.hpp"

#include "cube/error.hpp"

#include <cmath>
#include <random>

namespace cube {

std::string to_string(Activation a)
{
    switch (a) {
    case Activation::relu:
        return "relu";
    }
    return "unknown";
}

Activation activation_from_string(const std::string& name)
{
    if (name == "relu")
        return Activation::relu;
    throw ValidationError("activation", "unsupported activation '" + name + "'");
}

ResidualMlp::ResidualMlp(std::vector<DenseLayer> layers, Activation activation)
    : layers_(std::move(layers)), activation_(activation)
{
    validate();
}

ResidualMlp ResidualMlp::create(int input_dim, int hidden_dim, std::uint64_t seed)
{
    if (input_dim < 3 || hidden_dim < 1)
        throw ConfigError("invalid MLP widths");
    std::mt19937_64 rng(seed);
    const int dims[num_layers + 1] = {input_dim, hidden_dim, hidden_dim, hidden_dim, 3};
    std::vector<DenseLayer> layers(num_layers);
    for (int l = 0; l < num_layers; ++l) {
        auto& layer = layers[l];
        layer.weight = Eigen::MatrixXd::Zero(dims[l + 1], dims[l]);
        layer.bias = Eigen::VectorXd::Zero(dims[l + 1]);
        if (l + 1 == num_layers)
            continue;
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / dims[l]));
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                layer.weight(r, c) = normal(rng);
    }
    return ResidualMlp(std::move(layers));
}

std::vector<int> ResidualMlp::layer_dims() const
{
    std::vector<int> dims;
    if (layers_.empty())
        return dims;
    dims.push_back(static_cast<int>(layers_.front().weight.cols()));
    for (const auto& l : layers_)
        dims.push_back(static_cast<int>(l.weight.rows()));
    return dims;
}

std::size_t ResidualMlp::parameter_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& l : layers_)
        n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

void ResidualMlp::validate() const
{
    if (static_cast<int>(layers_.size()) != num_layers)
        throw ValidationError("mlp", "expected " + std::to_string(num_layers) + " layers, got " +
                                         std::to_string(layers_.size()));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.bias.size() != layer.weight.rows())
            throw ValidationError("mlp.layer" + std::to_string(l), "bias size does not match weight rows");
        if (l > 0 && layer.weight.cols() != layers_[l - 1].weight.rows())
            throw ValidationError("mlp.layer" + std::to_string(l), "input width does not match previous layer");
    }
    if (layers_.back().weight.rows() != 3)
        throw ValidationError("mlp", "output width must be 3");
}

Eigen::Vector3d ResidualMlp::forward(const Eigen::Ref<const Eigen::VectorXd>& z) const
{
    Eigen::VectorXd x = z;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::VectorXd y = layers_[l].weight * x + layers_[l].bias;
        if (l + 1 < layers_.size())
            y = y.cwiseMax(0.0);
        x = std::move(y);
    }
    return x;
}

Eigen::Vector3d ResidualMlp::forward(const Eigen::Ref<const Eigen::VectorXd>& z, MlpTrace& trace) const
{
    trace.pre.resize(layers_.size());
    trace.post.resize(layers_.size() + 1);
    trace.post[0] = z;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        trace.pre[l].noalias() = layers_[l].weight * trace.post[l];
        trace.pre[l] += layers_[l].bias;
        if (l + 1 < layers_.size())
            trace.post[l + 1] = trace.pre[l].cwiseMax(0.0);
        else
            trace.post[l + 1] = trace.pre[l];
    }
    return trace.post.back();
}

Eigen::VectorXd ResidualMlp::backward(const MlpTrace& trace, const Eigen::Vector3d& upstream,
                                      std::vector<DenseLayer>* grads) const
{
    Eigen::VectorXd delta = upstream;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        if (l + 1 < layers_.size()) {
            for (Eigen::Index n = 0; n < delta.size(); ++n) {
                if (!(trace.pre[l][n] > 0.0))
                    delta[n] = 0.0;
            }
        }
        if (grads) {
            (*grads)[l].weight.noalias() += delta * trace.post[l].transpose();
            (*grads)[l].bias += delta;
        }
        delta = layers_[l].weight.transpose() * delta;
    }
    return delta;
}

std::vector<DenseLayer> zeros_like(const ResidualMlp& mlp)
{
    std::vector<DenseLayer> out;
    out.reserve(mlp.layers().size());
    for (const auto& l : mlp.layers())
        out.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()), Eigen::VectorXd::Zero(l.bias.size())});
    return out;
}

} // namespace cube
