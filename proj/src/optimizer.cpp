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

#include "cube/optimizer.hpp"

#include "cube/error.hpp"

#include <cmath>

namespace cube {

Optimizer::Optimizer(OptimizerKind kind, std::size_t size, double beta1, double beta2, double epsilon,
                     double weight_decay)
    : kind_(kind), beta1_(beta1), beta2_(beta2), epsilon_(epsilon), weight_decay_(weight_decay)
{
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0) || !(weight_decay >= 0.0))
        throw ConfigError("invalid optimizer hyperparameters");
    if (kind_ == OptimizerKind::adam) {
        m_.assign(size, 0.0);
        v_.assign(size, 0.0);
    }
}

void Optimizer::step(std::span<double> params, std::span<const double> grads, double learning_rate)
{
    if (params.size() != grads.size())
        throw ConfigError("parameter and gradient sizes differ");
    ++t_;
    if (kind_ == OptimizerKind::gradient_descent) {
        for (std::size_t n = 0; n < params.size(); ++n)
            params[n] -= learning_rate * (grads[n] + weight_decay_ * params[n]);
        return;
    }
    if (m_.size() != params.size())
        throw ConfigError("optimizer state was sized for a different parameter vector");
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t n = 0; n < params.size(); ++n) {
        const double g = grads[n];
        m_[n] = beta1_ * m_[n] + (1.0 - beta1_) * g;
        v_[n] = beta2_ * v_[n] + (1.0 - beta2_) * g * g;
        const double m_hat = m_[n] / c1;
        const double v_hat = v_[n] / c2;
        params[n] -= learning_rate * (m_hat / (std::sqrt(v_hat) + epsilon_) + weight_decay_ * params[n]);
    }
}

} // namespace cube
