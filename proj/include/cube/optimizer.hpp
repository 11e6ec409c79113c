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

#include <cstdint>
#include <span>
#include <vector>

namespace cube {

enum class OptimizerKind
{
    adam,
    gradient_descent,
};

/**
 * First-order update over a flat parameter vector. Adam keeps its moment
 * estimates here; a copy of the object snapshots the full optimizer state.
 * Weight decay is decoupled (applied to the parameters, not the gradient).
 */
class Optimizer
{
public:
    Optimizer(OptimizerKind kind, std::size_t size, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8,
              double weight_decay = 0.0);

    void step(std::span<double> params, std::span<const double> grads, double learning_rate);

    std::int64_t iterations() const noexcept { return t_; }

private:
    OptimizerKind kind_;
    double beta1_;
    double beta2_;
    double epsilon_;
    double weight_decay_;
    std::int64_t t_ = 0;
    std::vector<double> m_;
    std::vector<double> v_;
};

} // namespace cube
