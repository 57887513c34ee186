// SPDX-License-Identifier: Apache-2.0
//
// ccrw - channel charting in real-world coordinates
// Copyright (C) 2026 The ccrw authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <vector>

#include "ccrw/types.hpp"

namespace ccrw
{
    struct DenseLayer
    {
        Matrix weight; // out x in
        Vector bias;   // out
    };

    // Fully connected chart function: ReLU on every layer but the last, which is linear.
    struct ChartModel
    {
        std::vector<DenseLayer> layers;
        std::vector<int> dims; // activations per layer, input first
        std::uint64_t seed = 0;
        std::uint64_t revision = 0; // bumped by every parameter update

        int input_dim() const { return dims.empty() ? 0 : dims.front(); }
        int output_dim() const { return dims.empty() ? 0 : dims.back(); }
        std::size_t parameter_count() const;
    };

    // {D', D'/2, D'/4, D'/8, D'/16, D} with integer division.
    std::vector<int> layer_dims(int input_dim, int output_dim);

    // He-normal init for the hidden layers, Glorot-uniform for the output layer, zero biases.
    ChartModel init_model(int input_dim, int output_dim, std::uint64_t seed);

    struct ForwardCache
    {
        std::vector<Matrix> inputs; // input to each layer, batch x in
        std::vector<Matrix> pre;    // pre-activation of each layer, batch x out
        std::uint64_t revision = 0;
        const ChartModel *model = nullptr;
    };

    // Gradients share the layout of the model parameters.
    struct ModelGradients
    {
        std::vector<DenseLayer> layers;

        static ModelGradients zeros_like(const ChartModel &model);
        ModelGradients &operator+=(const ModelGradients &other);
        ModelGradients &operator*=(double s);
        double max_abs() const;
    };

    // Rows of `x` are samples. When `cache` is given it is filled for backward().
    Matrix forward(const ChartModel &model, const Matrix &x, ForwardCache *cache = nullptr);

    // Gradient of sum(output_grads .* outputs) w.r.t. all parameters; ReLU'(0) := 0.
    ModelGradients backward(const ChartModel &model, const ForwardCache &cache, const Matrix &output_grads);

    struct AdamConfig
    {
        double learning_rate = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double epsilon = 1e-8;
    };

    struct AdamState
    {
        AdamConfig config;
        ModelGradients first;
        ModelGradients second;
        long step = 0;

        static AdamState for_model(const ChartModel &model, const AdamConfig &config = {});
    };

    void adam_step(ChartModel &model, const ModelGradients &grads, AdamState &state);

    // Flat parameter view in layer order: each layer's weight row-major, then its bias.
    std::vector<double> flatten_parameters(const ChartModel &model);
    void assign_parameters(ChartModel &model, const std::vector<double> &flat);
    std::vector<double> flatten_gradients(const ModelGradients &grads);
}
