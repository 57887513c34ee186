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

#include "ccrw/net.hpp"

#include <cmath>
#include <random>

#include "ccrw/errors.hpp"
#include "ccrw/random.hpp"

namespace ccrw
{
    std::size_t ChartModel::parameter_count() const
    {
        std::size_t n = 0;
        for (const auto &l : layers)
            n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
        return n;
    }

    std::vector<int> layer_dims(int input_dim, int output_dim)
    {
        std::vector<int> dims{input_dim, input_dim / 2, input_dim / 4, input_dim / 8, input_dim / 16, output_dim};
        for (int d : dims)
            if (d < output_dim || d < 1)
                throw data_error("input dimension " + std::to_string(input_dim) +
                                 " is too small for a six-layer chart network");
        return dims;
    }

    ChartModel init_model(int input_dim, int output_dim, std::uint64_t seed)
    {
        ChartModel model;
        model.dims = layer_dims(input_dim, output_dim);
        model.seed = seed;
        Rng rng = make_rng(seed, "init");
        const std::size_t n_layers = model.dims.size() - 1;
        for (std::size_t l = 0; l < n_layers; ++l)
        {
            const int fan_in = model.dims[l];
            const int fan_out = model.dims[l + 1];
            DenseLayer layer;
            layer.weight.resize(fan_out, fan_in);
            layer.bias = Vector::Zero(fan_out);
            if (l + 1 < n_layers)
            {
                std::normal_distribution<double> he(0.0, std::sqrt(2.0 / fan_in));
                for (int r = 0; r < fan_out; ++r)
                    for (int c = 0; c < fan_in; ++c)
                        layer.weight(r, c) = he(rng);
            }
            else
            {
                const double limit = std::sqrt(6.0 / (fan_in + fan_out));
                std::uniform_real_distribution<double> glorot(-limit, limit);
                for (int r = 0; r < fan_out; ++r)
                    for (int c = 0; c < fan_in; ++c)
                        layer.weight(r, c) = glorot(rng);
            }
            model.layers.push_back(std::move(layer));
        }
        return model;
    }

    ModelGradients ModelGradients::zeros_like(const ChartModel &model)
    {
        ModelGradients g;
        for (const auto &l : model.layers)
            g.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
        return g;
    }

    ModelGradients &ModelGradients::operator+=(const ModelGradients &other)
    {
        for (std::size_t l = 0; l < layers.size(); ++l)
        {
            layers[l].weight += other.layers[l].weight;
            layers[l].bias += other.layers[l].bias;
        }
        return *this;
    }

    ModelGradients &ModelGradients::operator*=(double s)
    {
        for (auto &l : layers)
        {
            l.weight *= s;
            l.bias *= s;
        }
        return *this;
    }

    double ModelGradients::max_abs() const
    {
        double m = 0.0;
        for (const auto &l : layers)
        {
            if (l.weight.size() > 0)
                m = std::max(m, l.weight.cwiseAbs().maxCoeff());
            if (l.bias.size() > 0)
                m = std::max(m, l.bias.cwiseAbs().maxCoeff());
        }
        return m;
    }

    Matrix forward(const ChartModel &model, const Matrix &x, ForwardCache *cache)
    {
        if (x.cols() != model.input_dim())
            throw data_error("forward: feature width " + std::to_string(x.cols()) + " does not match model input " +
                             std::to_string(model.input_dim()));
        if (cache)
        {
            cache->inputs.clear();
            cache->pre.clear();
            cache->revision = model.revision;
            cache->model = &model;
        }
        Matrix act = x;
        const std::size_t n_layers = model.layers.size();
        for (std::size_t l = 0; l < n_layers; ++l)
        {
            const auto &layer = model.layers[l];
            Matrix z = act * layer.weight.transpose();
            z.rowwise() += layer.bias.transpose();
            if (cache)
            {
                cache->inputs.push_back(std::move(act));
                cache->pre.push_back(z);
            }
            if (l + 1 < n_layers)
                act = z.cwiseMax(0.0);
            else
                act = std::move(z);
        }
        return act;
    }

    ModelGradients backward(const ChartModel &model, const ForwardCache &cache, const Matrix &output_grads)
    {
        if (cache.model != &model || cache.revision != model.revision || cache.pre.size() != model.layers.size())
            throw data_error("backward: stale forward cache");
        const auto batch = cache.inputs.front().rows();
        if (output_grads.rows() != batch || output_grads.cols() != model.output_dim())
            throw data_error("backward: output gradient shape mismatch");

        ModelGradients grads = ModelGradients::zeros_like(model);
        Matrix delta = output_grads; // dL/dz of the current layer
        for (std::size_t l = model.layers.size(); l-- > 0;)
        {
            grads.layers[l].weight.noalias() = delta.transpose() * cache.inputs[l];
            grads.layers[l].bias = delta.colwise().sum().transpose();
            if (l == 0)
                break;
            Matrix upstream = delta * model.layers[l].weight;
            // ReLU of the previous layer; derivative is 0 at exactly 0.
            const Matrix &z_prev = cache.pre[l - 1];
            delta = (z_prev.array() > 0.0).select(upstream, 0.0);
        }
        return grads;
    }

    AdamState AdamState::for_model(const ChartModel &model, const AdamConfig &config)
    {
        AdamState s;
        s.config = config;
        s.first = ModelGradients::zeros_like(model);
        s.second = ModelGradients::zeros_like(model);
        return s;
    }

    namespace
    {
        template <typename Param>
        void adam_update(Param &p, const Param &g, Param &m, Param &v, const AdamConfig &cfg, double bc1, double bc2)
        {
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
            const auto m_hat = m.array() / bc1;
            const auto v_hat = v.array() / bc2;
            p.array() -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }

    void adam_step(ChartModel &model, const ModelGradients &grads, AdamState &state)
    {
        if (grads.layers.size() != model.layers.size() || state.first.layers.size() != model.layers.size())
            throw data_error("adam_step: gradient layout does not match the model");
        ++state.step;
        const auto &cfg = state.config;
        const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
        const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
        for (std::size_t l = 0; l < model.layers.size(); ++l)
        {
            auto &layer = model.layers[l];
            const auto &g = grads.layers[l];
            if (g.weight.rows() != layer.weight.rows() || g.weight.cols() != layer.weight.cols() ||
                g.bias.size() != layer.bias.size())
                throw data_error("adam_step: gradient shape mismatch in layer " + std::to_string(l));
            adam_update(layer.weight, g.weight, state.first.layers[l].weight, state.second.layers[l].weight, cfg, bc1, bc2);
            adam_update(layer.bias, g.bias, state.first.layers[l].bias, state.second.layers[l].bias, cfg, bc1, bc2);
        }
        ++model.revision;
    }

    std::vector<double> flatten_parameters(const ChartModel &model)
    {
        std::vector<double> flat;
        flat.reserve(model.parameter_count());
        for (const auto &l : model.layers)
        {
            for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
                    flat.push_back(l.weight(r, c));
            for (Eigen::Index r = 0; r < l.bias.size(); ++r)
                flat.push_back(l.bias(r));
        }
        return flat;
    }

    void assign_parameters(ChartModel &model, const std::vector<double> &flat)
    {
        if (flat.size() != model.parameter_count())
            throw data_error("assign_parameters: expected " + std::to_string(model.parameter_count()) +
                             " values, got " + std::to_string(flat.size()));
        std::size_t k = 0;
        for (auto &l : model.layers)
        {
            for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
                    l.weight(r, c) = flat[k++];
            for (Eigen::Index r = 0; r < l.bias.size(); ++r)
                l.bias(r) = flat[k++];
        }
        ++model.revision;
    }

    std::vector<double> flatten_gradients(const ModelGradients &grads)
    {
        std::vector<double> flat;
        for (const auto &l : grads.layers)
        {
            for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
                for (Eigen::Index c = 0; c < l.weight.cols(); ++c)
                    flat.push_back(l.weight(r, c));
            for (Eigen::Index r = 0; r < l.bias.size(); ++r)
                flat.push_back(l.bias(r));
        }
        return flat;
    }
}
