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

#include <doctest.h>

#include <cmath>
#include <random>

#include "ccrw/errors.hpp"
#include "ccrw/net.hpp"

using namespace ccrw;

namespace
{
    ChartModel scalar_model(double w, double b)
    {
        ChartModel m;
        m.dims = {1, 1};
        DenseLayer l;
        l.weight = Matrix::Constant(1, 1, w);
        l.bias = Vector::Constant(1, b);
        m.layers.push_back(l);
        return m;
    }

    ModelGradients scalar_grads(double gw, double gb)
    {
        ModelGradients g;
        DenseLayer l;
        l.weight = Matrix::Constant(1, 1, gw);
        l.bias = Vector::Constant(1, gb);
        g.layers.push_back(l);
        return g;
    }
}

TEST_CASE("layer widths halve four times before the output")
{
    CHECK(layer_dims(192, 2) == std::vector<int>{192, 96, 48, 24, 12, 2});
    CHECK(layer_dims(32, 2) == std::vector<int>{32, 16, 8, 4, 2, 2});
    CHECK(layer_dims(100, 2) == std::vector<int>{100, 50, 25, 12, 6, 2});
    CHECK_THROWS_AS(layer_dims(16, 2), data_error);
}

TEST_CASE("initialization is seeded, has zero biases and He-scaled hidden weights")
{
    const ChartModel a = init_model(256, 2, 3);
    const ChartModel b = init_model(256, 2, 3);
    const ChartModel c = init_model(256, 2, 4);
    CHECK(flatten_parameters(a) == flatten_parameters(b));
    CHECK(flatten_parameters(a) != flatten_parameters(c));
    CHECK(a.layers.size() == 5);
    for (const auto &l : a.layers)
        CHECK(l.bias.isZero(0.0));
    const Matrix &w0 = a.layers[0].weight;
    const double var = w0.array().square().mean() - std::pow(w0.mean(), 2);
    CHECK(var == doctest::Approx(2.0 / 256.0).epsilon(0.05));
    // Glorot-uniform output layer: |w| <= sqrt(6 / (fan_in + fan_out)).
    const double limit = std::sqrt(6.0 / (16.0 + 2.0));
    CHECK(a.layers.back().weight.cwiseAbs().maxCoeff() <= limit);
    std::size_t expected = 0;
    for (std::size_t l = 0; l + 1 < a.dims.size(); ++l)
        expected += static_cast<std::size_t>(a.dims[l] + 1) * a.dims[l + 1];
    CHECK(a.parameter_count() == expected);
}

TEST_CASE("two Adam steps match the hand-computed trajectory")
{
    // Weight starts at 1 with gradients 0.5 then -0.2; bias starts at -2 with gradients 3 then 0.
    ChartModel m = scalar_model(1.0, -2.0);
    AdamConfig cfg;
    cfg.learning_rate = 0.1;
    AdamState st = AdamState::for_model(m, cfg);
    adam_step(m, scalar_grads(0.5, 3.0), st);
    CHECK(m.layers[0].weight(0, 0) == doctest::Approx(0.900000002).epsilon(1e-14));
    CHECK(m.layers[0].bias(0) == doctest::Approx(-2.0999999996666667).epsilon(1e-14));
    adam_step(m, scalar_grads(-0.2, 0.0), st);
    CHECK(m.layers[0].weight(0, 0) == doctest::Approx(0.8654394181165108).epsilon(1e-14));
    CHECK(m.layers[0].bias(0) == doctest::Approx(-2.167005824764373).epsilon(1e-14));
    CHECK(st.step == 2);
    CHECK(m.revision == 2);
}

TEST_CASE("Adam rejects mismatched gradient layouts")
{
    ChartModel m = scalar_model(1.0, 0.0);
    AdamState st = AdamState::for_model(m);
    ModelGradients g = scalar_grads(1.0, 1.0);
    g.layers[0].weight = Matrix::Zero(2, 1);
    CHECK_THROWS_AS(adam_step(m, g, st), data_error);
}

TEST_CASE("backward agrees with finite differences of a weighted output sum")
{
    ChartModel m = init_model(32, 2, 9);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto &l : m.layers)
        for (Eigen::Index i = 0; i < l.bias.size(); ++i)
            l.bias(i) = 0.1 * g(rng);
    Matrix x(5, 32), w(5, 2);
    for (Eigen::Index i = 0; i < x.size(); ++i)
        x.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < w.size(); ++i)
        w.data()[i] = g(rng);

    ForwardCache cache;
    forward(m, x, &cache);
    const auto analytic = flatten_gradients(backward(m, cache, w));
    auto params = flatten_parameters(m);
    const double h = 1e-6;
    double err = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < params.size(); ++k)
    {
        const double keep = params[k];
        params[k] = keep + h;
        assign_parameters(m, params);
        const double up = (forward(m, x).array() * w.array()).sum();
        params[k] = keep - h;
        assign_parameters(m, params);
        const double down = (forward(m, x).array() * w.array()).sum();
        params[k] = keep;
        const double numeric = (up - down) / (2.0 * h);
        err += (numeric - analytic[k]) * (numeric - analytic[k]);
        norm += analytic[k] * analytic[k];
    }
    CHECK(std::sqrt(err / norm) < 1e-6);
}

TEST_CASE("a stale forward cache is rejected")
{
    ChartModel m = init_model(32, 2, 1);
    ForwardCache cache;
    forward(m, Matrix::Ones(2, 32), &cache);
    auto p = flatten_parameters(m);
    assign_parameters(m, p);
    CHECK_THROWS(backward(m, cache, Matrix::Ones(2, 2)));
}

TEST_CASE("parameter flattening round-trips and checks the length")
{
    ChartModel m = init_model(64, 2, 5);
    auto p = flatten_parameters(m);
    for (auto &v : p)
        v *= 2.0;
    assign_parameters(m, p);
    CHECK(flatten_parameters(m) == p);
    p.pop_back();
    CHECK_THROWS_AS(assign_parameters(m, p), data_error);
}
