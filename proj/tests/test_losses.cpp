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
#include "ccrw/losses.hpp"

using namespace ccrw;

namespace
{
    Matrix random_matrix(std::mt19937_64 &rng, int rows, int cols, double scale = 3.0)
    {
        std::normal_distribution<double> g(0.0, scale);
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i)
            m.data()[i] = g(rng);
        return m;
    }

    // Central differences of `f` with respect to every embedding entry.
    template <typename F>
    Matrix numeric_grad(const Matrix &x, F f, double h = 1e-6)
    {
        Matrix g(x.rows(), x.cols());
        Matrix y = x;
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            for (Eigen::Index j = 0; j < x.cols(); ++j)
            {
                y(i, j) = x(i, j) + h;
                const double up = f(y);
                y(i, j) = x(i, j) - h;
                const double down = f(y);
                y(i, j) = x(i, j);
                g(i, j) = (up - down) / (2.0 * h);
            }
        return g;
    }
}

TEST_CASE("sampled triplets respect the coherence window")
{
    std::vector<double> t(300);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> jitter(0.0, 0.5);
    double now = 0.0;
    for (auto &v : t)
        v = (now += 0.1 + jitter(rng));
    const double tc = 2.0;
    const auto triplets = sample_triplets(t, tc, 5000, 17);
    CHECK(triplets.size() == 5000);
    for (const auto &tr : triplets)
    {
        const double dc = std::abs(t[tr.anchor] - t[tr.close]);
        const double df = std::abs(t[tr.anchor] - t[tr.far]);
        CHECK(dc > 0.0);
        CHECK(dc <= tc);
        CHECK(df > tc);
    }
    const auto again = sample_triplets(t, tc, 5000, 17);
    bool same = true;
    for (std::size_t k = 0; k < again.size(); ++k)
        same = same && again[k].anchor == triplets[k].anchor && again[k].close == triplets[k].close &&
               again[k].far == triplets[k].far;
    CHECK(same);
}

TEST_CASE("triplet sampler restricted to a subset never leaves it")
{
    std::vector<double> t(100);
    for (int i = 0; i < 100; ++i)
        t[i] = 0.5 * i;
    std::vector<int> subset;
    for (int i = 0; i < 100; i += 3)
        subset.push_back(i);
    const TripletSampler sampler(t, subset, 3.0);
    std::mt19937_64 rng(4);
    for (int anchor : subset)
        for (int k = 0; k < 20; ++k)
        {
            const auto tr = sampler.sample(anchor, rng);
            REQUIRE(tr.has_value());
            CHECK(tr->close % 3 == 0);
            CHECK(tr->far % 3 == 0);
        }
}

TEST_CASE("triplet sampling fails cleanly when no far sample exists")
{
    const std::vector<double> t{0.0, 0.1, 0.2, 0.3};
    CHECK_THROWS_AS(sample_triplets(t, 10.0, 5, 1), data_error);
    CHECK_THROWS_AS(sample_triplets(t, 0.0, 5, 1), data_error);
}

TEST_CASE("triplet loss value by hand")
{
    Matrix x(4, 2);
    x << 0, 0, 3, 4, 1, 0, 10, 10;
    // Active: |a-c| = 5, |a-f| = 1, hinge 5 - 1 + 1 = 5. Inactive: close (1,0), far (10,10).
    const std::vector<Triplet> t{{0, 1, 2}, {0, 2, 3}};
    const auto v = triplet_loss(x, t, 1.0);
    CHECK(v.value == doctest::Approx(2.5));
    CHECK(v.terms == 2);
    CHECK_THROWS_AS(triplet_loss(x, std::vector<Triplet>{}, 1.0), data_error);
}

TEST_CASE("bilateration loss value by hand")
{
    Matrix x(1, 2), ap(2, 2);
    x << 0, 0;
    ap << 3, 4, 0, 1;
    const std::vector<std::vector<ApPair>> pairs{{{0, 1}}};
    CHECK(bilateration_loss(x, ap, pairs, 0.5).value == doctest::Approx(4.5));
    // Reversed roles: 1 - 5 + 0.5 < 0.
    const std::vector<std::vector<ApPair>> reversed{{{1, 0}}};
    CHECK(bilateration_loss(x, ap, reversed, 0.5).value == 0.0);
    const std::vector<std::vector<ApPair>> none{{}};
    const auto empty = bilateration_loss(x, ap, none, 0.5);
    CHECK(empty.value == 0.0);
    CHECK(empty.terms == 0);
}

TEST_CASE("box distance is the squared distance to the rectangle")
{
    const Rect box{0, 2, 0, 2};
    CHECK(box_distance({1, 1}, box) == 0.0);
    CHECK(box_distance({2, 0}, box) == 0.0);
    CHECK(box_distance({-1, 5}, box) == doctest::Approx(10.0));
    CHECK(box_distance({3, 1}, box) == doctest::Approx(1.0));
    const Vec2 g = box_distance_gradient({-1, 5}, box);
    CHECK(g.x() == doctest::Approx(-2.0));
    CHECK(g.y() == doctest::Approx(6.0));
    CHECK(box_distance_gradient({1, 1}, box).isZero(0.0));
}

TEST_CASE("box loss policies")
{
    Matrix x(1, 2);
    x << 5, 0;
    Matrix powers(1, 2);
    powers << -30, -20;
    const std::vector<Rect> boxes{{0, 1, 0, 1}, {4, 6, -1, 1}};
    const std::vector<std::vector<int>> los{{0, 1}};
    // Strongest AP is 1 and x is inside its box.
    CHECK(bbox_loss(x, los, powers, boxes, BoxPolicy::strongest_ap).value == 0.0);
    // All LoS APs: (16 + 0) / 2.
    CHECK(bbox_loss(x, los, powers, boxes, BoxPolicy::all_los_aps).value == doctest::Approx(8.0));
    CHECK(bbox_loss(x, std::vector<std::vector<int>>{{}}, powers, boxes, BoxPolicy::strongest_ap).terms == 0);
}

TEST_CASE("mean squared error by hand")
{
    Matrix x(3, 2);
    x << 1, 1, 0, 0, 2, 2;
    const std::vector<Label> labels{{0, Vec2(1, 2)}, {2, Vec2(0, 2)}};
    const auto v = mse_loss(x, labels);
    CHECK(v.value == doctest::Approx((1.0 + 4.0) / 2.0));
    CHECK(v.grad.row(1).isZero(0.0));
    CHECK_THROWS_AS(mse_loss(x, std::vector<Label>{}), data_error);
}

TEST_CASE("embedding gradients of every loss match finite differences")
{
    std::mt19937_64 rng(21);
    for (int draw = 0; draw < 20; ++draw)
    {
        const Matrix x = random_matrix(rng, 8, 2);
        const Matrix ap = random_matrix(rng, 3, 2, 5.0);
        std::vector<Triplet> trips;
        std::uniform_int_distribution<int> row(0, 7);
        while (trips.size() < 6)
        {
            Triplet t{row(rng), row(rng), row(rng)};
            if (t.anchor != t.close && t.anchor != t.far && t.close != t.far)
                trips.push_back(t);
        }
        std::vector<std::vector<ApPair>> pairs(8);
        for (int r = 0; r < 8; ++r)
            pairs[r] = {{r % 3, (r + 1) % 3}};
        const std::vector<Rect> boxes{{-1, 1, -1, 1}, {0, 3, -2, 0}, {-4, -1, 1, 4}};
        std::vector<std::vector<int>> los(8, std::vector<int>{0, 1, 2});
        const Matrix powers = random_matrix(rng, 8, 3);
        const std::vector<Label> labels{{1, Vec2(0.5, -0.5)}, {4, Vec2(2, 1)}};

        LossBatch batch;
        batch.triplets = trips;
        batch.pairs = pairs;
        batch.los_sets = los;
        batch.powers = powers;
        batch.ap_xy = ap;
        batch.boxes = boxes;
        batch.labels = labels;
        LossConfig cfg;
        cfg.margin_t = 2.0;
        cfg.margin_b = 1.5;
        cfg.weight_t = 0.7;
        cfg.weight_bi = 1.3;
        cfg.weight_box = 0.4;
        cfg.weight_mse = 2.0;
        cfg.box_policy = BoxPolicy::all_los_aps;
        const auto analytic = multi_loss(cfg, batch, x);
        const Matrix numeric = numeric_grad(x, [&](const Matrix &y) { return multi_loss(cfg, batch, y).value; });
        CHECK((analytic.grad - numeric).norm() <= 1e-6 * std::max(1.0, numeric.norm()));

        const double parts = 0.7 * *analytic.triplet + 1.3 * *analytic.bilateration + 0.4 * *analytic.box +
                             2.0 * *analytic.mse;
        CHECK(analytic.value == doctest::Approx(parts).epsilon(1e-12));
    }
}

TEST_CASE("zero-weight losses are not evaluated")
{
    Matrix x = Matrix::Zero(2, 2);
    x(1, 0) = 1.0;
    LossBatch batch;
    batch.labels = {{0, Vec2(1, 1)}};
    LossConfig cfg;
    cfg.weight_t = cfg.weight_bi = cfg.weight_box = 0.0;
    cfg.weight_mse = 1.0;
    const auto v = multi_loss(cfg, batch, x);
    CHECK_FALSE(v.triplet.has_value());
    CHECK_FALSE(v.bilateration.has_value());
    CHECK_FALSE(v.box.has_value());
    CHECK(v.mse.has_value());
    cfg.weight_mse = 0.0;
    CHECK_THROWS_AS(multi_loss(cfg, batch, x), data_error);
    cfg.weight_mse = 1.0;
    cfg.margin_t = -1.0;
    CHECK_THROWS_AS(multi_loss(cfg, batch, x), data_error);
}
