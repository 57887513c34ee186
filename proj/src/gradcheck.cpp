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

#include "ccrw/gradcheck.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>

#include "ccrw/errors.hpp"
#include "ccrw/losses.hpp"
#include "ccrw/net.hpp"
#include "ccrw/random.hpp"

namespace ccrw
{
    bool GradcheckReport::passed() const
    {
        return !cases.empty() && std::all_of(cases.begin(), cases.end(), [](const auto &c) { return c.passed; });
    }

    namespace
    {
        enum class Kind
        {
            triplet,
            bilateration,
            box,
            mse,
            multi
        };

        const char *kind_name(Kind k)
        {
            switch (k)
            {
            case Kind::triplet: return "triplet";
            case Kind::bilateration: return "bilateration";
            case Kind::box: return "box";
            case Kind::mse: return "mse";
            case Kind::multi: return "multi";
            }
            return "?";
        }

        struct Instance
        {
            ChartModel model;
            Matrix x;
            LossConfig config;
            LossBatch batch;
        };

        Instance draw_instance(Kind kind, const GradcheckSettings &s, Rng &rng)
        {
            std::uniform_int_distribution<int> rows_dist(6, s.max_rows);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            Instance in;
            const int n = rows_dist(rng);
            in.model = init_model(s.input_dim, 2, rng());
            // Standard normal inputs: rows are far from parallel, so the chart points do not bunch together.
            std::normal_distribution<double> gauss(0.0, 1.0);
            in.x = Matrix(n, s.input_dim);
            for (int r = 0; r < n; ++r)
                for (int k = 0; k < s.input_dim; ++k)
                    in.x(r, k) = gauss(rng);
            for (auto &layer : in.model.layers)
                for (Eigen::Index k = 0; k < layer.bias.size(); ++k)
                    layer.bias(k) = 0.1 * gauss(rng);
            const Matrix emb0 = forward(in.model, in.x);
            const double scale = std::sqrt(emb0.squaredNorm() / static_cast<double>(emb0.size()));

            auto &b = in.batch;
            std::uniform_int_distribution<int> pick_row(0, n - 1);
            for (int t = 0; t < n; ++t)
            {
                int c = pick_row(rng), f = pick_row(rng);
                while (c == t)
                    c = pick_row(rng);
                while (f == t || f == c)
                    f = pick_row(rng);
                b.triplets.push_back(Triplet{t, c, f});
            }

            const int a_count = 4;
            b.ap_xy = Matrix(a_count, 2);
            for (int a = 0; a < a_count; ++a)
                b.ap_xy.row(a) << scale * (4.0 * unit(rng) - 2.0), scale * (4.0 * unit(rng) - 2.0);
            b.pairs.assign(n, {});
            b.los_sets.assign(n, {});
            b.powers = Matrix(n, a_count);
            for (int r = 0; r < n; ++r)
            {
                for (int a = 0; a < a_count; ++a)
                {
                    b.powers(r, a) = -60.0 * unit(rng);
                    if (unit(rng) < 0.6)
                        b.los_sets[r].push_back(a);
                }
                for (int i : b.los_sets[r])
                    for (int j : b.los_sets[r])
                        if (i != j && unit(rng) < 0.5)
                            b.pairs[r].push_back(ApPair{i, j});
            }
            for (int a = 0; a < a_count; ++a)
            {
                const double cx = scale * (2.0 * unit(rng) - 1.0), cy = scale * (2.0 * unit(rng) - 1.0);
                const double hw = scale * (0.1 + 0.5 * unit(rng)), hh = scale * (0.1 + 0.5 * unit(rng));
                b.boxes.push_back(Rect{cx - hw, cx + hw, cy - hh, cy + hh});
            }
            for (int r = 0; r < n; ++r)
                if (unit(rng) < 0.5)
                    b.labels.push_back(Label{r, Vec2(scale * (2.0 * unit(rng) - 1.0), scale * (2.0 * unit(rng) - 1.0))});
            if (b.labels.empty())
                b.labels.push_back(Label{0, Vec2(scale, -scale)});

            LossConfig &c = in.config;
            c.margin_t = scale * unit(rng);
            c.margin_b = scale * unit(rng);
            c.weight_t = c.weight_bi = c.weight_box = c.weight_mse = 0.0;
            c.box_policy = unit(rng) < 0.5 ? BoxPolicy::strongest_ap : BoxPolicy::all_los_aps;
            switch (kind)
            {
            case Kind::triplet: c.weight_t = 1.0; break;
            case Kind::bilateration: c.weight_bi = 1.0; break;
            case Kind::box: c.weight_box = 1.0; break;
            case Kind::mse: c.weight_mse = 1.0; break;
            case Kind::multi:
                c.weight_t = 0.5 + unit(rng);
                c.weight_bi = 0.5 + unit(rng);
                c.weight_box = 0.5 + unit(rng);
                c.weight_mse = 0.5 + unit(rng);
                break;
            }
            return in;
        }

        // True when every ReLU unit and every loss kink is at least `margin` away from switching.
        bool away_from_kinks(const Instance &in, double margin, double min_distance)
        {
            ForwardCache cache;
            const Matrix emb = forward(in.model, in.x, &cache);
            min_distance *= std::sqrt(emb.squaredNorm() / static_cast<double>(emb.size()));
            for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l)
            {
                const Matrix &z = cache.pre[l];
                if (z.cwiseAbs().minCoeff() < margin)
                    return false;
                // A unit dead on every row, or a row with every unit dead, makes the network collapse
                // rows onto one chart point.
                for (Eigen::Index k = 0; k < z.cols(); ++k)
                    if (z.col(k).maxCoeff() <= 0.0)
                        return false;
                for (Eigen::Index r = 0; r < z.rows(); ++r)
                    if (z.row(r).maxCoeff() <= 0.0)
                        return false;
            }
            const auto &b = in.batch;
            const auto &c = in.config;
            if (c.weight_t > 0.0)
                for (const auto &t : b.triplets)
                {
                    const double dc = (emb.row(t.anchor) - emb.row(t.close)).norm();
                    const double df = (emb.row(t.anchor) - emb.row(t.far)).norm();
                    if (dc < min_distance || df < min_distance || std::abs(dc - df + c.margin_t) < margin)
                        return false;
                }
            if (c.weight_bi > 0.0)
                for (Eigen::Index r = 0; r < emb.rows(); ++r)
                    for (const auto &p : b.pairs[r])
                    {
                        const double dc = (emb.row(r) - b.ap_xy.row(p.close)).norm();
                        const double df = (emb.row(r) - b.ap_xy.row(p.far)).norm();
                        if (dc < min_distance || df < min_distance || std::abs(dc - df + c.margin_b) < margin)
                            return false;
                    }
            if (c.weight_box > 0.0)
                for (Eigen::Index r = 0; r < emb.rows(); ++r)
                    for (const auto &box : b.boxes)
                        for (double edge_gap : {emb(r, 0) - box.x_min, emb(r, 0) - box.x_max, emb(r, 1) - box.y_min,
                                                emb(r, 1) - box.y_max})
                            if (std::abs(edge_gap) < margin)
                                return false;
            return true;
        }

        // Which side of every kink the instance sits on: ReLU signs, hinge activity, box-edge sides.
        std::vector<char> kink_pattern(const Instance &in, const ForwardCache &cache, const Matrix &emb)
        {
            std::vector<char> p;
            for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l)
                for (Eigen::Index k = 0; k < cache.pre[l].size(); ++k)
                    p.push_back(cache.pre[l](k) > 0.0);
            const auto &b = in.batch;
            const auto &c = in.config;
            if (c.weight_t > 0.0)
                for (const auto &t : b.triplets)
                    p.push_back((emb.row(t.anchor) - emb.row(t.close)).norm() -
                                    (emb.row(t.anchor) - emb.row(t.far)).norm() + c.margin_t >
                                0.0);
            if (c.weight_bi > 0.0)
                for (Eigen::Index r = 0; r < emb.rows(); ++r)
                    for (const auto &q : b.pairs[r])
                        p.push_back((emb.row(r) - b.ap_xy.row(q.close)).norm() -
                                        (emb.row(r) - b.ap_xy.row(q.far)).norm() + c.margin_b >
                                    0.0);
            if (c.weight_box > 0.0)
                for (Eigen::Index r = 0; r < emb.rows(); ++r)
                    for (const auto &box : b.boxes)
                    {
                        p.push_back(emb(r, 0) < box.x_min);
                        p.push_back(emb(r, 0) > box.x_max);
                        p.push_back(emb(r, 1) < box.y_min);
                        p.push_back(emb(r, 1) > box.y_max);
                    }
            return p;
        }

        struct InstanceError
        {
            double vector = 0.0;
            double component = 0.0;
        };

        // Relative errors of one instance, or nullopt when some probe crosses a kink.
        std::optional<InstanceError> check_instance(const Instance &in, const GradcheckSettings &s)
        {
            ForwardCache cache;
            const Matrix emb = forward(in.model, in.x, &cache);
            const auto loss = multi_loss(in.config, in.batch, emb);
            const auto analytic = flatten_gradients(backward(in.model, cache, loss.grad));
            const auto pattern = kink_pattern(in, cache, emb);

            ChartModel probe = in.model;
            std::vector<double> theta = flatten_parameters(in.model);
            ForwardCache probe_cache;
            auto probe_loss = [&](double value, std::size_t i) -> std::optional<double> {
                theta[i] = value;
                assign_parameters(probe, theta);
                const Matrix e = forward(probe, in.x, &probe_cache);
                if (kink_pattern(in, probe_cache, e) != pattern)
                    return std::nullopt;
                return multi_loss(in.config, in.batch, e).value;
            };
            std::vector<double> numeric(theta.size());
            for (std::size_t i = 0; i < theta.size(); ++i)
            {
                const double keep = theta[i];
                const auto up = probe_loss(keep + s.step, i);
                const auto down = probe_loss(keep - s.step, i);
                theta[i] = keep;
                if (!up || !down)
                    return std::nullopt;
                numeric[i] = (*up - *down) / (2.0 * s.step);
            }
            const Eigen::Map<const Vector> a(analytic.data(), static_cast<Eigen::Index>(analytic.size()));
            const Eigen::Map<const Vector> n(numeric.data(), static_cast<Eigen::Index>(numeric.size()));
            const double denom = std::max({a.norm(), n.norm(), 1e-300});
            InstanceError e;
            e.vector = (a - n).norm() / denom;
            const double floor = 1e-3 * a.cwiseAbs().maxCoeff();
            for (Eigen::Index i = 0; i < a.size(); ++i)
                e.component = std::max(e.component, std::abs(a(i) - n(i)) /
                                                        std::max({std::abs(a(i)), std::abs(n(i)), floor, 1e-300}));
            return e;
        }
    }

    GradcheckReport run_gradcheck(const GradcheckSettings &settings)
    {
        if (settings.instances < 1 || settings.max_rows < 6 || settings.input_dim < 32)
            throw data_error("gradcheck: need >= 1 instance, >= 6 rows and input dimension >= 32");
        const auto start = std::chrono::steady_clock::now();
        GradcheckReport report;
        for (Kind kind : {Kind::triplet, Kind::bilateration, Kind::box, Kind::mse, Kind::multi})
        {
            GradcheckCase c;
            c.loss = kind_name(kind);
            Rng rng = make_rng(settings.seed, c.loss);
            while (c.instances < settings.instances)
            {
                Instance in = draw_instance(kind, settings, rng);
                const auto err = away_from_kinks(in, settings.kink_margin, settings.min_distance)
                                     ? check_instance(in, settings)
                                     : std::nullopt;
                if (!err)
                {
                    if (++c.redraws > 1000 * settings.instances)
                        throw numerical_error("gradcheck: could not draw instances away from kinks");
                    continue;
                }
                c.max_relative_error = std::max(c.max_relative_error, err->vector);
                c.max_component_error = std::max(c.max_component_error, err->component);
                ++c.instances;
            }
            c.passed = c.max_relative_error < settings.tolerance;
            report.cases.push_back(c);
        }
        report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return report;
    }
}
