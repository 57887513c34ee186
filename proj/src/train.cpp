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

#include "ccrw/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SVD>

#include "ccrw/errors.hpp"
#include "ccrw/random.hpp"

namespace ccrw
{
    std::string_view variant_name(Variant v)
    {
        switch (v)
        {
        case Variant::P1: return "P1";
        case Variant::P2: return "P2";
        case Variant::B1: return "B1";
        case Variant::B2: return "B2";
        case Variant::B3: return "B3";
        case Variant::B4: return "B4";
        }
        return "?";
    }

    Variant parse_variant(std::string_view name)
    {
        for (Variant v : {Variant::P1, Variant::P2, Variant::B1, Variant::B2, Variant::B3, Variant::B4})
            if (variant_name(v) == name)
                return v;
        throw data_error("unknown variant '" + std::string(name) + "' (expected P1, P2, B1, B2, B3 or B4)");
    }

    bool variant_uses_labels(Variant v)
    {
        return v == Variant::B2 || v == Variant::B3 || v == Variant::B4;
    }

    namespace
    {
        struct ActiveLosses
        {
            bool triplet, bilateration, box, mse;
        };

        ActiveLosses active_losses(Variant v)
        {
            switch (v)
            {
            case Variant::P1: return {false, true, true, false};
            case Variant::P2: return {true, true, true, false};
            case Variant::B1:
            case Variant::B2: return {true, false, false, false};
            case Variant::B3: return {true, false, false, true};
            case Variant::B4: return {false, false, false, true};
            }
            return {};
        }
    }

    void RunConfig::validate() const
    {
        loss.validate();
        const auto active = active_losses(variant);
        auto check = [this](bool want, double weight, const char *name) {
            if (want != (weight > 0.0))
                throw data_error(std::string("variant ") + std::string(variant_name(variant)) +
                                 (want ? " requires a positive " : " requires a zero ") + name + " weight");
        };
        check(active.triplet, loss.weight_t, "triplet");
        check(active.bilateration, loss.weight_bi, "bilateration");
        check(active.box, loss.weight_box, "bounding-box");
        check(active.mse, loss.weight_mse, "MSE");
        if ((variant == Variant::B2 || variant == Variant::B3) && label_count <= 0)
            throw data_error("variants B2 and B3 need a positive label count");
        if (epochs < 0)
            throw data_error("epoch count must be nonnegative");
        if (batch_size < 1)
            throw data_error("batch size must be positive");
        if (!(adam.learning_rate > 0.0))
            throw data_error("learning rate must be positive");
        if (seeds.empty())
            throw data_error("at least one seed is required");
    }

    void apply_variant_weights(RunConfig &cfg)
    {
        const auto active = active_losses(cfg.variant);
        cfg.loss.weight_t = active.triplet ? 1.0 : 0.0;
        cfg.loss.weight_bi = active.bilateration ? 1.0 : 0.0;
        cfg.loss.weight_box = active.box ? 1.0 : 0.0;
        cfg.loss.weight_mse = active.mse ? 1.0 : 0.0;
    }

    std::vector<int> select_labels(std::span<const int> train_indices, int count, std::uint64_t seed)
    {
        if (count <= 0)
            throw data_error("select_labels: label count must be positive");
        if (static_cast<std::size_t>(count) > train_indices.size())
            throw data_error("select_labels: label count " + std::to_string(count) + " exceeds the training set size " +
                             std::to_string(train_indices.size()));
        std::vector<int> pool(train_indices.begin(), train_indices.end());
        auto rng = make_rng(seed, "labels");
        // Partial Fisher-Yates: the first `count` entries form a uniform random subset.
        for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i)
        {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        pool.resize(static_cast<std::size_t>(count));
        std::sort(pool.begin(), pool.end());
        return pool;
    }

    AffineMap fit_affine(const Matrix &chart_points, const Matrix &labels)
    {
        if (chart_points.rows() != labels.rows() || chart_points.cols() != labels.cols())
            throw data_error("fit_affine: chart points and labels differ in shape");
        const auto d = chart_points.cols();
        if (chart_points.rows() < d + 1)
            throw data_error("degenerate label geometry: need at least D+1 labeled points");
        Matrix x(chart_points.rows(), d + 1);
        x.leftCols(d) = chart_points;
        x.col(d).setOnes();

        const Eigen::JacobiSVD<Matrix> svd(x);
        const auto &sv = svd.singularValues();
        if (!(sv(sv.size() - 1) > 1e-10 * sv(0)))
            throw data_error("degenerate label geometry");

        // theta is (D+1) x D; the map is x_hat = A p + b with A = theta_top^T, b = theta_last.
        const Matrix normal = x.transpose() * x;
        const Matrix theta = normal.ldlt().solve(x.transpose() * labels);
        AffineMap m;
        m.a = theta.topRows(d).transpose();
        m.b = theta.row(d).transpose();
        if (!m.a.allFinite() || !m.b.allFinite())
            throw numerical_error("fit_affine: non-finite solution");
        return m;
    }

    Matrix apply_affine(const AffineMap &map, const Matrix &points)
    {
        Matrix out = points * map.a.transpose();
        out.rowwise() += map.b.transpose();
        return out;
    }

    AffineMap compose(const AffineMap &outer, const AffineMap &inner)
    {
        AffineMap m;
        m.a = outer.a * inner.a;
        m.b = outer.a * inner.b + outer.b;
        return m;
    }

    Matrix positions_xy(const CsiDataset &dataset, std::span<const int> sample_ids)
    {
        if (!dataset.has_positions)
            throw data_error("dataset has no ground-truth positions");
        Matrix out(static_cast<Eigen::Index>(sample_ids.size()), 2);
        for (std::size_t k = 0; k < sample_ids.size(); ++k)
            out.row(static_cast<Eigen::Index>(k)) = dataset.samples.at(sample_ids[k]).position.head<2>().transpose();
        return out;
    }

    Matrix predict(const ChartModel &model, const std::optional<AffineMap> &affine, const FeatureSet &features,
                   std::span<const int> sample_ids)
    {
        Matrix x(static_cast<Eigen::Index>(sample_ids.size()), features.features.cols());
        for (std::size_t k = 0; k < sample_ids.size(); ++k)
            x.row(static_cast<Eigen::Index>(k)) = features.features.row(sample_ids[k]);
        Matrix y = forward(model, x);
        return affine ? apply_affine(*affine, y) : y;
    }

    namespace
    {
        void check_consistency(const FeatureSet &fs, const CsiDataset &ds)
        {
            if (fs.size() != ds.size())
                throw data_error("feature set and dataset differ in sample count");
            if (fs.ap_count() != ds.ap_count || static_cast<int>(ds.aps.size()) != ds.ap_count)
                throw data_error("feature set and dataset differ in AP count");
            if (ds.is_train.size() != ds.size())
                throw data_error("dataset has no train/test split");
            for (std::size_t n = 0; n < ds.size(); ++n)
                if (fs.timestamps[n] != ds.samples[n].timestamp)
                    throw data_error("feature set timestamps do not match the dataset");
            if (!fs.dataset_hash.empty() && !ds.config_hash.empty() && fs.dataset_hash != ds.config_hash)
                throw data_error("feature set was built from a different dataset");
        }

        // Gathers per-row inputs of the losses for the rows of one minibatch.
        struct BatchBuilder
        {
            std::vector<int> local; // sample id -> batch row, -1 when absent
            std::vector<int> rows;  // batch row -> sample id

            int row_of(int id)
            {
                if (local[id] < 0)
                {
                    local[id] = static_cast<int>(rows.size());
                    rows.push_back(id);
                }
                return local[id];
            }

            void reset()
            {
                for (int id : rows)
                    local[id] = -1;
                rows.clear();
            }
        };
    }

    TrainResult train_variant(const RunConfig &cfg, const FeatureSet &features, const CsiDataset &dataset,
                              std::uint64_t seed, const IndexAudit &audit)
    {
        cfg.validate();
        check_consistency(features, dataset);
        const auto active = active_losses(cfg.variant);
        if (variant_uses_labels(cfg.variant) && !dataset.has_positions)
            throw data_error(std::string("variant ") + std::string(variant_name(cfg.variant)) +
                             " needs ground-truth positions, but the dataset is label-free");

        // Pair and LoS labels follow the run's threshold and margin.
        FeatureSet fs_local;
        const FeatureSet *fs = &features;
        const double p_thr = cfg.p_thr.value_or(features.p_thr);
        if (p_thr != features.p_thr || cfg.loss.margin_p != features.m_p)
        {
            fs_local = features;
            relabel(fs_local, p_thr, cfg.loss.margin_p);
            fs = &fs_local;
        }

        const std::vector<int> train = dataset.train_indices();
        if (train.empty())
            throw data_error("training split is empty");

        TrainResult result;
        if (cfg.variant == Variant::B4)
            result.labels = train;
        else if (cfg.variant == Variant::B3)
            result.labels = select_labels(train, cfg.label_count, seed);
        if (audit && !result.labels.empty())
            audit("labels", result.labels);

        const Eigen::Index a_count = dataset.ap_count;
        Matrix ap_xy(a_count, 2);
        std::vector<Rect> boxes;
        for (Eigen::Index a = 0; a < a_count; ++a)
        {
            ap_xy.row(a) = dataset.aps[a].position.head<2>().transpose();
            boxes.push_back(dataset.aps[a].los_box);
        }

        std::vector<char> is_label(dataset.size(), 0);
        for (int id : result.labels)
            is_label[id] = 1;
        // Small label sets join every step; larger ones only through the anchors they cover.
        const bool labels_every_step =
            active.mse && static_cast<int>(result.labels.size()) <= cfg.batch_size && cfg.variant != Variant::B4;

        result.log.columns = {"epoch", "loss"};
        if (active.triplet)
            result.log.columns.push_back("triplet");
        if (active.bilateration)
            result.log.columns.push_back("bilateration");
        if (active.box)
            result.log.columns.push_back("box");
        if (active.mse)
            result.log.columns.push_back("mse");

        ChartModel model = init_model(features.dimension(), 2, seed);
        AdamState adam = AdamState::for_model(model, cfg.adam);
        const TripletSampler sampler(fs->timestamps, train, cfg.loss.coherence_time);
        auto rng = make_rng(seed, "train");

        BatchBuilder bb{std::vector<int>(dataset.size(), -1), {}};
        std::vector<int> order = train;
        ForwardCache cache;

        for (int epoch = 0; epoch < cfg.epochs; ++epoch)
        {
            std::shuffle(order.begin(), order.end(), rng);
            double sum_total = 0.0, sum_t = 0.0, sum_bi = 0.0, sum_box = 0.0, sum_mse = 0.0;
            int n_total = 0, n_t = 0, n_bi = 0, n_box = 0, n_mse = 0;

            for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size))
            {
                const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
                bb.reset();
                LossBatch batch;
                LossConfig step_cfg = cfg.loss;

                for (std::size_t k = start; k < stop; ++k)
                    bb.row_of(order[k]);
                const std::size_t anchor_rows = bb.rows.size();

                if (active.triplet)
                {
                    for (std::size_t k = start; k < stop; ++k)
                        if (auto t = sampler.sample(order[k], rng))
                            batch.triplets.push_back(
                                Triplet{bb.row_of(t->anchor), bb.row_of(t->close), bb.row_of(t->far)});
                    if (batch.triplets.empty())
                        step_cfg.weight_t = 0.0;
                }
                if (active.mse)
                {
                    if (labels_every_step)
                        for (int id : result.labels)
                            bb.row_of(id);
                    for (std::size_t r = 0; r < bb.rows.size(); ++r)
                    {
                        const int id = bb.rows[r];
                        if (is_label[id] && (labels_every_step || r < anchor_rows))
                            batch.labels.push_back(
                                Label{static_cast<int>(r), dataset.samples[id].position.head<2>()});
                    }
                }

                const auto rows = static_cast<Eigen::Index>(bb.rows.size());
                if (active.bilateration || active.box)
                {
                    batch.pairs.assign(bb.rows.size(), {});
                    batch.los_sets.assign(bb.rows.size(), {});
                    batch.powers = Matrix::Zero(rows, a_count);
                    for (std::size_t r = 0; r < anchor_rows; ++r)
                    {
                        const int id = bb.rows[r];
                        batch.pairs[r] = fs->ap_pairs[id];
                        batch.los_sets[r] = fs->los_sets[id];
                        batch.powers.row(static_cast<Eigen::Index>(r)) = fs->powers.row(id);
                    }
                    batch.ap_xy = ap_xy;
                    batch.boxes = boxes;
                }
                if (step_cfg.weight_t == 0.0 && step_cfg.weight_bi == 0.0 && step_cfg.weight_box == 0.0 &&
                    batch.labels.empty())
                    continue;
                if (audit)
                    audit("batch", bb.rows);

                Matrix x(rows, fs->features.cols());
                for (Eigen::Index r = 0; r < rows; ++r)
                    x.row(r) = fs->features.row(bb.rows[static_cast<std::size_t>(r)]);
                const Matrix emb = forward(model, x, &cache);
                const MultiLossValue loss = multi_loss(step_cfg, batch, emb);
                if (!std::isfinite(loss.value))
                    throw numerical_error("training loss became non-finite");
                adam_step(model, backward(model, cache, loss.grad), adam);

                sum_total += loss.value;
                ++n_total;
                if (loss.triplet) { sum_t += *loss.triplet; ++n_t; }
                if (loss.bilateration) { sum_bi += *loss.bilateration; ++n_bi; }
                if (loss.box) { sum_box += *loss.box; ++n_box; }
                if (loss.mse) { sum_mse += *loss.mse; ++n_mse; }
            }

            auto mean = [](double s, int n) { return n > 0 ? s / n : std::nan(""); };
            std::vector<double> row{static_cast<double>(epoch + 1), mean(sum_total, n_total)};
            if (active.triplet)
                row.push_back(mean(sum_t, n_t));
            if (active.bilateration)
                row.push_back(mean(sum_bi, n_bi));
            if (active.box)
                row.push_back(mean(sum_box, n_box));
            if (active.mse)
                row.push_back(mean(sum_mse, n_mse));
            result.log.rows.push_back(std::move(row));
        }

        if (cfg.variant == Variant::B2)
        {
            result.labels = select_labels(train, cfg.label_count, seed);
            if (audit)
                audit("labels", result.labels);
            result.affine = fit_affine(predict(model, std::nullopt, *fs, result.labels),
                                       positions_xy(dataset, result.labels));
        }
        result.model = std::move(model);
        return result;
    }
}
