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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccrw/features.hpp"
#include "ccrw/losses.hpp"
#include "ccrw/net.hpp"
#include "ccrw/sim.hpp"

namespace ccrw
{
    // P1: bilateration + box. P2: triplet + bilateration + box. B1: triplet. B2: triplet, then an affine map
    // fitted on labeled samples. B3: triplet + MSE on a labeled subset. B4: MSE on every training sample.
    enum class Variant
    {
        P1,
        P2,
        B1,
        B2,
        B3,
        B4
    };

    std::string_view variant_name(Variant v);
    // Throws data_error for unknown names.
    Variant parse_variant(std::string_view name);
    bool variant_uses_labels(Variant v);

    struct RunConfig
    {
        Variant variant = Variant::P2;
        LossConfig loss;
        std::optional<double> p_thr; // overrides the feature set's LoS threshold when given
        int label_count = 0;         // |S| for B2/B3; B4 always uses the full training split
        int epochs = 200;
        int batch_size = 256;
        AdamConfig adam;
        std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

        // Loss weights must match the variant: exactly the variant's losses carry positive weight.
        void validate() const;
    };

    // Default loss weights for a variant (1 for every active loss).
    void apply_variant_weights(RunConfig &cfg);

    struct AffineMap
    {
        Matrix a = Matrix::Identity(2, 2);
        Vector b = Vector::Zero(2);
    };

    // Uniform random subset of `train_indices`, sorted ascending.
    std::vector<int> select_labels(std::span<const int> train_indices, int count, std::uint64_t seed);

    // Least-squares affine map from chart points to labels (homogeneous normal equations).
    AffineMap fit_affine(const Matrix &chart_points, const Matrix &labels);
    Matrix apply_affine(const AffineMap &map, const Matrix &points);
    // compose(outer, inner) applies `inner` first.
    AffineMap compose(const AffineMap &outer, const AffineMap &inner);

    struct TrainingLog
    {
        std::vector<std::string> columns; // "epoch", "loss", then one column per active loss
        std::vector<std::vector<double>> rows;
    };

    // Called with every sample index that enters a loss evaluation or the label subset.
    using IndexAudit = std::function<void(std::string_view use, std::span<const int> sample_ids)>;

    struct TrainResult
    {
        ChartModel model;
        std::optional<AffineMap> affine;
        TrainingLog log;
        std::vector<int> labels; // labeled sample ids (B2/B3/B4)
    };

    TrainResult train_variant(const RunConfig &cfg, const FeatureSet &features, const CsiDataset &dataset,
                              std::uint64_t seed, const IndexAudit &audit = {});

    // Chart positions of the given samples (affine map applied when present).
    Matrix predict(const ChartModel &model, const std::optional<AffineMap> &affine, const FeatureSet &features,
                   std::span<const int> sample_ids);

    Matrix positions_xy(const CsiDataset &dataset, std::span<const int> sample_ids);
}
