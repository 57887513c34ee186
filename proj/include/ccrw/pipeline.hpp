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

#include <optional>
#include <string>
#include <vector>

#include "ccrw/features.hpp"
#include "ccrw/metrics.hpp"
#include "ccrw/presets.hpp"
#include "ccrw/sim.hpp"
#include "ccrw/train.hpp"

namespace ccrw
{
    struct ReproduceOptions
    {
        std::string preset = "indoor-lite";
        int seeds = 3;                   // first k seeds of each run configuration
        std::string out_dir;             // nothing is written when empty
        std::optional<int> epochs;       // overrides the preset's epoch budget
        std::vector<Variant> variants{Variant::P1, Variant::P2, Variant::B1, Variant::B2, Variant::B3, Variant::B4};
    };

    struct VariantOutcome
    {
        Variant variant = Variant::P2;
        MetricsReport report;
        std::vector<TrainResult> runs; // one per seed
    };

    // LoS and AP-pair diagnostics of the feature set against simulator ground truth.
    struct FeatureDiagnostics
    {
        double los_agreement = 0.0; // fraction of (sample, AP) flags matching ground truth
        double false_pair_ratio = 0.0;
        double mean_pair_count = 0.0;
    };

    struct ReproduceResult
    {
        Preset preset;
        CsiDataset dataset;
        FeatureSet features;
        FeatureDiagnostics diagnostics;
        std::vector<VariantOutcome> outcomes;
        double area_diagonal = 0.0;
        std::string table;
        std::string metrics_json;
    };

    FeatureDiagnostics diagnose_features(const FeatureSet &fs, const CsiDataset &ds);

    // Test-split metrics of one trained model.
    MetricValues evaluate_model(const ChartModel &model, const std::optional<AffineMap> &affine, const FeatureSet &fs,
                                const CsiDataset &ds);

    // Simulate the preset, build features, train every variant for each seed and evaluate on the test split.
    // With an output directory it writes dataset/, features.ccf, models/, charts/, logs/, metrics.json, table.txt.
    ReproduceResult reproduce(const ReproduceOptions &options);

    // Tables II-IV style text table: method, TW, CT, KS, RD, MDE and e95 (mean +- std over seeds).
    std::string format_table(const std::vector<VariantOutcome> &outcomes);
}
