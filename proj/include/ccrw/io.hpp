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
#include <span>
#include <string>
#include <vector>

#include "ccrw/features.hpp"
#include "ccrw/metrics.hpp"
#include "ccrw/net.hpp"
#include "ccrw/sim.hpp"
#include "ccrw/train.hpp"

namespace ccrw
{
    inline constexpr int dataset_schema_version = 1;
    inline constexpr int artifact_schema_version = 1;

    // Directory with manifest.json and little-endian payloads: csi.bin (float32 re/im interleaved, sample-major,
    // then row-major per sample), positions.bin (float64 N x 3), timestamps.bin (float64 N), and when present
    // split.bin (uint8 N, 1 = train) and los.bin (uint8 N x A).
    void save_dataset(const CsiDataset &ds, const std::string &dir);
    // Throws checksum_error, version_error or truncated_error for the corresponding defects.
    CsiDataset load_dataset(const std::string &dir);

    // Writes `ds` in the generic external layout read by ingest_external(): descriptor.json plus flat arrays.
    void export_external(const CsiDataset &ds, const std::string &dir);
    // Reads a JSON descriptor that names flat binary arrays (paths relative to the descriptor).
    CsiDataset ingest_external(const std::string &descriptor_path);

    // Single-file artifacts: one JSON header line, then a binary payload whose size and CRC-32 the header records.
    void save_features(const FeatureSet &fs, const std::string &path);
    FeatureSet load_features(const std::string &path);

    struct Checkpoint
    {
        ChartModel model;
        std::optional<AffineMap> affine;
        std::string variant;
        std::string run_config_hash;
        std::string dataset_hash;
        double p_thr = 0.0;
        double m_p = 0.0;
    };

    void save_checkpoint(const Checkpoint &ckpt, const std::string &path);
    Checkpoint load_checkpoint(const std::string &path);

    // CSV "n,x1,x2" with values at 9 significant digits.
    void export_chart(std::span<const int> sample_ids, const Matrix &points, const std::string &path);
    struct ChartCsv
    {
        std::vector<int> sample_ids;
        Matrix points;
    };
    ChartCsv read_chart_csv(const std::string &path);

    // CSV "t,ap0,...,ap{A-1}" of receive powers in dB.
    void export_power_trace(const Matrix &powers, std::span<const double> timestamps, const std::string &path);

    void write_training_log(const TrainingLog &log, const std::string &path);

    // Per-seed and aggregated metrics as JSON text (deterministic formatting).
    std::string metrics_json(const MetricsReport &report);
    void write_text(const std::string &path, const std::string &text);
}
