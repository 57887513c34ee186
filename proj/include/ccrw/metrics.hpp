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
#include <vector>

#include "ccrw/types.hpp"

namespace ccrw
{
    // ranks[n][j] is the neighbor rank (1..N-1) of point j as seen from point n, by ascending Euclidean
    // distance with ties broken by ascending index; ranks[n][n] is 0.
    using RankTable = std::vector<std::vector<int>>;

    RankTable knn_ranks(const Matrix &points);

    // J = floor(0.05 N), at least 1.
    int default_neighbor_count(std::size_t n);

    double trustworthiness(const Matrix &real, const Matrix &latent, int neighbors);
    double continuity(const Matrix &real, const Matrix &latent, int neighbors);

    // Scale applied to the real-space distances that minimizes the stress.
    double optimal_stress_scale(const Matrix &real, const Matrix &latent);
    // Stress for a given scale; kruskal_stress() evaluates it at the optimal scale.
    double kruskal_stress_at(const Matrix &real, const Matrix &latent, double scale);
    double kruskal_stress(const Matrix &real, const Matrix &latent);

    // Each pairwise-distance multiset is quantized into `bins` uniform bins over [0, max].
    double rajski_distance(const Matrix &real, const Matrix &latent, int bins = 20);

    std::vector<double> distance_errors(const Matrix &estimate, const Matrix &truth);
    double mean_distance_error(const Matrix &estimate, const Matrix &truth);

    // Smallest error value with at least ceil(0.95 N) errors strictly below it; when no error value
    // qualifies (e.g. all errors equal) the next double above the largest error is returned.
    double percentile95_error(const Matrix &estimate, const Matrix &truth);

    struct MetricValues
    {
        double tw = 0.0;
        double ct = 0.0;
        double ks = 0.0;
        double rd = 0.0;
        double mde = 0.0;
        double e95 = 0.0;
    };

    struct MetricsReport
    {
        std::vector<MetricValues> per_seed;
        MetricValues mean;
        MetricValues std; // population standard deviation across seeds
        int neighbors = 0;
        int bins = 20;
    };

    // All six metrics for one chart. `real` and `latent` are N x 2.
    MetricValues evaluate_chart(const Matrix &real, const Matrix &latent, std::optional<int> neighbors = std::nullopt,
                                int bins = 20);

    MetricsReport aggregate(std::span<const MetricValues> per_seed, int neighbors = 0, int bins = 20);
}
