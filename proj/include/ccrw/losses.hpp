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
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ccrw/features.hpp"
#include "ccrw/types.hpp"

namespace ccrw
{
    // Value of a loss and its gradient with respect to every embedding row.
    struct LossValue
    {
        double value = 0.0;
        Matrix grad;   // same shape as the embeddings
        std::size_t terms = 0; // size of the normalizing set; 0 means the loss had nothing to act on
    };

    enum class BoxPolicy
    {
        strongest_ap, // only the LoS box of the highest-power AP
        all_los_aps
    };

    struct LossConfig
    {
        double coherence_time = 1.0; // T_c, seconds
        double margin_t = 1.0;       // M_t, chart units
        double margin_b = 1.0;       // M_b, chart units
        double margin_p = 3.0;       // M_p, dB
        double weight_t = 1.0;
        double weight_bi = 1.0;
        double weight_box = 1.0;
        double weight_mse = 0.0;
        BoxPolicy box_policy = BoxPolicy::strongest_ap;

        void validate() const;
    };

    // Anchor n, close-in-time c, far-in-time f.
    struct Triplet
    {
        int anchor = 0;
        int close = 0;
        int far = 0;
    };

    // Draws triplets with 0 < |t_n - t_c| <= T_c < |t_n - t_f| among a time-sorted candidate index set.
    class TripletSampler
    {
    public:
        // `indices` select the samples that may participate; `timestamps` is indexed by sample id.
        TripletSampler(std::span<const double> timestamps, std::vector<int> indices, double coherence_time);

        // One triplet for the given anchor, or nullopt when the anchor has no close or no far candidate.
        template <typename Rng>
        std::optional<Triplet> sample(int anchor, Rng &rng) const;

        bool has_candidates(int anchor) const;
        const std::vector<int> &indices() const { return indices_; }

    private:
        // Positions in time-sorted order. Close candidates: [close_lo, same_lo) and [same_hi, close_hi);
        // far candidates: [0, close_lo) and [close_hi, size).
        struct Ranges
        {
            std::size_t close_lo, same_lo, same_hi, close_hi;
        };
        Ranges ranges(int anchor) const;

        std::vector<double> times_;  // timestamps of indices_, ascending
        std::vector<int> indices_;   // sorted by time
        std::vector<double> all_times_;
        double coherence_time_;
    };

    std::vector<Triplet> sample_triplets(std::span<const double> timestamps, double coherence_time, std::size_t count,
                                         std::uint64_t seed);

    // Mean hinge (||x_n - x_c|| - ||x_n - x_f|| + M_t)^+ over the triplets; indices address embedding rows.
    LossValue triplet_loss(const Matrix &embeddings, std::span<const Triplet> triplets, double margin_t);

    // Hinge on distances to AP pairs, normalized by the total pair count.
    // `pairs[r]` lists the pairs of embedding row r; `ap_xy` is A x D.
    LossValue bilateration_loss(const Matrix &embeddings, const Matrix &ap_xy,
                                std::span<const std::vector<ApPair>> pairs, double margin_b);

    // Squared distance from a point to an axis-aligned box (zero inside).
    double box_distance(const Vec2 &point, const Rect &box);
    Vec2 box_distance_gradient(const Vec2 &point, const Rect &box);

    // Bounding-box loss. `los_sets[r]` and `powers.row(r)` belong to embedding row r.
    LossValue bbox_loss(const Matrix &embeddings, std::span<const std::vector<int>> los_sets, const Matrix &powers,
                        std::span<const Rect> boxes, BoxPolicy policy);

    struct Label
    {
        int row = 0;
        Vec2 position = Vec2::Zero();
    };

    // Mean squared error over the labeled rows.
    LossValue mse_loss(const Matrix &embeddings, std::span<const Label> labels);

    // Everything the multi-loss needs for one batch of embeddings.
    struct LossBatch
    {
        std::vector<Triplet> triplets;
        std::vector<std::vector<ApPair>> pairs; // per row (empty vectors for rows without anchor role)
        std::vector<std::vector<int>> los_sets; // per row
        Matrix powers;                          // rows x A
        Matrix ap_xy;                           // A x D
        std::vector<Rect> boxes;                // per AP
        std::vector<Label> labels;
    };

    struct MultiLossValue
    {
        double value = 0.0;
        Matrix grad;
        std::optional<double> triplet;
        std::optional<double> bilateration;
        std::optional<double> box;
        std::optional<double> mse;
    };

    // lambda_t L_t + lambda_bi L_bi + lambda_box L_box + lambda_mse L_mse; zero-weight terms are not evaluated.
    MultiLossValue multi_loss(const LossConfig &config, const LossBatch &batch, const Matrix &embeddings);

    // --- template implementation ---

    template <typename Rng>
    std::optional<Triplet> TripletSampler::sample(int anchor, Rng &rng) const
    {
        const Ranges r = ranges(anchor);
        const std::size_t left_close = r.same_lo - r.close_lo;
        const std::size_t n_close = left_close + (r.close_hi - r.same_hi);
        const std::size_t n_far = r.close_lo + (times_.size() - r.close_hi);
        if (n_close == 0 || n_far == 0)
            return std::nullopt;

        std::uniform_int_distribution<std::size_t> pick_close(0, n_close - 1);
        std::size_t c = pick_close(rng);
        c = c < left_close ? r.close_lo + c : r.same_hi + (c - left_close);
        std::uniform_int_distribution<std::size_t> pick_far(0, n_far - 1);
        std::size_t f = pick_far(rng);
        if (f >= r.close_lo)
            f = r.close_hi + (f - r.close_lo);
        return Triplet{anchor, indices_[c], indices_[f]};
    }
}
