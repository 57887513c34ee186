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

#include "ccrw/losses.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include <spdlog/spdlog.h>

#include "ccrw/errors.hpp"
#include "ccrw/random.hpp"

namespace ccrw
{
    namespace
    {
        // Unit vector along v, zero at the origin (subgradient of the norm).
        template <typename V>
        auto unit_or_zero(const V &v)
        {
            using Plain = typename V::PlainObject;
            const double n = v.norm();
            return n > 0.0 ? Plain(v / n) : Plain(Plain::Zero(v.rows(), v.cols()));
        }

        void warn_once(std::once_flag &flag, const char *msg)
        {
            std::call_once(flag, [msg] { spdlog::warn("{}", msg); });
        }

        std::once_flag warned_no_pairs;
        std::once_flag warned_no_los;
    }

    void LossConfig::validate() const
    {
        if (!(coherence_time > 0.0))
            throw data_error("coherence time T_c must be positive");
        if (margin_t < 0.0 || margin_b < 0.0 || margin_p < 0.0)
            throw data_error("loss margins must be nonnegative");
        if (weight_t < 0.0 || weight_bi < 0.0 || weight_box < 0.0 || weight_mse < 0.0)
            throw data_error("loss weights must be nonnegative");
    }

    TripletSampler::TripletSampler(std::span<const double> timestamps, std::vector<int> indices, double coherence_time)
        : indices_(std::move(indices)), all_times_(timestamps.begin(), timestamps.end()), coherence_time_(coherence_time)
    {
        if (!(coherence_time > 0.0))
            throw data_error("coherence time T_c must be positive");
        for (int i : indices_)
            if (i < 0 || static_cast<std::size_t>(i) >= all_times_.size())
                throw data_error("triplet sampler: index out of range");
        std::stable_sort(indices_.begin(), indices_.end(),
                         [this](int a, int b) { return all_times_[a] < all_times_[b]; });
        times_.reserve(indices_.size());
        for (int i : indices_)
            times_.push_back(all_times_[i]);
    }

    TripletSampler::Ranges TripletSampler::ranges(int anchor) const
    {
        const double t = all_times_.at(anchor);
        const double tc = coherence_time_;
        auto first = [this](auto pred) {
            return static_cast<std::size_t>(std::partition_point(times_.begin(), times_.end(), pred) - times_.begin());
        };
        // Same expressions as the defining inequality, so boundary rounding agrees with a post-hoc check.
        Ranges r{};
        r.close_lo = first([&](double ti) { return t - ti > tc; });
        r.same_lo = first([&](double ti) { return t - ti > 0.0; });
        r.same_hi = first([&](double ti) { return ti - t <= 0.0; });
        r.close_hi = first([&](double ti) { return ti - t <= tc; });
        return r;
    }

    bool TripletSampler::has_candidates(int anchor) const
    {
        const Ranges r = ranges(anchor);
        const std::size_t n_close = (r.same_lo - r.close_lo) + (r.close_hi - r.same_hi);
        const std::size_t n_far = r.close_lo + (times_.size() - r.close_hi);
        return n_close > 0 && n_far > 0;
    }

    std::vector<Triplet> sample_triplets(std::span<const double> timestamps, double coherence_time, std::size_t count,
                                         std::uint64_t seed)
    {
        if (timestamps.size() < 3)
            throw data_error("sample_triplets: need at least three samples");
        std::vector<int> all(timestamps.size());
        std::iota(all.begin(), all.end(), 0);
        const TripletSampler sampler(timestamps, all, coherence_time);

        std::vector<int> anchors;
        for (int n : all)
            if (sampler.has_candidates(n))
                anchors.push_back(n);
        if (anchors.empty())
            throw data_error("sample_triplets: no valid triplet exists for this coherence time");

        Rng rng = make_rng(seed, "triplets");
        std::uniform_int_distribution<std::size_t> pick(0, timestamps.size() - 1);
        std::vector<Triplet> out;
        out.reserve(count);
        while (out.size() < count)
        {
            // Anchors without candidates are rejected and redrawn.
            const int n = static_cast<int>(pick(rng));
            if (auto t = sampler.sample(n, rng))
                out.push_back(*t);
        }
        return out;
    }

    LossValue triplet_loss(const Matrix &embeddings, std::span<const Triplet> triplets, double margin_t)
    {
        if (triplets.empty())
            throw data_error("triplet_loss: empty triplet batch");
        LossValue out;
        out.grad = Matrix::Zero(embeddings.rows(), embeddings.cols());
        out.terms = triplets.size();
        const double inv = 1.0 / static_cast<double>(triplets.size());
        for (const auto &t : triplets)
        {
            const Vector dc = (embeddings.row(t.anchor) - embeddings.row(t.close)).transpose();
            const Vector df = (embeddings.row(t.anchor) - embeddings.row(t.far)).transpose();
            const double hinge = dc.norm() - df.norm() + margin_t;
            if (!(hinge > 0.0))
                continue;
            out.value += hinge * inv;
            const Vector uc = unit_or_zero(dc) * inv;
            const Vector uf = unit_or_zero(df) * inv;
            out.grad.row(t.anchor) += (uc - uf).transpose();
            out.grad.row(t.close) -= uc.transpose();
            out.grad.row(t.far) += uf.transpose();
        }
        return out;
    }

    LossValue bilateration_loss(const Matrix &embeddings, const Matrix &ap_xy,
                                std::span<const std::vector<ApPair>> pairs, double margin_b)
    {
        if (pairs.size() != static_cast<std::size_t>(embeddings.rows()))
            throw data_error("bilateration_loss: one pair list per embedding row is required");
        if (ap_xy.cols() != embeddings.cols())
            throw data_error("bilateration_loss: AP coordinates must be truncated to the chart dimension");
        LossValue out;
        out.grad = Matrix::Zero(embeddings.rows(), embeddings.cols());
        for (const auto &p : pairs)
            out.terms += p.size();
        if (out.terms == 0)
        {
            warn_once(warned_no_pairs, "bilateration_loss: no AP pairs in batch; loss is 0");
            return out;
        }
        const double inv = 1.0 / static_cast<double>(out.terms);
        for (std::size_t r = 0; r < pairs.size(); ++r)
        {
            const auto row = static_cast<Eigen::Index>(r);
            for (const auto &p : pairs[r])
            {
                const Vector dc = (embeddings.row(row) - ap_xy.row(p.close)).transpose();
                const Vector df = (embeddings.row(row) - ap_xy.row(p.far)).transpose();
                const double hinge = dc.norm() - df.norm() + margin_b;
                if (!(hinge > 0.0))
                    continue;
                out.value += hinge * inv;
                out.grad.row(row) += ((unit_or_zero(dc) - unit_or_zero(df)) * inv).transpose();
            }
        }
        return out;
    }

    double box_distance(const Vec2 &point, const Rect &box)
    {
        double d = 0.0;
        if (point.x() < box.x_min || point.x() > box.x_max)
            d += std::min(std::pow(box.x_min - point.x(), 2), std::pow(box.x_max - point.x(), 2));
        if (point.y() < box.y_min || point.y() > box.y_max)
            d += std::min(std::pow(box.y_min - point.y(), 2), std::pow(box.y_max - point.y(), 2));
        return d;
    }

    Vec2 box_distance_gradient(const Vec2 &point, const Rect &box)
    {
        const Vec2 clipped(std::clamp(point.x(), box.x_min, box.x_max), std::clamp(point.y(), box.y_min, box.y_max));
        return 2.0 * (point - clipped);
    }

    LossValue bbox_loss(const Matrix &embeddings, std::span<const std::vector<int>> los_sets, const Matrix &powers,
                        std::span<const Rect> boxes, BoxPolicy policy)
    {
        if (embeddings.cols() != 2)
            throw data_error("bbox_loss: rectangular boxes require a two-dimensional chart");
        if (los_sets.size() != static_cast<std::size_t>(embeddings.rows()))
            throw data_error("bbox_loss: one LoS set per embedding row is required");
        if (policy == BoxPolicy::strongest_ap && powers.rows() != embeddings.rows())
            throw data_error("bbox_loss: strongest-AP policy needs per-row powers");

        LossValue out;
        out.grad = Matrix::Zero(embeddings.rows(), embeddings.cols());

        // (row, ap) terms that enter the sum
        std::vector<std::pair<Eigen::Index, int>> active;
        for (std::size_t r = 0; r < los_sets.size(); ++r)
        {
            const auto &set = los_sets[r];
            if (set.empty())
                continue;
            const auto row = static_cast<Eigen::Index>(r);
            if (policy == BoxPolicy::all_los_aps)
            {
                for (int a : set)
                    active.emplace_back(row, a);
            }
            else
            {
                int best = set.front();
                for (int a : set)
                    if (powers(row, a) > powers(row, best))
                        best = a;
                active.emplace_back(row, best);
            }
        }
        out.terms = active.size();
        if (active.empty())
        {
            warn_once(warned_no_los, "bbox_loss: no LoS APs in batch; loss is 0");
            return out;
        }
        const double inv = 1.0 / static_cast<double>(active.size());
        for (const auto &[row, a] : active)
        {
            const Vec2 x = embeddings.row(row).transpose();
            const Rect &box = boxes[static_cast<std::size_t>(a)];
            out.value += box_distance(x, box) * inv;
            out.grad.row(row) += (box_distance_gradient(x, box) * inv).transpose();
        }
        return out;
    }

    LossValue mse_loss(const Matrix &embeddings, std::span<const Label> labels)
    {
        if (labels.empty())
            throw data_error("mse_loss: empty label set");
        if (embeddings.cols() != 2)
            throw data_error("mse_loss: labels are two-dimensional");
        LossValue out;
        out.grad = Matrix::Zero(embeddings.rows(), embeddings.cols());
        out.terms = labels.size();
        const double inv = 1.0 / static_cast<double>(labels.size());
        for (const auto &l : labels)
        {
            const Vec2 diff = embeddings.row(l.row).transpose() - l.position;
            out.value += diff.squaredNorm() * inv;
            out.grad.row(l.row) += (2.0 * inv * diff).transpose();
        }
        return out;
    }

    MultiLossValue multi_loss(const LossConfig &config, const LossBatch &batch, const Matrix &embeddings)
    {
        config.validate();
        if (config.weight_t == 0.0 && config.weight_bi == 0.0 && config.weight_box == 0.0 && config.weight_mse == 0.0)
            throw data_error("multi_loss: all loss weights are zero");

        MultiLossValue out;
        out.grad = Matrix::Zero(embeddings.rows(), embeddings.cols());
        auto accumulate = [&](double weight, const LossValue &v) {
            out.value += weight * v.value;
            out.grad += weight * v.grad;
        };
        if (config.weight_t > 0.0)
        {
            const auto v = triplet_loss(embeddings, batch.triplets, config.margin_t);
            accumulate(config.weight_t, v);
            out.triplet = v.value;
        }
        if (config.weight_bi > 0.0)
        {
            const auto v = bilateration_loss(embeddings, batch.ap_xy, batch.pairs, config.margin_b);
            accumulate(config.weight_bi, v);
            out.bilateration = v.value;
        }
        if (config.weight_box > 0.0)
        {
            const auto v = bbox_loss(embeddings, batch.los_sets, batch.powers, batch.boxes, config.box_policy);
            accumulate(config.weight_box, v);
            out.box = v.value;
        }
        if (config.weight_mse > 0.0 && !batch.labels.empty())
        {
            const auto v = mse_loss(embeddings, batch.labels);
            accumulate(config.weight_mse, v);
            out.mse = v.value;
        }
        return out;
    }
}
