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

#include "ccrw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ccrw/errors.hpp"

namespace ccrw
{
    namespace
    {
        // Fills rank[j] for all j != n (rank[n] = 0). `order` is scratch space.
        void row_ranks(const Matrix &points, Eigen::Index n, std::vector<int> &rank, std::vector<int> &order,
                       std::vector<double> &dist)
        {
            const auto count = points.rows();
            for (Eigen::Index j = 0; j < count; ++j)
                dist[j] = (points.row(j) - points.row(n)).squaredNorm();
            order.clear();
            for (Eigen::Index j = 0; j < count; ++j)
                if (j != n)
                    order.push_back(static_cast<int>(j));
            std::sort(order.begin(), order.end(), [&dist](int a, int b) {
                return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
            });
            rank[n] = 0;
            for (std::size_t k = 0; k < order.size(); ++k)
                rank[order[k]] = static_cast<int>(k) + 1;
        }

        void check_pair(const Matrix &real, const Matrix &latent)
        {
            if (real.rows() != latent.rows())
                throw data_error("metrics: real and latent point sets differ in size");
            if (real.rows() < 2)
                throw data_error("metrics: need at least two points");
        }

        // Sum of (rank - J) over points inside the J-neighborhood in `judge_space` but outside it in
        // `penalty_space`, with rank taken in `penalty_space`.
        double neighborhood_penalty(const Matrix &penalty_space, const Matrix &judge_space, int neighbors)
        {
            const auto n_points = penalty_space.rows();
            std::vector<int> r_pen(n_points), r_judge(n_points), order;
            std::vector<double> dist(n_points);
            order.reserve(n_points);
            double sum = 0.0;
            for (Eigen::Index n = 0; n < n_points; ++n)
            {
                row_ranks(penalty_space, n, r_pen, order, dist);
                row_ranks(judge_space, n, r_judge, order, dist);
                for (Eigen::Index j = 0; j < n_points; ++j)
                    if (j != n && r_judge[j] <= neighbors && r_pen[j] > neighbors)
                        sum += static_cast<double>(r_pen[j] - neighbors);
            }
            return sum;
        }

        double gamma_factor(std::size_t n_points, int neighbors)
        {
            const double n = static_cast<double>(n_points);
            const double j = static_cast<double>(neighbors);
            if (neighbors < 1 || !(3.0 * j < 2.0 * n - 1.0))
                throw data_error("neighbor count J must satisfy 1 <= J < (2N - 1) / 3");
            return 2.0 / (n * j * (2.0 * n - 3.0 * j - 1.0));
        }

        std::vector<double> pairwise_distances(const Matrix &points)
        {
            const auto n = points.rows();
            std::vector<double> d;
            d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = i + 1; j < n; ++j)
                    d.push_back((points.row(i) - points.row(j)).norm());
            return d;
        }

        std::vector<int> quantize(const std::vector<double> &d, int bins)
        {
            const double mx = d.empty() ? 0.0 : *std::max_element(d.begin(), d.end());
            std::vector<int> q(d.size(), 0);
            if (mx > 0.0)
                for (std::size_t k = 0; k < d.size(); ++k)
                    q[k] = std::min(bins - 1, static_cast<int>(std::floor(d[k] / mx * bins)));
            return q;
        }
    }

    RankTable knn_ranks(const Matrix &points)
    {
        const auto n = points.rows();
        if (n < 2)
            throw data_error("knn_ranks: need at least two points");
        RankTable table(n, std::vector<int>(n, 0));
        std::vector<int> order;
        std::vector<double> dist(n);
        for (Eigen::Index i = 0; i < n; ++i)
            row_ranks(points, i, table[i], order, dist);
        return table;
    }

    int default_neighbor_count(std::size_t n)
    {
        return std::max(1, static_cast<int>(std::floor(0.05 * static_cast<double>(n))));
    }

    double trustworthiness(const Matrix &real, const Matrix &latent, int neighbors)
    {
        check_pair(real, latent);
        const double gamma = gamma_factor(real.rows(), neighbors);
        // Latent neighbors that are not real neighbors, penalized by their real-space rank.
        return 1.0 - gamma * neighborhood_penalty(real, latent, neighbors);
    }

    double continuity(const Matrix &real, const Matrix &latent, int neighbors)
    {
        check_pair(real, latent);
        const double gamma = gamma_factor(real.rows(), neighbors);
        return 1.0 - gamma * neighborhood_penalty(latent, real, neighbors);
    }

    double optimal_stress_scale(const Matrix &real, const Matrix &latent)
    {
        check_pair(real, latent);
        double cross = 0.0;
        double real_sq = 0.0;
        const auto n = real.rows();
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j)
            {
                const double dr = (real.row(i) - real.row(j)).norm();
                const double dl = (latent.row(i) - latent.row(j)).norm();
                cross += dl * dr;
                real_sq += dr * dr;
            }
        return real_sq > 0.0 ? cross / real_sq : 0.0;
    }

    double kruskal_stress_at(const Matrix &real, const Matrix &latent, double scale)
    {
        check_pair(real, latent);
        double num = 0.0;
        double den = 0.0;
        const auto n = real.rows();
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j)
            {
                const double dr = (real.row(i) - real.row(j)).norm();
                const double dl = (latent.row(i) - latent.row(j)).norm();
                num += (dl - scale * dr) * (dl - scale * dr);
                den += dl * dl;
            }
        if (!(den > 0.0))
            throw numerical_error("kruskal_stress: latent points all coincide");
        return std::sqrt(num / den);
    }

    double kruskal_stress(const Matrix &real, const Matrix &latent)
    {
        return kruskal_stress_at(real, latent, optimal_stress_scale(real, latent));
    }

    double rajski_distance(const Matrix &real, const Matrix &latent, int bins)
    {
        check_pair(real, latent);
        if (bins < 1)
            throw data_error("rajski_distance: bin count must be positive");
        const auto qv = quantize(pairwise_distances(real), bins);
        const auto qq = quantize(pairwise_distances(latent), bins);

        const auto b = static_cast<std::size_t>(bins);
        std::vector<double> joint(b * b, 0.0), pv(b, 0.0), pq(b, 0.0);
        const double inv = 1.0 / static_cast<double>(qv.size());
        for (std::size_t k = 0; k < qv.size(); ++k)
        {
            joint[static_cast<std::size_t>(qv[k]) * b + static_cast<std::size_t>(qq[k])] += inv;
            pv[static_cast<std::size_t>(qv[k])] += inv;
            pq[static_cast<std::size_t>(qq[k])] += inv;
        }

        double mutual = 0.0;
        double joint_entropy = 0.0;
        for (std::size_t v = 0; v < b; ++v)
            for (std::size_t q = 0; q < b; ++q)
            {
                const double p = joint[v * b + q];
                if (p <= 0.0)
                    continue;
                mutual += p * std::log2(p / (pv[v] * pq[q]));
                joint_entropy -= p * std::log2(p);
            }
        if (!(joint_entropy > 0.0))
            throw numerical_error("rajski_distance: joint entropy is zero (all pairs in one cell)");
        return std::clamp(1.0 - mutual / joint_entropy, 0.0, 1.0);
    }

    std::vector<double> distance_errors(const Matrix &estimate, const Matrix &truth)
    {
        if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
            throw data_error("positioning metrics: estimate and truth shapes differ");
        std::vector<double> e(static_cast<std::size_t>(estimate.rows()));
        for (Eigen::Index n = 0; n < estimate.rows(); ++n)
            e[n] = (estimate.row(n) - truth.row(n)).norm();
        return e;
    }

    double mean_distance_error(const Matrix &estimate, const Matrix &truth)
    {
        const auto e = distance_errors(estimate, truth);
        if (e.empty())
            throw data_error("mean_distance_error: empty point set");
        return std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
    }

    double percentile95_error(const Matrix &estimate, const Matrix &truth)
    {
        auto e = distance_errors(estimate, truth);
        if (e.empty())
            throw data_error("percentile95_error: empty point set");
        std::sort(e.begin(), e.end());
        const std::size_t n = e.size();
        const std::size_t needed = (95 * n + 99) / 100; // ceil(0.95 N), exact in integers
        // Error values with at least `needed` strictly smaller errors start after the run equal to e[needed-1].
        const auto first = std::upper_bound(e.begin(), e.end(), e[needed - 1]);
        if (first != e.end())
            return *first;
        return std::nextafter(e.back(), std::numeric_limits<double>::infinity());
    }

    MetricValues evaluate_chart(const Matrix &real, const Matrix &latent, std::optional<int> neighbors, int bins)
    {
        check_pair(real, latent);
        const int j = neighbors.value_or(default_neighbor_count(static_cast<std::size_t>(real.rows())));
        MetricValues m;
        m.tw = trustworthiness(real, latent, j);
        m.ct = continuity(real, latent, j);
        m.ks = kruskal_stress(real, latent);
        m.rd = rajski_distance(real, latent, bins);
        m.mde = mean_distance_error(latent, real);
        m.e95 = percentile95_error(latent, real);
        return m;
    }

    MetricsReport aggregate(std::span<const MetricValues> per_seed, int neighbors, int bins)
    {
        if (per_seed.empty())
            throw data_error("aggregate: no per-seed reports");
        MetricsReport r;
        r.per_seed.assign(per_seed.begin(), per_seed.end());
        r.neighbors = neighbors;
        r.bins = bins;
        const double inv = 1.0 / static_cast<double>(per_seed.size());
        auto stat = [&](double MetricValues::*field, double &mean, double &sd) {
            double s = 0.0;
            for (const auto &m : per_seed)
                s += m.*field;
            mean = s * inv;
            double v = 0.0;
            for (const auto &m : per_seed)
                v += (m.*field - mean) * (m.*field - mean);
            sd = std::sqrt(v * inv);
        };
        stat(&MetricValues::tw, r.mean.tw, r.std.tw);
        stat(&MetricValues::ct, r.mean.ct, r.std.ct);
        stat(&MetricValues::ks, r.mean.ks, r.std.ks);
        stat(&MetricValues::rd, r.mean.rd, r.std.rd);
        stat(&MetricValues::mde, r.mean.mde, r.std.mde);
        stat(&MetricValues::e95, r.mean.e95, r.std.e95);
        return r;
    }
}
