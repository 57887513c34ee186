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

#include "ccrw/features.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ccrw/errors.hpp"

namespace ccrw
{
    namespace
    {
        ComplexMatrix idft_columns(const ComplexMatrix &h, int taps)
        {
            const auto w_count = h.cols();
            const double scale = 1.0 / std::sqrt(static_cast<double>(w_count));
            // Twiddle matrix W x taps: exp(+j 2 pi w c / W) / sqrt(W).
            ComplexMatrix twiddle(w_count, taps);
            for (Eigen::Index w = 0; w < w_count; ++w)
                for (int c = 0; c < taps; ++c)
                {
                    // Reduce the exponent modulo W to keep the angle small and exact.
                    const auto k = (w * c) % w_count;
                    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(w_count);
                    twiddle(w, c) = std::polar(scale, angle);
                }
            return h * twiddle;
        }
    }

    ComplexMatrix delay_transform(const ComplexMatrix &h)
    {
        return idft_columns(h, static_cast<int>(h.cols()));
    }

    ComplexMatrix delay_truncate(const ComplexMatrix &h, int taps)
    {
        if (taps < 1 || taps > h.cols())
            throw data_error("delay_truncate: tap count must satisfy 1 <= C <= W");
        return idft_columns(h, taps);
    }

    Vector extract_feature(const ComplexMatrix &h_trunc)
    {
        const auto b = h_trunc.rows();
        const auto c = h_trunc.cols();
        Vector f(b * c);
        for (Eigen::Index col = 0; col < c; ++col)
            for (Eigen::Index row = 0; row < b; ++row)
                f(col * b + row) = std::abs(h_trunc(row, col));
        const double norm = f.norm();
        if (!(norm > 0.0))
            throw data_error("extract_feature: zero channel");
        f /= norm;
        for (Eigen::Index i = 0; i < f.size(); ++i)
            f(i) = static_cast<double>(static_cast<float>(f(i)));
        return f;
    }

    double receive_power(const ComplexMatrix &block)
    {
        const double fro = block.norm();
        if (fro == 0.0)
            return -std::numeric_limits<double>::infinity();
        return 20.0 * std::log10(fro);
    }

    std::vector<int> los_ap_set(std::span<const double> powers, double p_thr)
    {
        std::vector<int> out;
        for (std::size_t a = 0; a < powers.size(); ++a)
            if (powers[a] > p_thr)
                out.push_back(static_cast<int>(a));
        return out;
    }

    std::vector<ApPair> ap_pairs(std::span<const double> powers, std::span<const int> los_set, double m_p)
    {
        std::vector<ApPair> out;
        for (int ac : los_set)
            for (int af : los_set)
                if (ac != af && powers[ac] > powers[af] + m_p)
                    out.push_back({ac, af});
        return out;
    }

    double false_pair_ratio(std::span<const std::vector<ApPair>> pairs, std::span<const Vec3> positions,
                            std::span<const Vec3> ap_positions)
    {
        if (pairs.size() != positions.size())
            throw data_error("false_pair_ratio: pair list and positions differ in length");
        std::size_t total = 0;
        std::size_t wrong = 0;
        for (std::size_t n = 0; n < pairs.size(); ++n)
        {
            const Vec2 x = positions[n].head<2>();
            for (const auto &p : pairs[n])
            {
                ++total;
                const double dc = (x - ap_positions[p.close].head<2>()).norm();
                const double df = (x - ap_positions[p.far].head<2>()).norm();
                if (dc > df)
                    ++wrong;
            }
        }
        if (total == 0)
            return std::numeric_limits<double>::quiet_NaN();
        return static_cast<double>(wrong) / static_cast<double>(total);
    }

    double mean_pair_count(std::span<const std::vector<ApPair>> pairs)
    {
        if (pairs.empty())
            return 0.0;
        std::size_t total = 0;
        for (const auto &p : pairs)
            total += p.size();
        return static_cast<double>(total) / static_cast<double>(pairs.size());
    }

    ComplexMatrix truncated_csi(const CsiDataset &ds, std::size_t n, int taps)
    {
        if (ds.domain == CsiDomain::delay)
        {
            if (ds.tap_count != taps)
                throw data_error("dataset is truncated to " + std::to_string(ds.tap_count) + " taps, requested " +
                                 std::to_string(taps));
            return to_complex_double(ds.samples[n].h);
        }
        return delay_truncate(to_complex_double(ds.samples[n].h), taps);
    }

    FeatureSet build_features(const CsiDataset &ds, const FeatureParams &params)
    {
        ds.validate();
        if (params.taps < 1 || params.taps > ds.subcarrier_count)
            throw data_error("features: tap count must satisfy 1 <= C <= W");

        const auto n_samples = static_cast<Eigen::Index>(ds.size());
        const int n_ant = ds.antennas_per_ap;
        FeatureSet fs;
        fs.tap_count = params.taps;
        fs.features.resize(n_samples, static_cast<Eigen::Index>(ds.rows()) * params.taps);
        fs.powers.resize(n_samples, ds.ap_count);
        fs.timestamps.reserve(ds.size());
        fs.dataset_hash = ds.config_hash;

        for (Eigen::Index n = 0; n < n_samples; ++n)
        {
            const ComplexMatrix ht = truncated_csi(ds, static_cast<std::size_t>(n), params.taps);
            fs.features.row(n) = extract_feature(ht).transpose();
            for (int a = 0; a < ds.ap_count; ++a)
                fs.powers(n, a) = receive_power(ht.middleRows(a * n_ant, n_ant));
            fs.timestamps.push_back(ds.samples[n].timestamp);
        }
        relabel(fs, params.p_thr, params.m_p);
        return fs;
    }

    void relabel(FeatureSet &fs, double p_thr, double m_p)
    {
        if (m_p < 0.0)
            throw data_error("power margin M_p must be nonnegative");
        fs.p_thr = p_thr;
        fs.m_p = m_p;
        const auto n_samples = fs.powers.rows();
        fs.los_sets.assign(n_samples, {});
        fs.ap_pairs.assign(n_samples, {});
        std::vector<double> row(fs.powers.cols());
        for (Eigen::Index n = 0; n < n_samples; ++n)
        {
            for (Eigen::Index a = 0; a < fs.powers.cols(); ++a)
                row[a] = fs.powers(n, a);
            fs.los_sets[n] = los_ap_set(row, p_thr);
            fs.ap_pairs[n] = ap_pairs(row, fs.los_sets[n], m_p);
        }
    }
}
