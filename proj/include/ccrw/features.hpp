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

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ccrw/sim.hpp"
#include "ccrw/types.hpp"

namespace ccrw
{
    // Ordered AP pair (close, far) used by the bilateration loss.
    struct ApPair
    {
        int close = 0;
        int far = 0;
        friend bool operator==(const ApPair &, const ApPair &) = default;
    };

    struct FeatureParams
    {
        int taps = 8;          // C
        double p_thr = -std::numeric_limits<double>::infinity(); // LoS power threshold, dB
        double m_p = 3.0;      // pair power margin in dB
    };

    // Per-sample learning inputs derived from a CSI dataset.
    struct FeatureSet
    {
        Matrix features;                              // N x D', unit-norm rows
        Matrix powers;                                // N x A, dB
        std::vector<std::vector<int>> los_sets;       // estimated LoS APs per sample, ascending
        std::vector<std::vector<ApPair>> ap_pairs;    // per sample
        std::vector<double> timestamps;
        int tap_count = 0;
        double p_thr = 0.0;
        double m_p = 0.0;
        std::string dataset_hash;

        std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
        int dimension() const { return static_cast<int>(features.cols()); }
        int ap_count() const { return static_cast<int>(powers.cols()); }
    };

    // Unitary inverse DFT along the subcarrier axis of every row (B x W -> B x W delay taps).
    ComplexMatrix delay_transform(const ComplexMatrix &h);

    // First `taps` columns of the delay-domain matrix. Only those taps are computed.
    ComplexMatrix delay_truncate(const ComplexMatrix &h, int taps);

    // |vec(H)| / ||vec(H)||, column-major vectorization. The result is rounded to single precision
    // (the CSI storage precision) so that phase/scale invariance holds bit-exactly.
    Vector extract_feature(const ComplexMatrix &h_trunc);

    // 20 log10 of the Frobenius norm; -inf for an all-zero block.
    double receive_power(const ComplexMatrix &block);

    std::vector<int> los_ap_set(std::span<const double> powers, double p_thr);

    std::vector<ApPair> ap_pairs(std::span<const double> powers, std::span<const int> los_set, double m_p);

    // Fraction of pairs whose "close" AP is geometrically farther than the "far" AP.
    // Returns NaN when there are no pairs at all.
    double false_pair_ratio(std::span<const std::vector<ApPair>> pairs, std::span<const Vec3> positions,
                            std::span<const Vec3> ap_positions);

    double mean_pair_count(std::span<const std::vector<ApPair>> pairs);

    // Truncated delay-domain CSI of one sample (truncates on the fly for frequency-domain datasets).
    ComplexMatrix truncated_csi(const CsiDataset &ds, std::size_t n, int taps);

    FeatureSet build_features(const CsiDataset &ds, const FeatureParams &params);

    // Recomputes LoS sets and AP pairs from the stored powers with new thresholds.
    void relabel(FeatureSet &fs, double p_thr, double m_p);
}
