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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccrw/types.hpp"

namespace ccrw
{
    struct ApConfig
    {
        Vec3 position = Vec3::Zero();
        int antenna_count = 4;           // M_R
        Rect los_box;                    // region the AP is expected to see in LoS
        Vec2 array_orientation{1.0, 0.0}; // ULA axis, unit vector in the xy-plane
    };

    // Occluding wall; heights are ignored, occlusion is tested in the xy-plane.
    struct Wall
    {
        Vec2 a = Vec2::Zero();
        Vec2 b = Vec2::Zero();
    };

    enum class MeanderPattern
    {
        north_south, // lanes run along y
        east_west,   // lanes run along x
        both         // north-south sweep followed by an east-west sweep
    };

    struct TrajectorySpec
    {
        Rect area;
        double step_m = 1.0;
        double lane_spacing_m = 0.0; // 0 means "same as step_m"; rounded to a whole number of steps
        MeanderPattern pattern = MeanderPattern::north_south;
        double sample_period_s = 0.1;
    };

    struct ScenarioConfig
    {
        std::string name = "scenario";
        std::vector<ApConfig> aps;
        int subcarrier_count = 52; // W
        double carrier_hz = 2.4e9;
        double bandwidth_hz = 20e6;
        double ue_height_m = 1.5;
        TrajectorySpec trajectory;
        std::vector<Wall> walls;
        double max_snr_db = 25.0;
        int taps = 8; // C
        double train_ratio = 0.8;

        // Multipath model.
        int scatterers_per_ap = 3;
        double scatter_loss_min_db = 10.0;
        double scatter_loss_max_db = 20.0;
        double nlos_loss_db = 20.0; // extra loss on every ray when the direct path is blocked
        bool random_ap_phase = true;

        std::uint64_t seed = 1;

        int ap_count() const { return static_cast<int>(aps.size()); }
        int antennas_per_ap() const { return aps.empty() ? 0 : aps.front().antenna_count; }
        void validate() const;
    };

    struct TrajectoryPoint
    {
        Vec3 position = Vec3::Zero();
        double timestamp = 0.0;
    };

    enum class CsiDomain
    {
        frequency, // B x W subcarriers
        delay      // B x C truncated taps
    };

    struct CsiSample
    {
        CsiMatrix h;
        Vec3 position = Vec3::Zero();
        double timestamp = 0.0;
    };

    struct CsiDataset
    {
        int ap_count = 0;
        int antennas_per_ap = 0;
        int subcarrier_count = 0;
        CsiDomain domain = CsiDomain::frequency;
        int tap_count = 0; // columns of h when domain == delay

        std::vector<CsiSample> samples;
        std::vector<std::uint8_t> is_train;          // empty until split_train_test
        std::vector<ApConfig> aps;                   // AP geometry known to the learner
        std::vector<std::vector<std::uint8_t>> los;  // simulator ground truth, N x A; empty if unknown
        std::vector<double> noise_variance;          // per AP; empty if no noise was added
        bool has_positions = true;

        std::uint64_t seed = 0;
        std::uint64_t noise_seed = 0;
        std::uint64_t split_seed = 0;
        std::string provenance = "synthetic";
        std::string config_hash;

        std::size_t size() const { return samples.size(); }
        int rows() const { return ap_count * antennas_per_ap; }
        int columns() const { return domain == CsiDomain::frequency ? subcarrier_count : tap_count; }

        std::vector<int> train_indices() const;
        std::vector<int> test_indices() const;

        // Checks shape consistency, AP block layout and strictly increasing timestamps.
        void validate() const;
    };

    std::vector<TrajectoryPoint> generate_trajectory(const ScenarioConfig &cfg);

    // True when the open segments p-q and a-b properly intersect (touching at an endpoint does not count).
    bool segments_cross(const Vec2 &p, const Vec2 &q, const Vec2 &a, const Vec2 &b);

    bool los_visible(const ApConfig &ap, const Vec3 &ue_pos, std::span<const Wall> walls);

    // Noiseless frequency-domain CSI for every trajectory point.
    CsiDataset synthesize_csi(const ScenarioConfig &cfg);

    // Truncates to `taps` delay taps (when still in the frequency domain) and adds per-AP complex Gaussian
    // noise calibrated so the strongest sample of each AP sits at `max_snr_db`. An infinite target adds no noise.
    CsiDataset add_noise(const CsiDataset &ds, double max_snr_db, int taps, std::uint64_t seed);

    // Marks floor(ratio * N) uniformly chosen samples as training data and the rest as test data.
    CsiDataset split_train_test(const CsiDataset &ds, double ratio, std::uint64_t seed);

    // simulate + noise + split in one go, as the CLI does.
    CsiDataset simulate_scenario(const ScenarioConfig &cfg);
}
