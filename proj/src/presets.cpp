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

#include "ccrw/presets.hpp"

#include <limits>

#include "ccrw/errors.hpp"

namespace ccrw
{
    namespace
    {
        constexpr Variant all_variants[] = {Variant::P1, Variant::P2, Variant::B1,
                                            Variant::B2, Variant::B3, Variant::B4};

        std::vector<RunConfig> make_runs(const LossConfig &loss, double p_thr, int b2_labels, int b3_labels,
                                         int epochs, int batch_size, double learning_rate)
        {
            std::vector<RunConfig> runs;
            for (Variant v : all_variants)
            {
                RunConfig r;
                r.variant = v;
                r.loss = loss;
                apply_variant_weights(r);
                r.p_thr = p_thr;
                r.label_count = v == Variant::B2 ? b2_labels : v == Variant::B3 ? b3_labels : 0;
                r.epochs = epochs;
                r.batch_size = batch_size;
                r.adam.learning_rate = learning_rate;
                r.validate();
                runs.push_back(r);
            }
            return runs;
        }

        ApConfig ap_at(double x, double y, double z, const Rect &box, Vec2 orientation = {1.0, 0.0})
        {
            ApConfig ap;
            ap.position = Vec3(x, y, z);
            ap.antenna_count = 4;
            ap.los_box = box;
            ap.array_orientation = orientation;
            return ap;
        }

        // 12 m x 18 m floor split into four 6 m x 9 m rooms by walls along x = 6 and y = 9. Each wall between
        // two rooms has a 1 m doorway at its midpoint with an AP mounted in it, so a door AP sees both rooms
        // it joins. Two more APs sit in opposite corners of the floor.
        Preset indoor_lite()
        {
            Preset p;
            p.name = "indoor-lite";
            ScenarioConfig &s = p.scenario;
            s.name = p.name;
            s.seed = 20260101;
            s.subcarrier_count = 52;
            s.carrier_hz = 2.4e9;
            s.bandwidth_hz = 20e6;
            s.ue_height_m = 1.0;
            s.taps = 8;
            s.max_snr_db = 25.0;
            s.train_ratio = 0.8;

            const Rect west{0.0, 6.0, 0.0, 18.0}, east{6.0, 12.0, 0.0, 18.0};
            const Rect south{0.0, 12.0, 0.0, 9.0}, north{0.0, 12.0, 9.0, 18.0};
            const Rect room_sw{0.0, 6.0, 0.0, 9.0}, room_ne{6.0, 12.0, 9.0, 18.0};
            const double z = 3.0;
            s.aps = {ap_at(3.0, 9.0, z, west),     ap_at(9.0, 9.0, z, east),     ap_at(6.0, 4.5, z, south),
                     ap_at(6.0, 13.5, z, north),   ap_at(1.0, 1.0, z, room_sw),  ap_at(11.0, 17.0, z, room_ne)};
            const double half_door = 0.5;
            s.walls = {Wall{Vec2(0.0, 9.0), Vec2(3.0 - half_door, 9.0)},
                       Wall{Vec2(3.0 + half_door, 9.0), Vec2(9.0 - half_door, 9.0)},
                       Wall{Vec2(9.0 + half_door, 9.0), Vec2(12.0, 9.0)},
                       Wall{Vec2(6.0, 0.0), Vec2(6.0, 4.5 - half_door)},
                       Wall{Vec2(6.0, 4.5 + half_door), Vec2(6.0, 13.5 - half_door)},
                       Wall{Vec2(6.0, 13.5 + half_door), Vec2(6.0, 18.0)}};

            // Lattice offset by half a step keeps every UE position off the walls.
            s.trajectory.area = Rect{0.1, 11.9, 0.1, 17.9};
            s.trajectory.step_m = 0.2;
            s.trajectory.lane_spacing_m = 0.8;
            s.trajectory.pattern = MeanderPattern::both;
            s.trajectory.sample_period_s = 0.2;

            p.p_thr = -44.0;
            p.m_p = 3.0;
            LossConfig loss;
            loss.coherence_time = 2.0;
            loss.margin_t = 2.0;
            loss.margin_b = 2.0;
            loss.margin_p = p.m_p;
            p.runs = make_runs(loss, p.p_thr, 10, 50, 60, 128, 3e-3);
            return p;
        }

        // 40 m x 60 m open area observed by four corner APs; every AP sees the whole area.
        Preset outdoor_lite()
        {
            Preset p;
            p.name = "outdoor-lite";
            ScenarioConfig &s = p.scenario;
            s.name = p.name;
            s.seed = 20260102;
            s.subcarrier_count = 52;
            s.carrier_hz = 3.5e9;
            s.bandwidth_hz = 20e6;
            s.ue_height_m = 1.5;
            s.taps = 8;
            s.max_snr_db = 25.0;
            s.train_ratio = 0.8;

            const Rect area{0.0, 40.0, 0.0, 60.0};
            const double z = 10.0;
            s.aps = {ap_at(-5.0, -5.0, z, area, {1.0, -1.0}), ap_at(45.0, -5.0, z, area, {1.0, 1.0}),
                     ap_at(-5.0, 65.0, z, area, {1.0, 1.0}), ap_at(45.0, 65.0, z, area, {1.0, -1.0})};

            s.trajectory.area = area;
            s.trajectory.step_m = 1.0;
            s.trajectory.lane_spacing_m = 2.0;
            s.trajectory.pattern = MeanderPattern::north_south;
            s.trajectory.sample_period_s = 1.0;

            p.p_thr = -std::numeric_limits<double>::infinity();
            p.m_p = 3.0;
            LossConfig loss;
            loss.coherence_time = 10.0;
            loss.margin_t = 5.0;
            loss.margin_b = 5.0;
            loss.margin_p = p.m_p;
            p.runs = make_runs(loss, p.p_thr, 10, 100, 60, 128, 1e-3);
            return p;
        }
    }

    std::vector<std::string> preset_names() { return {"indoor-lite", "outdoor-lite"}; }

    Preset make_preset(std::string_view name)
    {
        if (name == "indoor-lite")
            return indoor_lite();
        if (name == "outdoor-lite")
            return outdoor_lite();
        throw data_error("unknown preset '" + std::string(name) + "' (expected indoor-lite or outdoor-lite)");
    }

    const RunConfig &preset_run(const Preset &preset, Variant v)
    {
        for (const auto &r : preset.runs)
            if (r.variant == v)
                return r;
        throw data_error("preset has no run for the requested variant");
    }
}
