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

#include "ccrw/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <spdlog/spdlog.h>

#include "ccrw/config.hpp"
#include "ccrw/errors.hpp"
#include "ccrw/features.hpp"
#include "ccrw/random.hpp"

namespace ccrw
{
    namespace
    {
        constexpr double speed_of_light = 299792458.0;
        constexpr double two_pi = 2.0 * std::numbers::pi;

        // Integer lattice point (i, j) of the trajectory grid.
        struct GridIndex
        {
            long i = 0;
            long j = 0;
        };

        // Serpentine sweep over the lattice. `along_y` selects north-south lanes.
        std::vector<GridIndex> meander(long nx, long ny, long lane_steps, bool along_y, bool start_high_lane, bool start_high_along)
        {
            std::vector<GridIndex> out;
            const long n_lanes_axis = along_y ? nx : ny;   // last index across lanes
            const long n_along = along_y ? ny : nx;        // last index along a lane
            const long lane_count = n_lanes_axis / lane_steps + 1;

            bool forward = !start_high_along;
            for (long k = 0; k < lane_count; ++k)
            {
                const long lane_idx = start_high_lane ? n_lanes_axis - k * lane_steps : k * lane_steps;
                for (long s = 0; s <= n_along; ++s)
                {
                    const long a = forward ? s : n_along - s;
                    out.push_back(along_y ? GridIndex{lane_idx, a} : GridIndex{a, lane_idx});
                }
                if (k + 1 < lane_count)
                {
                    // Walk across to the next lane in single steps.
                    const long a_end = forward ? n_along : 0;
                    for (long t = 1; t < lane_steps; ++t)
                    {
                        const long li = start_high_lane ? lane_idx - t : lane_idx + t;
                        out.push_back(along_y ? GridIndex{li, a_end} : GridIndex{a_end, li});
                    }
                }
                forward = !forward;
            }
            return out;
        }

        // Unit-step Manhattan path from `from` (exclusive) to `to` (exclusive).
        void append_transfer(std::vector<GridIndex> &path, GridIndex from, GridIndex to)
        {
            while (from.i != to.i)
            {
                from.i += (to.i > from.i) ? 1 : -1;
                if (from.i != to.i || from.j != to.j)
                    path.push_back(from);
            }
            while (from.j != to.j)
            {
                from.j += (to.j > from.j) ? 1 : -1;
                if (from.j != to.j)
                    path.push_back(from);
            }
        }

        double orient(const Vec2 &a, const Vec2 &b, const Vec2 &c)
        {
            return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
        }

        struct Reflector
        {
            Vec3 position;
            double loss_db = 0.0;
            double phase = 0.0;
        };

        struct Ray
        {
            double amplitude = 0.0;
            double path_length = 0.0;
            double cos_arrival = 0.0; // cosine between arrival direction and array axis
            double phase = 0.0;       // extra phase (reflection)
        };

        double arrival_cosine(const ApConfig &ap, const Vec3 &source)
        {
            Vec2 dir = (source - ap.position).head<2>();
            const double norm = dir.norm();
            if (norm < 1e-12)
                return 0.0;
            return dir.dot(ap.array_orientation.normalized()) / norm;
        }
    }

    void ScenarioConfig::validate() const
    {
        if (aps.size() < 2)
            throw data_error("scenario needs at least two APs");
        for (const auto &ap : aps)
        {
            if (ap.antenna_count < 1)
                throw data_error("AP antenna count must be >= 1");
            if (ap.antenna_count != aps.front().antenna_count)
                throw data_error("all APs must have the same antenna count");
            if (!ap.los_box.valid())
                throw data_error("AP LoS box must satisfy x_min < x_max and y_min < y_max");
            if (ap.array_orientation.norm() <= 0.0)
                throw data_error("AP array orientation must be nonzero");
        }
        if (subcarrier_count < 1)
            throw data_error("subcarrier count must be positive");
        if (taps < 1 || taps > subcarrier_count)
            throw data_error("tap count must satisfy 1 <= C <= W");
        if (carrier_hz <= 0.0 || bandwidth_hz <= 0.0)
            throw data_error("carrier and bandwidth must be positive");
        if (!(trajectory.step_m > 0.0))
            throw data_error("trajectory step must be positive");
        if (!trajectory.area.valid())
            throw data_error("trajectory area is degenerate");
        if (!(trajectory.sample_period_s > 0.0))
            throw data_error("sample period must be positive");
        if (scatterers_per_ap < 0 || scatter_loss_min_db > scatter_loss_max_db)
            throw data_error("invalid scatterer parameters");
        if (!(train_ratio >= 0.0 && train_ratio <= 1.0))
            throw data_error("train ratio must be in [0, 1]");
    }

    std::vector<int> CsiDataset::train_indices() const
    {
        std::vector<int> out;
        for (std::size_t n = 0; n < is_train.size(); ++n)
            if (is_train[n])
                out.push_back(static_cast<int>(n));
        return out;
    }

    std::vector<int> CsiDataset::test_indices() const
    {
        std::vector<int> out;
        for (std::size_t n = 0; n < is_train.size(); ++n)
            if (!is_train[n])
                out.push_back(static_cast<int>(n));
        return out;
    }

    void CsiDataset::validate() const
    {
        if (ap_count < 1 || antennas_per_ap < 1)
            throw data_error("dataset must have at least one AP with one antenna");
        if (domain == CsiDomain::delay && (tap_count < 1 || tap_count > subcarrier_count))
            throw data_error("delay-domain dataset must satisfy 1 <= C <= W");
        if (!aps.empty() && static_cast<int>(aps.size()) != ap_count)
            throw data_error("AP metadata count does not match A");
        const int b = rows();
        const int cols = columns();
        for (std::size_t n = 0; n < samples.size(); ++n)
        {
            if (samples[n].h.rows() != b || samples[n].h.cols() != cols)
                throw data_error("CSI matrix shape mismatch at sample " + std::to_string(n));
            if (n > 0 && !(samples[n].timestamp > samples[n - 1].timestamp))
                throw data_error("timestamps must be strictly increasing (sample " + std::to_string(n) + ")");
        }
        if (!is_train.empty() && is_train.size() != samples.size())
            throw data_error("split mask length does not match N");
        if (!los.empty())
        {
            if (los.size() != samples.size())
                throw data_error("LoS flag table length does not match N");
            for (const auto &row : los)
                if (static_cast<int>(row.size()) != ap_count)
                    throw data_error("LoS flag row length does not match A");
        }
        if (!noise_variance.empty() && static_cast<int>(noise_variance.size()) != ap_count)
            throw data_error("noise variance length does not match A");
    }

    std::vector<TrajectoryPoint> generate_trajectory(const ScenarioConfig &cfg)
    {
        const auto &spec = cfg.trajectory;
        if (!spec.area.valid())
            throw data_error("degenerate trajectory: area rectangle is empty");
        if (!(spec.step_m > 0.0) || spec.step_m > spec.area.width() || spec.step_m > spec.area.height())
            throw data_error("degenerate trajectory: step larger than the area");

        const double eps = 1e-9;
        const long nx = static_cast<long>(std::floor(spec.area.width() / spec.step_m + eps));
        const long ny = static_cast<long>(std::floor(spec.area.height() / spec.step_m + eps));
        long lane_steps = 1;
        if (spec.lane_spacing_m > 0.0)
            lane_steps = std::max(1L, std::lround(spec.lane_spacing_m / spec.step_m));

        std::vector<GridIndex> path;
        switch (spec.pattern)
        {
        case MeanderPattern::north_south:
            path = meander(nx, ny, lane_steps, true, false, false);
            break;
        case MeanderPattern::east_west:
            path = meander(nx, ny, lane_steps, false, false, false);
            break;
        case MeanderPattern::both:
        {
            path = meander(nx, ny, lane_steps, true, false, false);
            const GridIndex end = path.back();
            // Start the east-west sweep from the lattice corner closest to where the first sweep ended.
            const bool high_x = end.i * 2 > nx;
            const bool high_y = end.j * 2 > ny;
            auto second = meander(nx, ny, lane_steps, false, high_y, high_x);
            append_transfer(path, end, second.front());
            if (second.front().i == end.i && second.front().j == end.j)
                second.erase(second.begin());
            path.insert(path.end(), second.begin(), second.end());
            break;
        }
        }

        std::vector<TrajectoryPoint> out;
        out.reserve(path.size());
        for (std::size_t n = 0; n < path.size(); ++n)
        {
            TrajectoryPoint p;
            p.position = Vec3(spec.area.x_min + static_cast<double>(path[n].i) * spec.step_m,
                              spec.area.y_min + static_cast<double>(path[n].j) * spec.step_m,
                              cfg.ue_height_m);
            p.timestamp = static_cast<double>(n) * spec.sample_period_s;
            out.push_back(p);
        }
        return out;
    }

    bool segments_cross(const Vec2 &p, const Vec2 &q, const Vec2 &a, const Vec2 &b)
    {
        const double o1 = orient(p, q, a);
        const double o2 = orient(p, q, b);
        const double o3 = orient(a, b, p);
        const double o4 = orient(a, b, q);
        return ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) &&
               ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0));
    }

    bool los_visible(const ApConfig &ap, const Vec3 &ue_pos, std::span<const Wall> walls)
    {
        const Vec2 p = ap.position.head<2>();
        const Vec2 q = ue_pos.head<2>();
        for (const auto &w : walls)
            if (segments_cross(p, q, w.a, w.b))
                return false;
        return true;
    }

    CsiDataset synthesize_csi(const ScenarioConfig &cfg)
    {
        cfg.validate();
        const auto trajectory = generate_trajectory(cfg);

        const int n_ap = cfg.ap_count();
        const int n_ant = cfg.antennas_per_ap();
        const int n_sc = cfg.subcarrier_count;
        const double wavelength = speed_of_light / cfg.carrier_hz;
        const double delta_f = cfg.bandwidth_hz / static_cast<double>(n_sc);
        const double nlos_gain = std::pow(10.0, -cfg.nlos_loss_db / 20.0);

        // Scatterers are fixed per AP so the channel varies smoothly with UE position.
        std::vector<std::vector<Reflector>> reflectors(n_ap);
        for (int a = 0; a < n_ap; ++a)
        {
            Rng rng = make_rng(cfg.seed, "reflectors", static_cast<std::uint64_t>(a));
            const Rect &box = cfg.aps[a].los_box;
            std::uniform_real_distribution<double> ux(box.x_min, box.x_max), uy(box.y_min, box.y_max);
            std::uniform_real_distribution<double> uloss(cfg.scatter_loss_min_db, cfg.scatter_loss_max_db);
            std::uniform_real_distribution<double> uphase(0.0, two_pi);
            for (int k = 0; k < cfg.scatterers_per_ap; ++k)
            {
                Reflector r;
                const double x = ux(rng);
                const double y = uy(rng);
                r.position = Vec3(x, y, 0.5 * (cfg.aps[a].position.z() + cfg.ue_height_m));
                r.loss_db = uloss(rng);
                r.phase = uphase(rng);
                reflectors[a].push_back(r);
            }
        }

        CsiDataset ds;
        ds.ap_count = n_ap;
        ds.antennas_per_ap = n_ant;
        ds.subcarrier_count = n_sc;
        ds.domain = CsiDomain::frequency;
        ds.aps = cfg.aps;
        ds.seed = cfg.seed;
        ds.provenance = "synthetic";
        ds.samples.resize(trajectory.size());
        ds.los.assign(trajectory.size(), std::vector<std::uint8_t>(n_ap, 0));

        std::vector<Ray> rays;
        std::vector<std::complex<double>> freq_phase(n_sc);
        for (std::size_t n = 0; n < trajectory.size(); ++n)
        {
            const Vec3 &ue = trajectory[n].position;
            Rng rng = make_rng(cfg.seed, "ap-phase", n);
            std::uniform_real_distribution<double> uphase(0.0, two_pi);

            ComplexMatrix h = ComplexMatrix::Zero(n_ap * n_ant, n_sc);
            for (int a = 0; a < n_ap; ++a)
            {
                const ApConfig &ap = cfg.aps[a];
                const double ap_phase = cfg.random_ap_phase ? uphase(rng) : 0.0;
                const double d = (ue - ap.position).norm();
                if (d < 1e-9)
                    throw data_error("singular geometry: UE coincides with AP " + std::to_string(a));

                const bool visible = los_visible(ap, ue, cfg.walls);
                ds.los[n][a] = visible ? 1 : 0;

                rays.clear();
                if (visible)
                    rays.push_back({wavelength / (4.0 * std::numbers::pi * d), d, arrival_cosine(ap, ue), 0.0});
                for (const auto &r : reflectors[a])
                {
                    const double len = (ue - r.position).norm() + (r.position - ap.position).norm();
                    double amp = wavelength / (4.0 * std::numbers::pi * len) * std::pow(10.0, -r.loss_db / 20.0);
                    if (!visible)
                        amp *= nlos_gain;
                    rays.push_back({amp, len, arrival_cosine(ap, r.position), r.phase});
                }

                for (const auto &ray : rays)
                {
                    if (ray.amplitude == 0.0)
                        continue;
                    const double tau = ray.path_length / speed_of_light;
                    const double base_phase = ray.phase + ap_phase - two_pi * ray.path_length / wavelength;
                    for (int w = 0; w < n_sc; ++w)
                        freq_phase[w] = std::polar(1.0, -two_pi * static_cast<double>(w) * delta_f * tau);
                    for (int m = 0; m < n_ant; ++m)
                    {
                        // Half-wavelength ULA: pi * m * cos(theta) per element.
                        const std::complex<double> g =
                            std::polar(ray.amplitude, base_phase + std::numbers::pi * m * ray.cos_arrival);
                        auto row = h.row(a * n_ant + m);
                        for (int w = 0; w < n_sc; ++w)
                            row(w) += g * freq_phase[w];
                    }
                }
            }
            ds.samples[n].h = to_csi(h);
            ds.samples[n].position = ue;
            ds.samples[n].timestamp = trajectory[n].timestamp;
        }
        return ds;
    }

    CsiDataset add_noise(const CsiDataset &ds, double max_snr_db, int taps, std::uint64_t seed)
    {
        if (ds.samples.empty())
            throw data_error("add_noise: empty dataset");
        if (taps < 1 || taps > ds.subcarrier_count)
            throw data_error("add_noise: tap count must satisfy 1 <= C <= W");
        if (ds.domain == CsiDomain::delay && ds.tap_count != taps)
            throw data_error("add_noise: dataset is already truncated to a different tap count");

        CsiDataset out = ds;
        if (ds.domain == CsiDomain::frequency)
        {
            for (auto &s : out.samples)
                s.h = to_csi(delay_truncate(to_complex_double(s.h), taps));
            out.domain = CsiDomain::delay;
            out.tap_count = taps;
        }
        if (std::isinf(max_snr_db) && max_snr_db > 0.0)
            return out;

        const int n_ant = out.antennas_per_ap;
        std::vector<double> peak(out.ap_count, 0.0);
        for (const auto &s : out.samples)
            for (int a = 0; a < out.ap_count; ++a)
            {
                const double e = s.h.middleRows(a * n_ant, n_ant).cast<std::complex<double>>().squaredNorm();
                peak[a] = std::max(peak[a], e);
            }

        const double snr_linear = std::pow(10.0, max_snr_db / 10.0);
        out.noise_variance.assign(out.ap_count, 0.0);
        for (int a = 0; a < out.ap_count; ++a)
        {
            out.noise_variance[a] = peak[a] / (static_cast<double>(n_ant) * taps * snr_linear);
            if (peak[a] == 0.0)
                spdlog::warn("add_noise: AP {} has an all-zero channel; no noise added for it", a);
        }

        Rng rng = make_rng(seed, "noise");
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto &s : out.samples)
        {
            ComplexMatrix h = to_complex_double(s.h);
            for (int a = 0; a < out.ap_count; ++a)
            {
                const double sd = std::sqrt(out.noise_variance[a] / 2.0);
                for (int m = 0; m < n_ant; ++m)
                    for (int c = 0; c < taps; ++c)
                    {
                        const double re = gauss(rng);
                        const double im = gauss(rng);
                        h(a * n_ant + m, c) += std::complex<double>(sd * re, sd * im);
                    }
            }
            s.h = to_csi(h);
        }
        out.noise_seed = seed;
        return out;
    }

    CsiDataset split_train_test(const CsiDataset &ds, double ratio, std::uint64_t seed)
    {
        const std::size_t n = ds.samples.size();
        if (n < 10)
            throw data_error("split_train_test: need at least 10 samples");
        if (!(ratio >= 0.0 && ratio <= 1.0))
            throw data_error("split_train_test: ratio must be in [0, 1]");

        const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
        if (n_train == n)
            spdlog::warn("split_train_test: ratio {} leaves an empty test set", ratio);

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng = make_rng(seed, "split");
        for (std::size_t i = n - 1; i > 0; --i)
        {
            std::uniform_int_distribution<std::size_t> pick(0, i);
            std::swap(order[i], order[pick(rng)]);
        }

        CsiDataset out = ds;
        out.is_train.assign(n, 0);
        for (std::size_t k = 0; k < n_train; ++k)
            out.is_train[order[k]] = 1;
        out.split_seed = seed;
        return out;
    }

    CsiDataset simulate_scenario(const ScenarioConfig &cfg)
    {
        CsiDataset ds = synthesize_csi(cfg);
        ds = add_noise(ds, cfg.max_snr_db, cfg.taps, derive_seed(cfg.seed, "noise"));
        ds = split_train_test(ds, cfg.train_ratio, derive_seed(cfg.seed, "split"));
        ds.config_hash = scenario_hash(cfg);
        return ds;
    }
}
