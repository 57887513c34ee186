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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ccrw/errors.hpp"
#include "ccrw/features.hpp"
#include "ccrw/presets.hpp"
#include "ccrw/sim.hpp"

using namespace ccrw;

namespace
{
    constexpr double c0 = 299792458.0;

    ScenarioConfig small_scenario()
    {
        ScenarioConfig s;
        s.seed = 77;
        s.subcarrier_count = 32;
        s.taps = 8;
        s.carrier_hz = 2.4e9;
        s.bandwidth_hz = 20e6;
        s.ue_height_m = 1.0;
        ApConfig a;
        a.position = Vec3(0.0, 0.0, 3.0);
        a.antenna_count = 2;
        a.los_box = Rect{0, 10, 0, 10};
        ApConfig b = a;
        b.position = Vec3(10.0, 10.0, 3.0);
        s.aps = {a, b};
        s.trajectory.area = Rect{1, 9, 1, 9};
        s.trajectory.step_m = 1.0;
        s.trajectory.lane_spacing_m = 2.0;
        s.trajectory.sample_period_s = 0.5;
        return s;
    }

    std::vector<double> ranks_of(const std::vector<double> &v)
    {
        std::vector<int> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t k = 0; k < idx.size(); ++k)
            r[idx[k]] = static_cast<double>(k);
        return r;
    }

    double spearman(const std::vector<double> &x, const std::vector<double> &y)
    {
        const auto rx = ranks_of(x), ry = ranks_of(y);
        const double n = static_cast<double>(x.size());
        const double mean = (n - 1.0) / 2.0;
        double sxy = 0.0, sxx = 0.0, syy = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k)
        {
            sxy += (rx[k] - mean) * (ry[k] - mean);
            sxx += (rx[k] - mean) * (rx[k] - mean);
            syy += (ry[k] - mean) * (ry[k] - mean);
        }
        return sxy / std::sqrt(sxx * syy);
    }
}

TEST_CASE("a single line-of-sight ray has flat magnitude and linear phase across subcarriers")
{
    ScenarioConfig s = small_scenario();
    s.scatterers_per_ap = 0;
    s.random_ap_phase = false;
    const CsiDataset ds = synthesize_csi(s);
    const double df = s.bandwidth_hz / s.subcarrier_count;
    const double lambda = c0 / s.carrier_hz;
    for (std::size_t n = 0; n < ds.size(); n += 7)
    {
        const ComplexMatrix h = to_complex_double(ds.samples[n].h);
        const double d = (ds.samples[n].position - s.aps[0].position).norm();
        const double tau = d / c0;
        for (int w = 0; w < s.subcarrier_count; ++w)
            CHECK(std::abs(h(0, w)) == doctest::Approx(lambda / (4.0 * std::numbers::pi * d)).epsilon(1e-6));
        for (int w = 1; w < s.subcarrier_count; ++w)
        {
            // Phase step between adjacent subcarriers, wrapped to (-pi, pi].
            const double step = std::arg(h(0, w) / h(0, w - 1));
            const double expected = std::remainder(-2.0 * std::numbers::pi * tau * df, 2.0 * std::numbers::pi);
            CHECK(step == doctest::Approx(expected).epsilon(1e-5));
        }
    }
}

TEST_CASE("free-space amplitude is inversely proportional to distance")
{
    ScenarioConfig s = small_scenario();
    s.scatterers_per_ap = 0;
    const CsiDataset ds = synthesize_csi(s);
    const double k0 = std::abs(ds.samples[0].h(0, 0)) * (ds.samples[0].position - s.aps[0].position).norm();
    for (const auto &smp : ds.samples)
        CHECK(std::abs(smp.h(0, 3)) * (smp.position - s.aps[0].position).norm() == doctest::Approx(k0).epsilon(1e-6));
}

TEST_CASE("blocked APs are at least 15 dB below a line-of-sight ray at the same distance")
{
    ScenarioConfig s = small_scenario();
    s.scatterers_per_ap = 3;
    s.walls = {Wall{Vec2(5.0, -1.0), Vec2(5.0, 11.0)}};
    const CsiDataset ds = synthesize_csi(s);
    const double lambda = c0 / s.carrier_hz;
    int blocked = 0;
    for (std::size_t n = 0; n < ds.size(); ++n)
        for (int a = 0; a < 2; ++a)
        {
            if (ds.los[n][a])
                continue;
            ++blocked;
            const ComplexMatrix h = to_complex_double(ds.samples[n].h).middleRows(a * 2, 2);
            const double d = (ds.samples[n].position - s.aps[a].position).norm();
            const double los_ray = lambda / (4.0 * std::numbers::pi * d);
            // Mean power per entry against the power of a single unit-gain LoS ray.
            const double p = h.squaredNorm() / static_cast<double>(h.size());
            CHECK(10.0 * std::log10(p / (los_ray * los_ray)) <= -15.0);
        }
    CHECK(blocked > 20);
}

TEST_CASE("noise calibration hits the target SNR at each AP's strongest sample")
{
    // Constant channel: every sample is the strongest one, so the empirical SNR over 10000 samples is checked.
    CsiDataset ds;
    ds.ap_count = 2;
    ds.antennas_per_ap = 2;
    ds.subcarrier_count = 16;
    ds.domain = CsiDomain::delay;
    ds.tap_count = 4;
    const int n = 10000;
    ds.samples.resize(n);
    CsiMatrix h = CsiMatrix::Zero(4, 4);
    h(0, 0) = {1.0f, 0.5f};
    h(1, 2) = {-0.25f, 0.0f};
    h(2, 1) = {0.01f, 0.02f};
    for (int i = 0; i < n; ++i)
    {
        ds.samples[i].h = h;
        ds.samples[i].timestamp = i;
    }
    const CsiDataset noisy = add_noise(ds, 25.0, 4, 3);
    for (int a = 0; a < 2; ++a)
    {
        const double signal = to_complex_double(h).middleRows(a * 2, 2).squaredNorm();
        double noise = 0.0;
        for (int i = 0; i < n; ++i)
            noise += (to_complex_double(noisy.samples[i].h) - to_complex_double(h)).middleRows(a * 2, 2).squaredNorm();
        noise /= n;
        CHECK(std::abs(10.0 * std::log10(signal / noise) - 25.0) <= 0.5);
    }
    CHECK(noisy.noise_variance.size() == 2);
    // Infinite SNR only truncates.
    const CsiDataset clean = add_noise(ds, std::numeric_limits<double>::infinity(), 4, 3);
    CHECK(clean.samples[5].h == h);
    CHECK_THROWS_AS(add_noise(ds, 25.0, 3, 3), data_error);
}

TEST_CASE("line-of-sight power falls with distance")
{
    const Preset p = make_preset("outdoor-lite");
    const CsiDataset ds = simulate_scenario(p.scenario);
    FeatureParams fp;
    fp.taps = p.scenario.taps;
    const FeatureSet fs = build_features(ds, fp);
    for (int a = 0; a < ds.ap_count; ++a)
    {
        std::vector<double> dist, power;
        for (std::size_t n = 0; n < ds.size(); ++n)
        {
            dist.push_back((ds.samples[n].position - ds.aps[a].position).norm());
            power.push_back(fs.powers(static_cast<Eigen::Index>(n), a));
        }
        CHECK(spearman(dist, power) <= -0.9);
    }
}

TEST_CASE("trajectory moves one lattice step per sample and visits every lane")
{
    ScenarioConfig s = small_scenario();
    for (auto pattern : {MeanderPattern::north_south, MeanderPattern::east_west, MeanderPattern::both})
    {
        s.trajectory.pattern = pattern;
        const auto t = generate_trajectory(s);
        REQUIRE(t.size() > 10);
        for (std::size_t n = 1; n < t.size(); ++n)
        {
            CHECK((t[n].position - t[n - 1].position).norm() == doctest::Approx(1.0));
            CHECK(t[n].timestamp == doctest::Approx(t[n - 1].timestamp + 0.5));
            CHECK(s.trajectory.area.contains(t[n].position.head<2>()));
            CHECK(t[n].position.z() == 1.0);
        }
    }
    s.trajectory.pattern = MeanderPattern::north_south;
    // 9 lattice columns, lanes every 2 steps: columns 0, 2, 4, 6, 8 fully (9 points each) plus one crossing step
    // between consecutive lanes.
    CHECK(generate_trajectory(s).size() == 5 * 9 + 4);
    s.trajectory.step_m = 20.0;
    CHECK_THROWS_AS(generate_trajectory(s), data_error);
}

TEST_CASE("segment crossing ignores touching endpoints")
{
    CHECK(segments_cross({0, 0}, {2, 2}, {0, 2}, {2, 0}));
    CHECK_FALSE(segments_cross({0, 0}, {1, 1}, {1, 1}, {2, 0}));
    CHECK_FALSE(segments_cross({0, 0}, {1, 0}, {0, 1}, {1, 1}));
    ApConfig ap;
    ap.position = Vec3(0, 0, 3);
    const std::vector<Wall> walls{Wall{Vec2(1, -1), Vec2(1, 1)}};
    CHECK_FALSE(los_visible(ap, Vec3(2, 0, 1), walls));
    CHECK(los_visible(ap, Vec3(2, 3, 1), walls));
}

TEST_CASE("simulation is deterministic in the seed")
{
    ScenarioConfig s = small_scenario();
    const CsiDataset a = simulate_scenario(s);
    const CsiDataset b = simulate_scenario(s);
    s.seed = 78;
    const CsiDataset c = simulate_scenario(s);
    REQUIRE(a.size() == b.size());
    bool same = true, differ = false;
    for (std::size_t n = 0; n < a.size(); ++n)
    {
        same = same && a.samples[n].h == b.samples[n].h;
        differ = differ || a.samples[n].h != c.samples[n].h;
    }
    CHECK(same);
    CHECK(differ);
    CHECK(a.is_train == b.is_train);
    CHECK(a.config_hash == b.config_hash);
    CHECK(a.config_hash != c.config_hash);
    CHECK(a.domain == CsiDomain::delay);
    CHECK(a.tap_count == 8);
    CHECK_NOTHROW(a.validate());
}

TEST_CASE("train/test split sizes and validation")
{
    ScenarioConfig s = small_scenario();
    const CsiDataset ds = synthesize_csi(s);
    const CsiDataset split = split_train_test(ds, 0.8, 5);
    const auto train = split.train_indices();
    const auto test = split.test_indices();
    CHECK(train.size() == static_cast<std::size_t>(std::floor(0.8 * ds.size())));
    CHECK(train.size() + test.size() == ds.size());
    CHECK_THROWS_AS(split_train_test(ds, 1.5, 5), data_error);

    ScenarioConfig bad = s;
    bad.aps.pop_back();
    CHECK_THROWS_AS(bad.validate(), data_error);
    bad = s;
    bad.taps = 64;
    CHECK_THROWS_AS(bad.validate(), data_error);
    bad = s;
    bad.aps[0].position = Vec3(1.0, 1.0, 1.0);
    CHECK_THROWS_AS(synthesize_csi(bad), data_error);
}
