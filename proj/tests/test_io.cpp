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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>
#include <unistd.h>

#include "ccrw/errors.hpp"
#include "ccrw/io.hpp"
#include "ccrw/metrics.hpp"

using namespace ccrw;
namespace fs = std::filesystem;

namespace
{
    struct TempDir
    {
        fs::path path;
        explicit TempDir(const std::string &tag)
            : path(fs::temp_directory_path() / ("ccrw_io_" + tag + "_" + std::to_string(::getpid())))
        {
            fs::remove_all(path);
            fs::create_directories(path);
        }
        ~TempDir() { fs::remove_all(path); }
        std::string operator/(const std::string &name) const { return (path / name).string(); }
    };

    ScenarioConfig io_scenario()
    {
        ScenarioConfig s;
        s.seed = 31;
        s.subcarrier_count = 16;
        s.ue_height_m = 1.0;
        for (const Vec3 &p : {Vec3(-1, -1, 3), Vec3(9, 7, 3)})
        {
            ApConfig a;
            a.position = p;
            a.antenna_count = 2;
            a.los_box = Rect{0, 8, 0, 6};
            s.aps.push_back(a);
        }
        s.walls.push_back(Wall{Vec2(4, 2), Vec2(4, 5)});
        s.trajectory.area = Rect{0, 8, 0, 6};
        s.trajectory.step_m = 1.0;
        return s;
    }

    std::string slurp(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }

    void spit(const std::string &path, const std::string &bytes)
    {
        std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
    }

    void check_same_dataset(const CsiDataset &a, const CsiDataset &b)
    {
        REQUIRE(a.size() == b.size());
        CHECK(a.ap_count == b.ap_count);
        CHECK(a.antennas_per_ap == b.antennas_per_ap);
        CHECK(a.domain == b.domain);
        CHECK(a.tap_count == b.tap_count);
        CHECK(a.is_train == b.is_train);
        CHECK(a.los == b.los);
        for (std::size_t n = 0; n < a.size(); ++n)
        {
            // CSI is stored as float32.
            const double scale = a.samples[n].h.cwiseAbs().maxCoeff();
            CHECK((a.samples[n].h - b.samples[n].h).cwiseAbs().maxCoeff() <= 1e-6 * scale);
            CHECK(a.samples[n].timestamp == b.samples[n].timestamp);
            CHECK(a.samples[n].position == b.samples[n].position);
        }
    }
}

TEST_CASE("datasets round-trip through the manifest layout")
{
    TempDir tmp("ds");
    const CsiDataset ds = simulate_scenario(io_scenario());
    save_dataset(ds, tmp / "d");
    const CsiDataset back = load_dataset(tmp / "d");
    check_same_dataset(ds, back);
    CHECK(back.seed == ds.seed);
    CHECK(back.noise_seed == ds.noise_seed);
    CHECK(back.split_seed == ds.split_seed);
    CHECK(back.config_hash == ds.config_hash);
    CHECK(back.noise_variance == ds.noise_variance);
    CHECK(back.aps.size() == ds.aps.size());
    CHECK(back.aps[1].position == ds.aps[1].position);

    // Saving the reloaded dataset reproduces the CSI payload byte for byte.
    save_dataset(back, tmp / "e");
    CHECK(slurp(tmp / "d/csi.bin") == slurp(tmp / "e/csi.bin"));
}

TEST_CASE("corrupted datasets raise the matching error")
{
    TempDir tmp("bad");
    const CsiDataset ds = simulate_scenario(io_scenario());
    save_dataset(ds, tmp / "d");
    const std::string csi = slurp(tmp / "d/csi.bin");
    const std::string manifest = slurp(tmp / "d/manifest.json");

    std::string flipped = csi;
    flipped[flipped.size() / 2] ^= 0x10;
    spit(tmp / "d/csi.bin", flipped);
    CHECK_THROWS_AS(load_dataset(tmp / "d"), checksum_error);

    spit(tmp / "d/csi.bin", csi.substr(0, csi.size() - 8));
    CHECK_THROWS_AS(load_dataset(tmp / "d"), truncated_error);

    spit(tmp / "d/csi.bin", csi);
    std::string future = manifest;
    const auto at = future.find("\"schema_version\": 1");
    REQUIRE(at != std::string::npos);
    future.replace(at, 19, "\"schema_version\": 9");
    spit(tmp / "d/manifest.json", future);
    CHECK_THROWS_AS(load_dataset(tmp / "d"), version_error);

    spit(tmp / "d/manifest.json", manifest);
    CHECK_NOTHROW(load_dataset(tmp / "d"));
    CHECK_THROWS_AS(load_dataset(tmp / "missing"), data_error);
}

TEST_CASE("feature sets round-trip and reject damaged files")
{
    TempDir tmp("fs");
    const CsiDataset ds = simulate_scenario(io_scenario());
    FeatureParams fp;
    fp.p_thr = -60.0;
    const FeatureSet fs = build_features(ds, fp);
    save_features(fs, tmp / "f.ccf");
    const FeatureSet back = load_features(tmp / "f.ccf");
    CHECK(back.features == fs.features);
    CHECK(back.powers == fs.powers);
    CHECK(back.los_sets == fs.los_sets);
    CHECK(back.timestamps == fs.timestamps);
    CHECK(back.ap_pairs == fs.ap_pairs);

    const std::string bytes = slurp(tmp / "f.ccf");
    std::string flipped = bytes;
    flipped[flipped.size() - 3] ^= 0x01;
    spit(tmp / "g.ccf", flipped);
    CHECK_THROWS_AS(load_features(tmp / "g.ccf"), checksum_error);
    spit(tmp / "g.ccf", bytes.substr(0, bytes.size() - 5));
    CHECK_THROWS_AS(load_features(tmp / "g.ccf"), truncated_error);
}

TEST_CASE("checkpoints round-trip with and without an affine map")
{
    TempDir tmp("ck");
    Checkpoint ck;
    ck.model = init_model(64, 2, 5);
    ck.variant = "B2";
    ck.run_config_hash = "0123abcd";
    ck.dataset_hash = "deadbeef";
    ck.p_thr = -44.0;
    ck.m_p = 3.0;
    AffineMap map;
    map.a << 1.25, -0.5, 0.1, 2.0;
    map.b << -3.0, 7.5;
    ck.affine = map;
    save_checkpoint(ck, tmp / "m.ccm");
    const Checkpoint back = load_checkpoint(tmp / "m.ccm");
    CHECK(flatten_parameters(back.model) == flatten_parameters(ck.model));
    CHECK(back.model.dims == ck.model.dims);
    CHECK(back.variant == "B2");
    CHECK(back.run_config_hash == ck.run_config_hash);
    CHECK(back.dataset_hash == ck.dataset_hash);
    CHECK(back.p_thr == -44.0);
    CHECK(back.m_p == 3.0);
    REQUIRE(back.affine.has_value());
    CHECK(back.affine->a == map.a);
    CHECK(back.affine->b == map.b);

    ck.affine.reset();
    ck.p_thr = -std::numeric_limits<double>::infinity();
    save_checkpoint(ck, tmp / "n.ccm");
    const Checkpoint plain = load_checkpoint(tmp / "n.ccm");
    CHECK_FALSE(plain.affine.has_value());
    CHECK(std::isinf(plain.p_thr));
    CHECK(plain.p_thr < 0.0);
}

TEST_CASE("re-imported chart CSVs reproduce the metrics")
{
    TempDir tmp("chart");
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g(0.0, 10.0);
    const int n = 300;
    Matrix real(n, 2), latent(n, 2);
    std::vector<int> ids(n);
    for (int i = 0; i < n; ++i)
    {
        ids[i] = 3 * i + 1;
        real(i, 0) = g(rng);
        real(i, 1) = g(rng);
        latent(i, 0) = 0.7 * real(i, 0) + 0.3 * g(rng) + 1e-3 * i;
        latent(i, 1) = 0.7 * real(i, 1) + 0.3 * g(rng);
    }
    export_chart(ids, latent, tmp / "c.csv");
    CHECK(slurp(tmp / "c.csv").rfind("n,x1,x2\n", 0) == 0);
    const ChartCsv back = read_chart_csv(tmp / "c.csv");
    CHECK(back.sample_ids == ids);
    const MetricValues direct = evaluate_chart(real, latent);
    const MetricValues loaded = evaluate_chart(real, back.points);
    CHECK(std::abs(direct.tw - loaded.tw) < 1e-6);
    CHECK(std::abs(direct.ct - loaded.ct) < 1e-6);
    CHECK(std::abs(direct.ks - loaded.ks) < 1e-6);
    CHECK(std::abs(direct.rd - loaded.rd) < 1e-6);
    CHECK(std::abs(direct.mde - loaded.mde) < 1e-6);
    CHECK(std::abs(direct.e95 - loaded.e95) < 1e-6);

    spit(tmp / "bad.csv", "id,x,y\n1,2,3\n");
    CHECK_THROWS_AS(read_chart_csv(tmp / "bad.csv"), data_error);
    CHECK_THROWS_AS(export_chart(std::vector<int>{1, 2}, latent, tmp / "x.csv"), data_error);
}

TEST_CASE("external datasets round-trip through the generic descriptor")
{
    TempDir tmp("ext");
    const CsiDataset ds = simulate_scenario(io_scenario());
    export_external(ds, tmp / "x");
    const CsiDataset back = ingest_external(tmp / "x/descriptor.json");
    check_same_dataset(ds, back);
    CHECK(back.has_positions);
    CHECK(back.provenance == "ingested");
}

TEST_CASE("external descriptors are checked against their payloads")
{
    TempDir tmp("extbad");
    const CsiDataset ds = simulate_scenario(io_scenario());
    export_external(ds, tmp / "x");
    const std::string desc = slurp(tmp / "x/descriptor.json");

    std::string wrong = desc;
    const auto at = wrong.find("\"tap_count\": 8");
    REQUIRE(at != std::string::npos);
    wrong.replace(at, 14, "\"tap_count\": 9");
    spit(tmp / "x/descriptor.json", wrong);
    CHECK_THROWS_WITH_AS(ingest_external(tmp / "x/descriptor.json"), doctest::Contains("dimension mismatch"),
                         data_error);

    // Without a positions file the dataset is label-free.
    std::string no_pos = desc;
    const auto p = no_pos.find("\"positions_file\"");
    REQUIRE(p != std::string::npos);
    no_pos.replace(p, 16, "\"positions_unused\"");
    spit(tmp / "x/descriptor.json", no_pos);
    const CsiDataset free = ingest_external(tmp / "x/descriptor.json");
    CHECK_FALSE(free.has_positions);
    CHECK(free.size() == ds.size());
}

TEST_CASE("external rotation turns positions and AP positions about the origin")
{
    TempDir tmp("rot");
    const CsiDataset ds = simulate_scenario(io_scenario());
    export_external(ds, tmp / "x");
    std::string desc = slurp(tmp / "x/descriptor.json");
    desc.insert(desc.find('{') + 1, "\n  \"rotation_deg\": 90,");
    spit(tmp / "x/descriptor.json", desc);
    const CsiDataset rot = ingest_external(tmp / "x/descriptor.json");
    for (std::size_t n = 0; n < ds.size(); n += 5)
    {
        const Vec3 &p = ds.samples[n].position;
        const Vec3 &q = rot.samples[n].position;
        CHECK(q.x() == doctest::Approx(-p.y()).epsilon(1e-12));
        CHECK(q.y() == doctest::Approx(p.x()).epsilon(1e-12));
        CHECK(q.z() == p.z());
    }
    CHECK(rot.aps[1].position.x() == doctest::Approx(-7.0));
    CHECK(rot.aps[1].position.y() == doctest::Approx(9.0));
}

TEST_CASE("power traces carry one column per AP")
{
    TempDir tmp("pt");
    Matrix p(3, 2);
    p << -20, -30, -21, -31, -22, -32.5;
    const std::vector<double> t{0.0, 0.1, 0.2};
    export_power_trace(p, t, tmp / "p.csv");
    const std::string text = slurp(tmp / "p.csv");
    CHECK(text.rfind("t,ap0,ap1\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK_THROWS_AS(export_power_trace(p, std::vector<double>{0.0}, tmp / "q.csv"), data_error);
}
