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

#include <cmath>

#include "ccrw/config.hpp"
#include "ccrw/errors.hpp"
#include "ccrw/presets.hpp"

using namespace ccrw;

namespace
{
    const std::string source_dir = CCRW_SOURCE_DIR;

    const char *minimal_scenario = R"(
name: tiny
seed: 4
trajectory:
  area: [0, 10, 0, 5]
  step_m: 0.5
aps:
  - {position: [0, 0, 3], antennas: 2, los_box: [0, 10, 0, 5]}
  - {position: [10, 5, 3], antennas: 2, los_box: [0, 10, 0, 5]}
)";
}

TEST_CASE("the shipped indoor-lite scenario file matches the preset")
{
    const ScenarioConfig file = load_scenario_config(source_dir + "/configs/indoor-lite.yaml");
    const Preset preset = make_preset("indoor-lite");
    CHECK(scenario_json(file) == scenario_json(preset.scenario));
    CHECK(scenario_hash(file) == scenario_hash(preset.scenario));
}

TEST_CASE("the shipped run files parse")
{
    const RunConfig p2 = load_run_config(source_dir + "/configs/run-p2.yaml");
    CHECK(p2.variant == Variant::P2);
    CHECK(p2.epochs == 60);
    CHECK(p2.seeds == std::vector<std::uint64_t>{1, 2, 3});
    REQUIRE(p2.p_thr.has_value());
    CHECK(*p2.p_thr == -44.0);
    CHECK(p2.loss.margin_t == 2.0);
    const RunConfig b3 = load_run_config(source_dir + "/configs/run-b3.yaml");
    CHECK(b3.variant == Variant::B3);
    CHECK(b3.label_count == 50);
    CHECK(b3.loss.weight_mse > 0.0);
}

TEST_CASE("scenario parsing fills defaults and rejects unknown keys")
{
    const ScenarioConfig s = parse_scenario_config(minimal_scenario);
    CHECK(s.name == "tiny");
    CHECK(s.seed == 4);
    CHECK(s.ap_count() == 2);
    CHECK(s.subcarrier_count == 52);
    CHECK(s.trajectory.step_m == 0.5);
    CHECK(s.trajectory.pattern == MeanderPattern::north_south);

    CHECK_THROWS_WITH_AS(parse_scenario_config(std::string(minimal_scenario) + "colour: blue\n"),
                         doctest::Contains("unknown key 'colour'"), data_error);
    CHECK_THROWS_AS(parse_scenario_config(std::string(minimal_scenario) + "walls: [[1, 2, 3]]\n"), data_error);
    CHECK_THROWS_AS(parse_scenario_config("name: x\n"), data_error);
    CHECK_THROWS_AS(parse_scenario_config("trajectory: [\n"), data_error);
}

TEST_CASE("the scenario hash tracks every field")
{
    const ScenarioConfig a = parse_scenario_config(minimal_scenario);
    ScenarioConfig b = a;
    CHECK(scenario_hash(a) == scenario_hash(b));
    b.aps[1].position.x() += 1e-9;
    CHECK(scenario_hash(a) != scenario_hash(b));
    CHECK(hash_hex("123456789") == "cbf43926");
}

TEST_CASE("run parsing derives weights from the variant")
{
    const RunConfig p1 = parse_run_config("variant: P1\n");
    CHECK(p1.loss.weight_t == 0.0);
    CHECK(p1.loss.weight_bi == 1.0);
    CHECK(p1.loss.weight_box == 1.0);
    CHECK(p1.loss.weight_mse == 0.0);
    CHECK_FALSE(p1.p_thr.has_value());

    const RunConfig b4 = parse_run_config("variant: B4\nloss: {weight_mse: 2.5}\n");
    CHECK(b4.loss.weight_mse == 2.5);
    CHECK(b4.loss.weight_t == 0.0);

    const RunConfig inf = parse_run_config("variant: B1\np_thr: -inf\n");
    REQUIRE(inf.p_thr.has_value());
    CHECK(std::isinf(*inf.p_thr));
    CHECK(*inf.p_thr < 0.0);

    CHECK_THROWS_AS(parse_run_config("variant: B3\n"), data_error);
    CHECK_THROWS_AS(parse_run_config("variant: B1\nloss: {weight_bi: 1}\n"), data_error);
    CHECK_THROWS_AS(parse_run_config("variant: B1\nlearning_rate: fast\n"), data_error);
    CHECK_THROWS_AS(parse_run_config("variant: B1\nloss: {margin: 1}\n"), data_error);
    CHECK_THROWS_AS(parse_run_config("variant: Q9\n"), data_error);
}

TEST_CASE("the run hash ignores seeds only")
{
    RunConfig a = parse_run_config("variant: P2\nseeds: [1, 2]\n");
    RunConfig b = parse_run_config("variant: P2\nseeds: [7]\n");
    CHECK(run_config_hash(a) == run_config_hash(b));
    b.loss.margin_b = 1.5;
    CHECK(run_config_hash(a) != run_config_hash(b));
    RunConfig c = a;
    c.p_thr = -30.0;
    CHECK(run_config_hash(a) != run_config_hash(c));
}

TEST_CASE("presets are known by name")
{
    for (const auto &name : preset_names())
    {
        const Preset p = make_preset(name);
        CHECK(p.name == name);
        REQUIRE(p.runs.size() == 6);
        CHECK(preset_run(p, Variant::B4).variant == Variant::B4);
        CHECK_NOTHROW(p.scenario.validate());
    }
    CHECK_THROWS_AS(make_preset("basement"), data_error);
}
