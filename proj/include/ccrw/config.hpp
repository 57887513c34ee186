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

#include <string>
#include <string_view>

#include "ccrw/sim.hpp"
#include "ccrw/train.hpp"

namespace ccrw
{
    // Scenario and run configuration files are YAML; unknown keys are rejected.
    ScenarioConfig parse_scenario_config(std::string_view yaml_text);
    ScenarioConfig load_scenario_config(const std::string &path);

    // Loss weights default to 1 for every loss the variant uses and 0 otherwise.
    RunConfig parse_run_config(std::string_view yaml_text);
    RunConfig load_run_config(const std::string &path);

    // Canonical JSON text (sorted keys, full precision).
    std::string scenario_json(const ScenarioConfig &cfg);
    std::string run_config_json(const RunConfig &cfg);

    // CRC-32 of the bytes, as 8 lowercase hex digits.
    std::string hash_hex(std::string_view bytes);

    std::string scenario_hash(const ScenarioConfig &cfg);
    // Seeds are excluded, so every run of a multi-seed experiment shares the hash.
    std::string run_config_hash(const RunConfig &cfg);
}
