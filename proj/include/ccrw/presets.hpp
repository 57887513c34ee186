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
#include <vector>

#include "ccrw/sim.hpp"
#include "ccrw/train.hpp"

namespace ccrw
{
    // A named scenario with the loss hyperparameters and label budgets of every variant.
    struct Preset
    {
        std::string name;
        ScenarioConfig scenario;
        double p_thr = 0.0; // LoS power threshold, dB
        double m_p = 3.0;   // pair power margin, dB
        std::vector<RunConfig> runs; // one per variant, in P1, P2, B1, B2, B3, B4 order
    };

    std::vector<std::string> preset_names();
    // Throws data_error for unknown names.
    Preset make_preset(std::string_view name);
    const RunConfig &preset_run(const Preset &preset, Variant v);
}
