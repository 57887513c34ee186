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
#include <string>
#include <vector>

namespace ccrw
{
    struct GradcheckSettings
    {
        int instances = 50;
        int input_dim = 32;
        int max_rows = 20;
        double step = 1e-4;
        // Instances with a ReLU pre-activation or a loss kink closer than this are redrawn, as are instances
        // where any +-step probe lands on the other side of a kink.
        double kink_margin = 1e-3;
        // Instances with a distance entering a norm below this fraction of the RMS chart coordinate are redrawn
        // (the norm is not smooth at 0 and its curvature grows as 1/d).
        double min_distance = 0.2;
        double tolerance = 1e-5;
        std::uint64_t seed = 1;
    };

    struct GradcheckCase
    {
        std::string loss;
        int instances = 0;
        int redraws = 0;
        // ||g_analytic - g_numeric|| / max(||g_analytic||, ||g_numeric||) over the full parameter vector.
        double max_relative_error = 0.0;
        // Per-parameter |a - n| / max(|a|, |n|, 1e-3 max|a|); diagnostic only.
        double max_component_error = 0.0;
        bool passed = false;
    };

    struct GradcheckReport
    {
        std::vector<GradcheckCase> cases; // triplet, bilateration, box, mse, multi
        double seconds = 0.0;
        bool passed() const;
    };

    // Central finite differences over every MLP parameter for each loss composed with the network.
    GradcheckReport run_gradcheck(const GradcheckSettings &settings = {});
}
