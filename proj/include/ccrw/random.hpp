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
#include <random>
#include <string_view>

namespace ccrw
{
    // splitmix64 finalizer; used to derive independent streams from a base seed.
    std::uint64_t mix_seed(std::uint64_t x);

    // Deterministic child seed for (base, stream label, index).
    std::uint64_t derive_seed(std::uint64_t base, std::string_view stream, std::uint64_t index = 0);

    using Rng = std::mt19937_64;

    inline Rng make_rng(std::uint64_t base, std::string_view stream, std::uint64_t index = 0)
    {
        return Rng(derive_seed(base, stream, index));
    }
}
