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

#include <stdexcept>
#include <string>

namespace ccrw
{
    // Input data is malformed, inconsistent, or violates a documented precondition.
    class data_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Persisted payload does not match the checksum recorded in its manifest.
    class checksum_error : public data_error
    {
    public:
        using data_error::data_error;
    };

    // Manifest schema version is not understood by this build.
    class version_error : public data_error
    {
    public:
        using data_error::data_error;
    };

    // Binary payload is shorter than the manifest says it should be.
    class truncated_error : public data_error
    {
    public:
        using data_error::data_error;
    };

    // A computation produced non-finite values or hit a degenerate configuration.
    class numerical_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}
