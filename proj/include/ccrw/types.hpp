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

#include <cmath>
#include <complex>

#include <Eigen/Core>

namespace ccrw
{
    using Vec2 = Eigen::Vector2d;
    using Vec3 = Eigen::Vector3d;

    // Dense real matrix; rows are samples wherever a matrix holds per-sample data.
    using Matrix = Eigen::MatrixXd;
    using Vector = Eigen::VectorXd;

    using ComplexMatrix = Eigen::MatrixXcd;

    // Storage type for CSI: single-precision complex, row-major (antenna rows, subcarrier/tap columns).
    using CsiMatrix = Eigen::Matrix<std::complex<float>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    // Axis-aligned rectangle in the xy-plane, meters.
    struct Rect
    {
        double x_min = 0.0;
        double x_max = 0.0;
        double y_min = 0.0;
        double y_max = 0.0;

        bool valid() const { return x_min < x_max && y_min < y_max; }
        bool contains(const Vec2 &p) const
        {
            return p.x() >= x_min && p.x() <= x_max && p.y() >= y_min && p.y() <= y_max;
        }
        double width() const { return x_max - x_min; }
        double height() const { return y_max - y_min; }
        double diagonal() const { return std::hypot(width(), height()); }
    };

    inline ComplexMatrix to_complex_double(const CsiMatrix &h) { return h.cast<std::complex<double>>(); }
    inline CsiMatrix to_csi(const ComplexMatrix &h) { return h.cast<std::complex<float>>(); }
}
