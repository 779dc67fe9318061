// SPDX-License-Identifier: Apache-2.0
//
// isac-sim: multi-user MIMO-OFDM integrated sensing and communication simulator
// Copyright (C) 2026 The isac-sim Authors
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

#ifndef ISAC_ARRAY_HPP
#define ISAC_ARRAY_HPP

#include "isac/common.hpp"

#include <vector>

namespace isac
{
    // Uniform planar array with m elements along x and n along z.
    // Element (mi, ni) maps to Kronecker index mi * n + ni.
    struct Upa
    {
        int m = 1;
        int n = 1;
        double spacing = 0.5; // element spacing in wavelengths

        int size() const { return m * n; }
        void validate() const;
    };

    // Angles in degrees, both in [0, 180]
    struct AngleAzZe
    {
        double azimuth = 90.0;
        double zenith = 90.0;

        void validate() const;
    };

    // One beam per sweep symbol; blocks of symbols_per_beam consecutive symbols share a beam
    struct SweepSchedule
    {
        std::vector<AngleAzZe> beams;
        int symbols_per_beam = 1;
        int total_symbols = 0;

        int beam_count() const { return total_symbols / symbols_per_beam; }
        int block_of(int q_sweep) const { return q_sweep / symbols_per_beam; }
        const AngleAzZe &block_angle(int block) const { return beams[(size_t)block * symbols_per_beam]; }
    };

    // Steering vector from direction cosines u = cos(az) sin(ze), v = cos(ze)
    CVec steering_vector_uv(const Upa &upa, double u, double v);

    CVec steering_vector(const Upa &upa, const AngleAzZe &angle);

    SweepSchedule sweep_schedule(const Upa &upa, int total_symbols);

    // Element indices of the (i, j)th m_sub x n_sub subarray, row-major
    std::vector<int> subarray_indices(const Upa &upa, int i, int j, int m_sub, int n_sub);

    // |a(angle)^T f|^2
    double beam_gain(const Upa &upa, const CVec &f, const AngleAzZe &angle);
}

#endif
