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

#include "isac/array.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace isac
{
    void Upa::validate() const
    {
        if (m < 1 || n < 1)
            throw InvalidArgument("Upa: element counts must be >= 1");
        if (!(spacing > 0.0) || !std::isfinite(spacing))
            throw InvalidArgument("Upa: spacing must be positive");
    }

    void AngleAzZe::validate() const
    {
        if (!std::isfinite(azimuth) || !std::isfinite(zenith) ||
            azimuth < 0.0 || azimuth > 180.0 || zenith < 0.0 || zenith > 180.0)
            throw InvalidArgument("angle out of range [0,180] deg: (" + std::to_string(azimuth) + ", " +
                                  std::to_string(zenith) + ")");
    }

    CVec steering_vector_uv(const Upa &upa, double u, double v)
    {
        CVec a(upa.size());
        const double kx = 2.0 * pi * upa.spacing * u;
        const double kz = 2.0 * pi * upa.spacing * v;
        for (int mi = 0; mi < upa.m; ++mi)
        {
            const cplx ax = std::polar(1.0, kx * mi);
            for (int ni = 0; ni < upa.n; ++ni)
                a[mi * upa.n + ni] = ax * std::polar(1.0, kz * ni);
        }
        return a;
    }

    CVec steering_vector(const Upa &upa, const AngleAzZe &angle)
    {
        angle.validate();
        const double phi = deg2rad(angle.azimuth), theta = deg2rad(angle.zenith);
        return steering_vector_uv(upa, std::cos(phi) * std::sin(theta), std::cos(theta));
    }

    SweepSchedule sweep_schedule(const Upa &upa, int total_symbols)
    {
        upa.validate();
        const long mn = upa.size();
        if (total_symbols <= 0 || total_symbols % mn != 0)
            throw InvalidArgument("sweep_schedule: total symbols must be a positive multiple of M*N");

        SweepSchedule s;
        s.total_symbols = total_symbols;
        s.symbols_per_beam = (int)(total_symbols / mn);
        s.beams.resize(total_symbols);
        for (long q = 0; q < total_symbols; ++q)
        {
            const long i = (upa.m * q) / total_symbols;
            const long j = ((q * mn) / total_symbols) % upa.n;
            const double cphi = (0.5 - double(i) / upa.m) / upa.spacing;
            const double cthe = (0.5 - double(j) / upa.n) / upa.spacing;
            if (std::abs(cphi) > 1.0 + 1e-12 || std::abs(cthe) > 1.0 + 1e-12)
                throw InvalidArgument("sweep_schedule: arccos argument outside [-1,1] (spacing < 1/2?)");
            s.beams[q].azimuth = rad2deg(std::acos(std::clamp(cphi, -1.0, 1.0)));
            s.beams[q].zenith = rad2deg(std::acos(std::clamp(cthe, -1.0, 1.0)));
        }
        return s;
    }

    std::vector<int> subarray_indices(const Upa &upa, int i, int j, int m_sub, int n_sub)
    {
        if (m_sub < 1 || n_sub < 1 || i < 0 || j < 0 || i + m_sub > upa.m || j + n_sub > upa.n)
            throw InvalidArgument("subarray_indices: subarray exceeds the array");
        std::vector<int> idx;
        idx.reserve((size_t)m_sub * n_sub);
        for (int a = 0; a < m_sub; ++a)
            for (int b = 0; b < n_sub; ++b)
                idx.push_back((i + a) * upa.n + (j + b));
        return idx;
    }

    double beam_gain(const Upa &upa, const CVec &f, const AngleAzZe &angle)
    {
        if (f.size() != upa.size())
            throw InvalidArgument("beam_gain: beamformer length does not match the array");
        return std::norm(steering_vector(upa, angle).cwiseProduct(f).sum());
    }
}
