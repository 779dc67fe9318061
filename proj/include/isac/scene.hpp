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

#ifndef ISAC_SCENE_HPP
#define ISAC_SCENE_HPP

#include "isac/array.hpp"

#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace isac
{
    // OFDM grid parameters. Powers are in mW, so n0 is in mW/Hz.
    struct OfdmNumerology
    {
        int p_count = 256;       // subcarriers P
        int q_count = 256;       // OFDM symbols Q
        double delta_f = 120e3;  // Hz
        double t_cp = 2.0833e-6; // s
        double t_o = 1.0 / 120e3 + 2.0833e-6;
        double f_c = 28e9;                    // Hz
        double n0 = 1.2589254117941673e-17; // -169 dBm/Hz in mW/Hz

        static OfdmNumerology make(int p, int q, double delta_f, double t_cp, double f_c, double n0_dbm_hz);

        double sigma2_re() const { return delta_f * n0; }            // per resource element and antenna
        double sigma2_full() const { return p_count * delta_f * n0; } // full-band
        double wavelength() const { return speed_of_light / f_c; }
        void validate() const;
    };

    struct PathSpec
    {
        cplx alpha{1.0, 0.0};
        AngleAzZe angle;
        double delay = 0.0;   // s, relative to the synchronised path
        double doppler = 0.0; // Hz, relative
    };

    struct TargetSpec
    {
        AngleAzZe angle;
        double range = 1.0;    // m
        double velocity = 0.0; // radial, m/s
        cplx alpha{1.0, 0.0};
        std::optional<double> rcs_dbsm;

        double delay() const;
        double doppler(const OfdmNumerology &num) const;
    };

    double range_to_delay(double range_m);
    double delay_to_range(double delay_s);
    double velocity_to_doppler(double velocity, const OfdmNumerology &num);
    double doppler_to_velocity(double doppler, const OfdmNumerology &num);

    // h such that h^H = sum_l alpha_l a_l^T exp(j2pi(fD_l q T_O - p df tau_l))
    CVec ue_channel_at(const std::vector<PathSpec> &ue, const Upa &upa, const OfdmNumerology &num, int p, int q);

    struct ChannelStats
    {
        CMat r;          // R_u
        double lambda2;  // largest eigenvalue
        CVec h_u;        // unit-norm dominant eigenvector
        double lambda() const;
    };

    // Mean of h h^H over the resource elements in gamma_u, with its dominant eigenpair
    ChannelStats channel_covariance(const std::vector<PathSpec> &ue, const Upa &upa, const OfdmNumerology &num,
                                    const std::vector<std::pair<int, int>> &gamma_u);

    // Monostatic radar equation magnitude with a uniform random phase
    cplx alpha_from_rcs(double rcs_dbsm, double range_m, const OfdmNumerology &num, std::mt19937_64 &rng);
    double alpha_magnitude_from_rcs(double rcs_dbsm, double range_m, const OfdmNumerology &num);

    // exp(-j2pi p df tau) exp(j2pi fD q T_O)
    cplx target_phase(const TargetSpec &target, const OfdmNumerology &num, int p, int q);
}

#endif
