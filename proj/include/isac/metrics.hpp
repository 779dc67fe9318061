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

#ifndef ISAC_METRICS_HPP
#define ISAC_METRICS_HPP

#include "isac/sensing.hpp"

#include <utility>
#include <vector>

namespace isac
{
    struct AcrbReport
    {
        double acrb_delay = 0.0;   // s^2
        double acrb_doppler = 0.0; // Hz^2
        double kappa_p = 1.0, kappa_q = 1.0;
        double p_tx_s = 0.0; // mW
        double gain2 = 0.0;  // |alpha a^T f_bar|^2
    };

    // Averaged bounds for delay and Doppler on a kappa_p P x kappa_q Q sensing block
    AcrbReport acrb(const OfdmNumerology &num, double kappa_p, double kappa_q, double gain2, double p_tx_s,
                    const Upa &upa);

    // (delay step 1 / (kappa_p P df), Doppler step 1 / (kappa_q Q T_O))
    std::pair<double, double> resolution(const OfdmNumerology &num, double kappa_p, double kappa_q);

    // Rate of one LoS user with MRT on the (1 - kappa) share, in bits/s
    double dedicated_rate_closed_form(const OfdmNumerology &num, double kappa, double p_tx_c, double alpha_u,
                                      const Upa &upa);

    struct Gates
    {
        double angle_deg = 0.0; // per angle axis
        double delay_s = 0.0;
    };

    // One resolution cell: (180 / pi) / M degrees and 1 / (P df)
    Gates default_gates(const OfdmNumerology &num, const Upa &upa);

    struct TruthTarget
    {
        AngleAzZe angle;
        double delay = 0.0;
        double doppler = 0.0;
    };

    struct ScoreReport
    {
        int detected_count = 0;
        double rmse_azimuth = 0.0; // deg
        double rmse_zenith = 0.0;  // deg
        double rmse_delay = 0.0;   // s
        double rmse_doppler = 0.0; // Hz
        std::vector<char> matched; // per truth target
        std::vector<int> match_of; // estimate index per truth target, -1 if missed
    };

    // Greedy nearest-neighbour assignment in gate-normalised (azimuth, zenith, delay) space. A missed target
    // counts 90 degrees of angle error, the truth delay spread as delay error and the truth Doppler spread as
    // Doppler error.
    ScoreReport match_and_score(const std::vector<TruthTarget> &truth, const std::vector<DetectedTarget> &est,
                                const Gates &gates);
}

#endif
