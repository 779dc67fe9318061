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

#ifndef ISAC_BEAMFORM_HPP
#define ISAC_BEAMFORM_HPP

#include "isac/gridsim.hpp"
#include "isac/sdp.hpp"

#include <vector>

namespace isac
{
    CVec mrt(const AngleAzZe &angle, const Upa &upa);

    // min ||f||^2 s.t. lambda_u^2 |h_u^H f|^2 / sigma2 >= gamma_bar and |a_s^T f|^2 >= MN e_min
    QcqpResult search_beam_sdr(const CVec &h_u, double lambda_u, const AngleAzZe &angle_s, double gamma_bar,
                               double e_min, double sigma2, const Upa &upa, const QcqpOptions &opt = {});

    // f = a_u h_u + b e^{j phi} conj(a_s)
    CVec search_beam_closed_form(const CVec &h_u, double lambda_u, const AngleAzZe &angle_s, double gamma_bar,
                                 double e_min, double sigma2, const Upa &upa);

    struct TrackPrior
    {
        AngleAzZe angle;
        cplx alpha;
    };

    // |alpha_k a_k^T f|^2 / sigma2 >= gamma_s_bar for every prior
    QcqpResult track_beam_dedicated(const std::vector<TrackPrior> &track_set, double gamma_s_bar, double sigma2,
                                    const Upa &upa, const QcqpOptions &opt = {});

    // as above plus the user SNR constraint
    QcqpResult track_beam_shared(const CVec &h_u, double lambda_u, const std::vector<TrackPrior> &track_set,
                                 double gamma_bar, double gamma_s_bar, double sigma2, const Upa &upa,
                                 const QcqpOptions &opt = {});

    // Unit-norm combiner toward angles[k] with nulls on every other angle
    CVec zf_extractor(const std::vector<AngleAzZe> &angles, size_t k, const Upa &upa);

    enum class Stage
    {
        search,
        track
    };

    const char *stage_name(Stage s);

    struct Thresholds
    {
        double gamma_bar = 1.0; // communication SNR threshold
        double sensing = 0.0;   // e_min (search) or gamma_s_bar (track)
    };

    // Dedicated-mode thresholds with the same communication/sensing power ratio as the zero-overhead scheme.
    // base_ratio: e_min,P / gamma_P in mW (search) or gamma_P / gamma_s,P (track).
    Thresholds calibrate_power_ratio(Stage stage, double kappa, double base_gamma, double base_ratio);

    // Zero-overhead thresholds for the same base values
    Thresholds proposed_thresholds(Stage stage, double base_gamma, double base_ratio);
}

#endif
