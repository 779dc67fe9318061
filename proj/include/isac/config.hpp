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

#ifndef ISAC_CONFIG_HPP
#define ISAC_CONFIG_HPP

#include "isac/metrics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace isac
{
    struct SceneSpec
    {
        std::string name;
        std::vector<std::vector<PathSpec>> users; // paths relative to each user's strongest path
        std::vector<TargetSpec> targets;          // alpha holds the magnitude; phases are drawn per trial
    };

    // JSON scene file. User path phases are drawn from phase_seed; delays and Dopplers are stored
    // relative to the strongest path.
    SceneSpec load_scene(const std::string &path, const OfdmNumerology &num, std::uint64_t phase_seed);
    SceneSpec parse_scene(const std::string &text, const OfdmNumerology &num, std::uint64_t phase_seed);

    enum class BeamDesign
    {
        sdr,
        closed_form
    };

    enum class KaPolicy
    {
        truth,
        estimate
    };

    struct BeampatternSpec
    {
        AngleAzZe user{105.0, 90.0};
        AngleAzZe sensing{60.0, 90.0};
        double user_alpha = 2.4e-5;
        double gamma_bar_db = 0.0;
        double e_min_dbm = 0.0; // 0 dBm: E_min equal to the communication term gamma sigma^2 / lambda^2 = 1 mW
        bool e_min_matches_comm = true;
        double grid_step_deg = 1.0;
    };

    struct ExperimentConfig
    {
        std::string name = "experiment";
        std::string scale = "desk";
        std::string base_dir = "."; // scene paths are resolved against this
        OfdmNumerology num;
        Upa upa;
        std::vector<std::string> scenes;
        std::vector<Scheme> schemes{Scheme::dedicated, Scheme::zero};
        double kappa_p = 0.5, kappa_q = 0.5;
        std::optional<int> p_start, q_start;
        std::vector<double> powers_dbm;
        int seeds = 50;
        std::uint64_t seed = 1;
        double gamma_bar_db = 0.0;
        double e_min_ratio_dbm = -30.0; // E_min / gamma_bar during search
        double track_ratio_db = 30.0;   // gamma_bar / gamma_s_bar during tracking
        BeamDesign search_design = BeamDesign::sdr;
        double prior_angle_sigma_deg = 0.2;
        double prior_alpha_sigma = 0.1; // relative
        ChainOptions chain;
        KaPolicy k_a_policy = KaPolicy::truth;
        std::optional<double> gate_angle_deg, gate_delay_s;
        BeampatternSpec beampattern;
        std::vector<double> crlb_kappas{0.125, 0.25, 0.5, 1.0};
        int threads = 0; // 0 keeps the OpenMP default

        void validate() const;
        std::string scene_path(size_t i) const;
    };

    // Built-in profiles: "desk" (4x4 array, 256 x 256 grid, 2 users) and "paper" (8x8, 1024 x 1024, 4 users)
    ExperimentConfig default_config(const std::string &scale);

    // Overlay a JSON config on the profile named by its "scale" key (or scale_override when given)
    ExperimentConfig load_config(const std::string &path, const std::optional<std::string> &scale_override = {});
    ExperimentConfig parse_config(const std::string &text, const std::string &base_dir,
                                  const std::optional<std::string> &scale_override = {});
}

#endif
