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

#ifndef ISAC_EXPERIMENT_HPP
#define ISAC_EXPERIMENT_HPP

#include "isac/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace isac
{
    inline constexpr int csv_schema_version = 1;

    // Plan, channel statistics and thresholds shared by every trial of one (scene, scheme) pair
    struct SchemeSetup
    {
        Scheme scheme = Scheme::zero;
        ResourcePlan plan;
        std::vector<ChannelStats> stats; // per user; empty r when the user has no resources
        double sigma2 = 0.0;             // full-band noise used by the design constraints
        double gamma_bar = 1.0;
        double e_min = 0.0;       // search sensing threshold in force for this scheme
        double gamma_s_bar = 0.0; // track sensing threshold in force for this scheme
    };

    SchemeSetup make_setup(const ExperimentConfig &cfg, const SceneSpec &scene, Scheme scheme);

    // Beams at the base thresholds; callers rescale them to the requested average power
    BeamPlan design_search_beams(const ExperimentConfig &cfg, const SchemeSetup &setup);
    BeamPlan design_track_beams(const ExperimentConfig &cfg, const SchemeSetup &setup,
                                const std::vector<TrackPrior> &priors);

    // Scale every beam so the mean per-RE transmit power equals power_mw
    void scale_to_power(BeamPlan &beams, const ResourcePlan &plan, double power_mw);

    // Targets with per-trial random phases
    std::vector<TargetSpec> draw_targets(const SceneSpec &scene, std::uint64_t trial_seed);
    // Truth perturbed by the configured prior noise, one prior per target
    std::vector<TrackPrior> draw_priors(const ExperimentConfig &cfg, const std::vector<TargetSpec> &targets,
                                        std::uint64_t trial_seed);
    int distinct_angles(const std::vector<TargetSpec> &targets);
    std::vector<TruthTarget> truth_of(const std::vector<TargetSpec> &targets, const OfdmNumerology &num);

    struct TrialRow
    {
        std::string scene;
        Scheme scheme = Scheme::zero;
        Stage stage = Stage::search;
        double power_dbm = 0.0;
        int seed_index = 0;
        bool ok = true;
        std::string status = "ok";
        int targets = 0;
        int detected = 0;
        double rmse_azimuth = 0.0, rmse_zenith = 0.0, rmse_delay = 0.0, rmse_doppler = 0.0;
        size_t excluded_res = 0;
        int zf_fallbacks = 0;
        double comm_power = 0.0, sensing_power = 0.0; // mW per RE
    };

    struct SummaryRow
    {
        std::string scene;
        Scheme scheme = Scheme::zero;
        Stage stage = Stage::search;
        double power_dbm = 0.0;
        int trials = 0;
        int failures = 0;
        double mean_detected = 0.0;
        double all_detected = 0.0; // fraction of trials detecting every target
        double rmse_azimuth = 0.0, rmse_zenith = 0.0, rmse_delay = 0.0, rmse_doppler = 0.0;
    };

    // Everything a trial produced, for dumps
    struct TrialCapture
    {
        SensingTensor tensor;
        DetectionReport report;
        ChainTrace trace;
    };

    // One Monte Carlo trial with pre-designed beams already scaled to power
    TrialRow run_trial(const ExperimentConfig &cfg, const SceneSpec &scene, const SchemeSetup &setup,
                       const BeamPlan &beams, Stage stage, std::uint64_t trial_seed,
                       const std::vector<TargetSpec> &targets, TrialCapture *capture = nullptr);

    // Reruns seed 0 at the top power for every scene and scheme and writes the tensor, the MUSIC spectrum and
    // the periodograms into dir. Returns the files written.
    std::vector<std::string> dump_spectra(const ExperimentConfig &cfg, Stage stage, const std::string &dir);

    // Full sweep over scenes x schemes x seeds x powers, ordered by (scene, scheme, power, seed)
    std::vector<TrialRow> run_sensing(const ExperimentConfig &cfg, Stage stage);
    std::vector<SummaryRow> summarize(const std::vector<TrialRow> &rows);

    // Power (dBm, interpolated on the sweep) at which the mean angle RMSE first drops to target_deg
    std::optional<double> power_to_reach(const std::vector<SummaryRow> &rows, const std::string &scene,
                                         Scheme scheme, Stage stage, double target_deg);
    double angle_rmse(const SummaryRow &r);

    struct RateRow
    {
        std::string scene;
        Scheme scheme = Scheme::zero;
        Stage stage = Stage::search;
        double power_dbm = 0.0;
        double sum_rate = 0.0; // bits/s
        double comm_power = 0.0, sensing_power = 0.0;
    };
    std::vector<RateRow> run_comm(const ExperimentConfig &cfg);

    struct BeampatternRow
    {
        double azimuth, zenith;
        double gain_mrt, gain_sdr, gain_closed_form;
    };
    struct BeampatternResult
    {
        std::vector<BeampatternRow> rows;
        double power_mrt = 0.0, power_sdr = 0.0, power_closed_form = 0.0, sdr_bound = 0.0;
    };
    BeampatternResult emit_beampattern(const ExperimentConfig &cfg);

    struct CrlbRow
    {
        double kappa_p, kappa_q, power_dbm;
        double acrb_delay, acrb_doppler, delay_step, doppler_step;
    };
    std::vector<CrlbRow> crlb_table(const ExperimentConfig &cfg);

    void write_csv(std::ostream &os, const std::vector<TrialRow> &rows);
    void write_csv(std::ostream &os, const std::vector<SummaryRow> &rows);
    void write_csv(std::ostream &os, const std::vector<RateRow> &rows);
    void write_csv(std::ostream &os, const BeampatternResult &res);
    void write_power_table(std::ostream &os, const BeampatternResult &res);
    void write_csv(std::ostream &os, const std::vector<CrlbRow> &rows);

    // Applies cfg.threads and disables nested parallel regions
    void configure_threads(int threads);
}

#endif
