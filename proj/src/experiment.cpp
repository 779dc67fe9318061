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

#include "isac/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <tuple>

#include <omp.h>

namespace isac
{
    SchemeSetup make_setup(const ExperimentConfig &cfg, const SceneSpec &scene, Scheme scheme)
    {
        if (scene.users.empty())
            throw ConfigError("scene '" + scene.name + "' has no users");
        SchemeSetup s;
        s.scheme = scheme;
        try
        {
            s.plan = build_resource_plan(cfg.num, (int)scene.users.size(), scheme, cfg.kappa_p, cfg.kappa_q,
                                         cfg.p_start, cfg.q_start);
        }
        catch (const InvalidArgument &e)
        {
            throw ConfigError(e.what());
        }
        s.sigma2 = cfg.num.sigma2_full();
        for (size_t u = 0; u < scene.users.size(); ++u)
        {
            const auto set = s.plan.user_set((int)u);
            s.stats.push_back(set.empty() ? ChannelStats{} : channel_covariance(scene.users[u], cfg.upa, cfg.num, set));
        }

        const double gamma = db_to_linear(cfg.gamma_bar_db);
        const double search_ratio = db_to_linear(cfg.e_min_ratio_dbm); // mW
        const double track_ratio = db_to_linear(cfg.track_ratio_db);
        const double kappa = s.plan.kappa();
        if (scheme == Scheme::dedicated && kappa < 1.0)
        {
            s.e_min = calibrate_power_ratio(Stage::search, kappa, gamma, search_ratio).sensing;
            s.gamma_s_bar = calibrate_power_ratio(Stage::track, kappa, gamma, track_ratio).sensing;
        }
        else
        {
            s.e_min = proposed_thresholds(Stage::search, gamma, search_ratio).sensing;
            s.gamma_s_bar = proposed_thresholds(Stage::track, gamma, track_ratio).sensing;
        }
        s.gamma_bar = gamma;
        return s;
    }

    namespace
    {
        bool has_user(const SchemeSetup &s, size_t u) { return s.stats[u].r.size() != 0; }

        // Single-constraint communication beam meeting gamma_bar on the statistical channel
        CVec comm_beam(const SchemeSetup &s, size_t u)
        {
            const auto &st = s.stats[u];
            return st.h_u * (std::sqrt(s.sigma2 * s.gamma_bar) / st.lambda());
        }
    }

    BeamPlan design_search_beams(const ExperimentConfig &cfg, const SchemeSetup &setup)
    {
        const ResourcePlan &plan = setup.plan;
        BeamPlan bp = BeamPlan::empty(cfg.upa.size(), plan.users, plan.q_count);
        const int mn = cfg.upa.size();
        if (setup.scheme == Scheme::zero)
        {
            bp.schedule = sweep_schedule(cfg.upa, plan.q_count);
            bp.sweep_offset = 0;
            const auto &sc = *bp.schedule;
            for (int u = 0; u < plan.users; ++u)
            {
                if (!has_user(setup, u))
                    continue;
                const auto &st = setup.stats[u];
                for (int nb = 0; nb < sc.beam_count(); ++nb)
                {
                    const AngleAzZe &ang = sc.block_angle(nb);
                    CVec f = cfg.search_design == BeamDesign::sdr
                                 ? search_beam_sdr(st.h_u, st.lambda(), ang, setup.gamma_bar, setup.e_min,
                                                   setup.sigma2, cfg.upa)
                                       .f
                                 : search_beam_closed_form(st.h_u, st.lambda(), ang, setup.gamma_bar, setup.e_min,
                                                           setup.sigma2, cfg.upa);
                    for (int q = nb * sc.symbols_per_beam; q < (nb + 1) * sc.symbols_per_beam; ++q)
                        bp.user_beam(u, q) = f;
                }
            }
        }
        else
        {
            bp.schedule = sweep_schedule(cfg.upa, plan.q_len);
            bp.sweep_offset = plan.q_start;
            const auto &sc = *bp.schedule;
            for (int qs = 0; qs < sc.total_symbols; ++qs)
                bp.sensing_beam(plan.q_start + qs) =
                    mrt(sc.beams[qs], cfg.upa) * std::sqrt(setup.e_min / double(mn));
            for (int u = 0; u < plan.users; ++u)
                if (has_user(setup, u))
                {
                    const CVec f = comm_beam(setup, u);
                    for (int q = 0; q < plan.q_count; ++q)
                        bp.user_beam(u, q) = f;
                }
        }
        return bp;
    }

    BeamPlan design_track_beams(const ExperimentConfig &cfg, const SchemeSetup &setup,
                                const std::vector<TrackPrior> &priors)
    {
        if (priors.empty())
            throw InvalidArgument("design_track_beams: empty track set");
        const ResourcePlan &plan = setup.plan;
        BeamPlan bp = BeamPlan::empty(cfg.upa.size(), plan.users, plan.q_count);
        if (setup.scheme == Scheme::zero)
        {
            for (int u = 0; u < plan.users; ++u)
            {
                if (!has_user(setup, u))
                    continue;
                const auto &st = setup.stats[u];
                const CVec f = track_beam_shared(st.h_u, st.lambda(), priors, setup.gamma_bar, setup.gamma_s_bar,
                                                 setup.sigma2, cfg.upa)
                                   .f;
                for (int q = 0; q < plan.q_count; ++q)
                    bp.user_beam(u, q) = f;
            }
        }
        else
        {
            const CVec fs = track_beam_dedicated(priors, setup.gamma_s_bar, setup.sigma2, cfg.upa).f;
            for (int q = plan.q_start; q < plan.q_start + plan.q_len; ++q)
                bp.sensing_beam(q) = fs;
            for (int u = 0; u < plan.users; ++u)
                if (has_user(setup, u))
                {
                    const CVec f = comm_beam(setup, u);
                    for (int q = 0; q < plan.q_count; ++q)
                        bp.user_beam(u, q) = f;
                }
        }
        return bp;
    }

    void scale_to_power(BeamPlan &beams, const ResourcePlan &plan, double power_mw)
    {
        const double avg = average_transmit_power(plan, beams);
        if (!(avg > 0.0))
            throw InvalidArgument("scale_to_power: beam plan radiates no power");
        beams.scale(std::sqrt(power_mw / avg));
    }

    std::vector<TargetSpec> draw_targets(const SceneSpec &scene, std::uint64_t trial_seed)
    {
        std::mt19937_64 rng(stream_seed(trial_seed, 1));
        std::uniform_real_distribution<double> uni(0.0, 2.0 * pi);
        auto out = scene.targets;
        for (auto &t : out)
            t.alpha = std::polar(std::abs(t.alpha), uni(rng));
        return out;
    }

    std::vector<TrackPrior> draw_priors(const ExperimentConfig &cfg, const std::vector<TargetSpec> &targets,
                                        std::uint64_t trial_seed)
    {
        std::mt19937_64 rng(stream_seed(trial_seed, 3));
        std::normal_distribution<double> nd(0.0, 1.0);
        std::vector<TrackPrior> out;
        for (const auto &t : targets)
        {
            TrackPrior p;
            p.angle.azimuth = std::clamp(t.angle.azimuth + cfg.prior_angle_sigma_deg * nd(rng), 0.0, 180.0);
            p.angle.zenith = std::clamp(t.angle.zenith + cfg.prior_angle_sigma_deg * nd(rng), 0.0, 180.0);
            const double re = nd(rng), im = nd(rng);
            p.alpha = t.alpha * (1.0 + cfg.prior_alpha_sigma * cplx(re, im) / std::sqrt(2.0));
            out.push_back(p);
        }
        return out;
    }

    int distinct_angles(const std::vector<TargetSpec> &targets)
    {
        std::vector<AngleAzZe> seen;
        for (const auto &t : targets)
            if (std::none_of(seen.begin(), seen.end(), [&](const AngleAzZe &a) {
                    return std::abs(a.azimuth - t.angle.azimuth) < 1e-9 && std::abs(a.zenith - t.angle.zenith) < 1e-9;
                }))
                seen.push_back(t.angle);
        return (int)seen.size();
    }

    std::vector<TruthTarget> truth_of(const std::vector<TargetSpec> &targets, const OfdmNumerology &num)
    {
        std::vector<TruthTarget> out;
        for (const auto &t : targets)
            out.push_back({t.angle, t.delay(), t.doppler(num)});
        return out;
    }

    TrialRow run_trial(const ExperimentConfig &cfg, const SceneSpec &scene, const SchemeSetup &setup,
                       const BeamPlan &beams, Stage stage, std::uint64_t trial_seed,
                       const std::vector<TargetSpec> &targets, TrialCapture *capture)
    {
        TrialRow row;
        row.scene = scene.name;
        row.scheme = setup.scheme;
        row.stage = stage;
        row.targets = (int)targets.size();
        std::tie(row.comm_power, row.sensing_power) = power_split(setup.plan, beams);

        const SymbolGrid symbols = draw_symbols(stream_seed(trial_seed, 2), cfg.num);
        const SensingTensor tensor = synth_sensing_tensor(targets, cfg.upa, cfg.num, setup.plan, beams, symbols,
                                                          stream_seed(trial_seed, 4), cfg.num.sigma2_re());
        ChainInputs in;
        in.tensor = &tensor;
        in.symbols = &symbols;
        in.plan = &setup.plan;
        in.beams = &beams;
        in.upa = cfg.upa;
        in.num = cfg.num;
        in.stage = stage;
        ChainOptions opt = cfg.chain;
        if (cfg.k_a_policy == KaPolicy::truth)
            opt.k_a = distinct_angles(targets);
        DetectionReport rep = detect_targets(in, opt, capture ? &capture->trace : nullptr);

        Gates gates = default_gates(cfg.num, cfg.upa);
        if (cfg.gate_angle_deg)
            gates.angle_deg = *cfg.gate_angle_deg;
        if (cfg.gate_delay_s)
            gates.delay_s = *cfg.gate_delay_s;
        const ScoreReport sc = match_and_score(truth_of(targets, cfg.num), rep.targets, gates);
        row.detected = sc.detected_count;
        row.rmse_azimuth = sc.rmse_azimuth;
        row.rmse_zenith = sc.rmse_zenith;
        row.rmse_delay = sc.rmse_delay;
        row.rmse_doppler = sc.rmse_doppler;
        row.excluded_res = rep.excluded_res;
        row.zf_fallbacks = rep.zf_fallbacks;
        if (capture)
        {
            capture->tensor = tensor;
            capture->report = std::move(rep);
        }
        return row;
    }

    void configure_threads(int threads)
    {
        if (threads > 0)
            omp_set_num_threads(threads);
        omp_set_max_active_levels(1);
    }

    std::vector<TrialRow> run_sensing(const ExperimentConfig &cfg, Stage stage)
    {
        cfg.validate();
        configure_threads(cfg.threads);
        const int np = (int)cfg.powers_dbm.size();
        std::vector<TrialRow> all;
        for (size_t si = 0; si < cfg.scenes.size(); ++si)
        {
            const SceneSpec scene = load_scene(cfg.scene_path(si), cfg.num, cfg.seed);
            if (scene.targets.empty())
                throw ConfigError("scene '" + scene.name + "' has no targets");
            for (Scheme scheme : cfg.schemes)
            {
                const SchemeSetup setup = make_setup(cfg, scene, scheme);
                std::optional<BeamPlan> search_base;
                std::string design_error;
                if (stage == Stage::search)
                {
                    try
                    {
                        search_base = design_search_beams(cfg, setup);
                    }
                    catch (const SolverError &e)
                    {
                        design_error = e.what();
                    }
                }

                std::vector<TrialRow> rows((size_t)cfg.seeds * np);
#pragma omp parallel for schedule(dynamic)
                for (int s = 0; s < cfg.seeds; ++s)
                {
                    const std::uint64_t ts = stream_seed(cfg.seed, (std::uint64_t)s);
                    const auto targets = draw_targets(scene, ts);
                    std::optional<BeamPlan> base = search_base;
                    std::string err = design_error;
                    if (stage == Stage::track)
                    {
                        try
                        {
                            base = design_track_beams(cfg, setup, draw_priors(cfg, targets, ts));
                        }
                        catch (const SolverError &e)
                        {
                            err = e.what();
                        }
                    }
                    for (int ip = 0; ip < np; ++ip)
                    {
                        TrialRow &row = rows[(size_t)ip * cfg.seeds + s];
                        if (base)
                        {
                            BeamPlan beams = *base;
                            scale_to_power(beams, setup.plan, db_to_linear(cfg.powers_dbm[ip]));
                            row = run_trial(cfg, scene, setup, beams, stage, ts, targets);
                        }
                        else
                        {
                            row.scene = scene.name;
                            row.scheme = scheme;
                            row.stage = stage;
                            row.targets = (int)targets.size();
                            row.ok = false;
                            row.status = "solver_error";
                        }
                        row.power_dbm = cfg.powers_dbm[ip];
                        row.seed_index = s;
                    }
                }
                all.insert(all.end(), rows.begin(), rows.end());
            }
        }
        return all;
    }

    std::vector<std::string> dump_spectra(const ExperimentConfig &cfg, Stage stage, const std::string &dir)
    {
        cfg.validate();
        std::filesystem::create_directories(dir);
        std::vector<std::string> written;
        auto open = [&](const std::string &file) {
            const std::string path = (std::filesystem::path(dir) / file).string();
            std::ofstream os(path);
            if (!os)
                throw ConfigError("cannot write '" + path + "'");
            os << std::setprecision(10);
            written.push_back(path);
            return os;
        };
        const std::uint64_t ts = stream_seed(cfg.seed, 0);
        for (size_t si = 0; si < cfg.scenes.size(); ++si)
        {
            const SceneSpec scene = load_scene(cfg.scene_path(si), cfg.num, cfg.seed);
            if (scene.targets.empty())
                throw ConfigError("scene '" + scene.name + "' has no targets");
            const auto targets = draw_targets(scene, ts);
            for (Scheme scheme : cfg.schemes)
            {
                const SchemeSetup setup = make_setup(cfg, scene, scheme);
                BeamPlan beams = stage == Stage::search ? design_search_beams(cfg, setup)
                                                        : design_track_beams(cfg, setup, draw_priors(cfg, targets, ts));
                scale_to_power(beams, setup.plan, db_to_linear(cfg.powers_dbm.back()));
                TrialCapture cap;
                run_trial(cfg, scene, setup, beams, stage, ts, targets, &cap);

                const std::string base = scene.name + "_" + scheme_name(scheme) + "_" + stage_name(stage);
                const std::string bin = (std::filesystem::path(dir) / (base + "_tensor.bin")).string();
                write_tensor(cap.tensor, bin);
                written.push_back(bin);
                auto ms = open(base + "_music.csv");
                write_music_csv(ms, cap.trace.music, cap.trace.grid);
                for (size_t k = 0; k < cap.trace.periodograms.size(); ++k)
                {
                    auto ps = open(base + "_periodogram_" + std::to_string(k) + ".csv");
                    ps << "# angle " << cap.report.angles[(size_t)cap.trace.periodogram_angle[k]].angle.azimuth << ' '
                       << cap.report.angles[(size_t)cap.trace.periodogram_angle[k]].angle.zenith << '\n';
                    write_periodogram_csv(ps, cap.trace.periodograms[k]);
                }
            }
        }
        return written;
    }

    std::vector<SummaryRow> summarize(const std::vector<TrialRow> &rows)
    {
        std::vector<SummaryRow> out;
        std::map<std::tuple<std::string, int, int, double>, size_t> index;
        for (const auto &r : rows)
        {
            const auto key = std::make_tuple(r.scene, (int)r.scheme, (int)r.stage, r.power_dbm);
            auto it = index.find(key);
            if (it == index.end())
            {
                SummaryRow s;
                s.scene = r.scene;
                s.scheme = r.scheme;
                s.stage = r.stage;
                s.power_dbm = r.power_dbm;
                it = index.emplace(key, out.size()).first;
                out.push_back(s);
            }
            SummaryRow &s = out[it->second];
            ++s.trials;
            if (!r.ok)
            {
                ++s.failures;
                continue;
            }
            s.mean_detected += r.detected;
            s.all_detected += r.detected == r.targets ? 1.0 : 0.0;
            s.rmse_azimuth += r.rmse_azimuth * r.rmse_azimuth;
            s.rmse_zenith += r.rmse_zenith * r.rmse_zenith;
            s.rmse_delay += r.rmse_delay * r.rmse_delay;
            s.rmse_doppler += r.rmse_doppler * r.rmse_doppler;
        }
        for (auto &s : out)
        {
            const int n = s.trials - s.failures;
            if (n == 0)
                continue;
            s.mean_detected /= n;
            s.all_detected /= n;
            s.rmse_azimuth = std::sqrt(s.rmse_azimuth / n);
            s.rmse_zenith = std::sqrt(s.rmse_zenith / n);
            s.rmse_delay = std::sqrt(s.rmse_delay / n);
            s.rmse_doppler = std::sqrt(s.rmse_doppler / n);
        }
        return out;
    }

    double angle_rmse(const SummaryRow &r)
    {
        return std::sqrt(0.5 * (r.rmse_azimuth * r.rmse_azimuth + r.rmse_zenith * r.rmse_zenith));
    }

    std::optional<double> power_to_reach(const std::vector<SummaryRow> &rows, const std::string &scene,
                                         Scheme scheme, Stage stage, double target_deg)
    {
        std::vector<std::pair<double, double>> pts;
        for (const auto &r : rows)
            if (r.scene == scene && r.scheme == scheme && r.stage == stage && r.trials > r.failures)
                pts.emplace_back(r.power_dbm, angle_rmse(r));
        std::sort(pts.begin(), pts.end());
        for (size_t i = 0; i < pts.size(); ++i)
        {
            if (pts[i].second > target_deg)
                continue;
            if (i == 0)
                return pts[0].first;
            // log-RMSE is close to linear in dB between neighbouring sweep points
            const double l0 = std::log(std::max(pts[i - 1].second, 1e-300)), l1 = std::log(std::max(pts[i].second, 1e-300));
            const double lt = std::log(target_deg);
            const double t = l0 == l1 ? 1.0 : (l0 - lt) / (l0 - l1);
            return pts[i - 1].first + t * (pts[i].first - pts[i - 1].first);
        }
        return std::nullopt;
    }

    std::vector<RateRow> run_comm(const ExperimentConfig &cfg)
    {
        cfg.validate();
        configure_threads(cfg.threads);
        std::vector<RateRow> out;
        for (size_t si = 0; si < cfg.scenes.size(); ++si)
        {
            const SceneSpec scene = load_scene(cfg.scene_path(si), cfg.num, cfg.seed);
            for (Scheme scheme : cfg.schemes)
            {
                const SchemeSetup setup = make_setup(cfg, scene, scheme);
                for (Stage stage : {Stage::search, Stage::track})
                {
                    BeamPlan base;
                    if (stage == Stage::search)
                        base = design_search_beams(cfg, setup);
                    else
                    {
                        std::vector<TrackPrior> priors;
                        for (const auto &t : scene.targets)
                            priors.push_back({t.angle, cplx(std::abs(t.alpha), 0.0)});
                        if (priors.empty())
                            throw ConfigError("scene '" + scene.name + "' has no targets to track");
                        base = design_track_beams(cfg, setup, priors);
                    }
                    const size_t first = out.size();
                    out.resize(first + cfg.powers_dbm.size());
#pragma omp parallel for schedule(static)
                    for (int ip = 0; ip < (int)cfg.powers_dbm.size(); ++ip)
                    {
                        BeamPlan beams = base;
                        scale_to_power(beams, setup.plan, db_to_linear(cfg.powers_dbm[ip]));
                        RateRow r;
                        r.scene = scene.name;
                        r.scheme = scheme;
                        r.stage = stage;
                        r.power_dbm = cfg.powers_dbm[ip];
                        r.sum_rate = sum_rate(setup.plan, scene.users, beams, cfg.upa, cfg.num);
                        std::tie(r.comm_power, r.sensing_power) = power_split(setup.plan, beams);
                        out[first + ip] = r;
                    }
                }
            }
        }
        return out;
    }

    BeampatternResult emit_beampattern(const ExperimentConfig &cfg)
    {
        cfg.validate();
        const auto &bs = cfg.beampattern;
        const Upa &upa = cfg.upa;
        const double mn = upa.size();
        const CVec h_u = steering_vector(upa, bs.user).conjugate() / std::sqrt(mn);
        const double lambda_u = bs.user_alpha * std::sqrt(mn);
        const double sigma2 = cfg.num.sigma2_full();
        const double gamma = db_to_linear(bs.gamma_bar_db);
        const double e_min =
            bs.e_min_matches_comm ? gamma * sigma2 / (lambda_u * lambda_u) : db_to_linear(bs.e_min_dbm);

        const CVec f_mrt = h_u * (std::sqrt(sigma2 * gamma) / lambda_u);
        const QcqpResult sdr = search_beam_sdr(h_u, lambda_u, bs.sensing, gamma, e_min, sigma2, upa);
        const CVec f_cf = search_beam_closed_form(h_u, lambda_u, bs.sensing, gamma, e_min, sigma2, upa);

        BeampatternResult res;
        res.power_mrt = f_mrt.squaredNorm();
        res.power_sdr = sdr.power;
        res.power_closed_form = f_cf.squaredNorm();
        res.sdr_bound = sdr.sdr_bound;
        const int n = (int)std::floor(180.0 / bs.grid_step_deg + 1e-9) + 1;
        res.rows.resize((size_t)n * n);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
            {
                const AngleAzZe ang{i * bs.grid_step_deg, j * bs.grid_step_deg};
                res.rows[(size_t)i * n + j] = {ang.azimuth, ang.zenith, beam_gain(upa, f_mrt, ang),
                                               beam_gain(upa, sdr.f, ang), beam_gain(upa, f_cf, ang)};
            }
        return res;
    }

    std::vector<CrlbRow> crlb_table(const ExperimentConfig &cfg)
    {
        cfg.validate();
        const SceneSpec scene = load_scene(cfg.scene_path(0), cfg.num, cfg.seed);
        if (scene.targets.empty())
            throw ConfigError("crlb: the first scene has no targets");
        const double a = std::abs(scene.targets[0].alpha);
        const double gain2 = a * a * cfg.upa.size(); // unit-norm matched beam
        std::vector<CrlbRow> out;
        for (double kp : cfg.crlb_kappas)
            for (double kq : cfg.crlb_kappas)
            {
                if (kp * cfg.num.p_count <= 1.0 || kq * cfg.num.q_count <= 1.0)
                    continue;
                const auto [dt, df] = resolution(cfg.num, kp, kq);
                for (double p : cfg.powers_dbm)
                {
                    const AcrbReport r = acrb(cfg.num, kp, kq, gain2, db_to_linear(p), cfg.upa);
                    out.push_back({kp, kq, p, r.acrb_delay, r.acrb_doppler, dt, df});
                }
            }
        return out;
    }

    namespace
    {
        void header(std::ostream &os, const char *kind)
        {
            os << "# isac_sim " << kind << " schema " << csv_schema_version << '\n';
            os << std::setprecision(10);
        }
    }

    void write_csv(std::ostream &os, const std::vector<TrialRow> &rows)
    {
        header(os, "trials");
        os << "scene,scheme,stage,power_dbm,seed,status,targets,detected,rmse_azimuth_deg,rmse_zenith_deg,"
              "rmse_delay_s,rmse_doppler_hz,excluded_res,zf_fallbacks,comm_power_mw,sensing_power_mw\n";
        for (const auto &r : rows)
            os << r.scene << ',' << scheme_name(r.scheme) << ',' << stage_name(r.stage) << ',' << r.power_dbm << ','
               << r.seed_index << ',' << r.status << ',' << r.targets << ',' << r.detected << ',' << r.rmse_azimuth
               << ',' << r.rmse_zenith << ',' << r.rmse_delay << ',' << r.rmse_doppler << ',' << r.excluded_res << ','
               << r.zf_fallbacks << ',' << r.comm_power << ',' << r.sensing_power << '\n';
    }

    void write_csv(std::ostream &os, const std::vector<SummaryRow> &rows)
    {
        header(os, "summary");
        os << "scene,scheme,stage,power_dbm,trials,failures,mean_detected,all_detected,rmse_azimuth_deg,"
              "rmse_zenith_deg,rmse_delay_s,rmse_doppler_hz\n";
        for (const auto &r : rows)
            os << r.scene << ',' << scheme_name(r.scheme) << ',' << stage_name(r.stage) << ',' << r.power_dbm << ','
               << r.trials << ',' << r.failures << ',' << r.mean_detected << ',' << r.all_detected << ','
               << r.rmse_azimuth << ',' << r.rmse_zenith << ',' << r.rmse_delay << ',' << r.rmse_doppler << '\n';
    }

    void write_csv(std::ostream &os, const std::vector<RateRow> &rows)
    {
        header(os, "rates");
        os << "scene,scheme,stage,power_dbm,sum_rate_bps,comm_power_mw,sensing_power_mw\n";
        for (const auto &r : rows)
            os << r.scene << ',' << scheme_name(r.scheme) << ',' << stage_name(r.stage) << ',' << r.power_dbm << ','
               << r.sum_rate << ',' << r.comm_power << ',' << r.sensing_power << '\n';
    }

    void write_csv(std::ostream &os, const BeampatternResult &res)
    {
        header(os, "beampattern");
        os << "azimuth_deg,zenith_deg,gain_mrt,gain_sdr,gain_closed_form\n";
        for (const auto &r : res.rows)
            os << r.azimuth << ',' << r.zenith << ',' << r.gain_mrt << ',' << r.gain_sdr << ','
               << r.gain_closed_form << '\n';
    }

    void write_power_table(std::ostream &os, const BeampatternResult &res)
    {
        header(os, "beam_power");
        os << "design,power_mw,excess_over_sdr_db\n";
        os << "mrt_user_only," << res.power_mrt << ",\n";
        os << "sdr," << res.power_sdr << ',' << 0.0 << '\n';
        os << "sdr_bound," << res.sdr_bound << ",\n";
        os << "closed_form," << res.power_closed_form << ','
           << linear_to_db(res.power_closed_form / res.power_sdr) << '\n';
    }

    void write_csv(std::ostream &os, const std::vector<CrlbRow> &rows)
    {
        header(os, "crlb");
        os << "kappa_p,kappa_q,power_dbm,acrb_delay_s2,acrb_doppler_hz2,delay_step_s,doppler_step_hz\n";
        for (const auto &r : rows)
            os << r.kappa_p << ',' << r.kappa_q << ',' << r.power_dbm << ',' << r.acrb_delay << ','
               << r.acrb_doppler << ',' << r.delay_step << ',' << r.doppler_step << '\n';
    }
}
