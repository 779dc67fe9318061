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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are pinned below; the exit status is
// nonzero only under --strict (or on a harness error) so an honest FAIL stays visible without breaking ctest.
#include "isac/experiment.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace isac;

namespace
{
    // AC1 / AC2
    constexpr int ac1_instances = 500;
    constexpr double ac1_power_rel = 1e-3;
    constexpr double ac1_slack = 1e-6;
    constexpr double ac1_seconds = 60.0;
    constexpr double ac2_dominance_rel = 1e-9; // numerical allowance on closed-form >= SDR
    constexpr double ac2_equal_rel = 1e-6;
    // AC3
    constexpr double ac3_angle_deg = 1.0;
    constexpr double ac3_alpha_rel = 1e-6;
    constexpr double ac3_seconds = 300.0;
    // AC4
    constexpr double ac4_angle_deg = 1.0;
    constexpr double ac4_fraction = 0.8;
    // AC5
    constexpr double ac5_fraction = 0.9;
    constexpr double ac5_power_dbm = 80.0;
    // AC6
    constexpr int ac6_trials = 200;
    constexpr double ac6_crb_factor = 2.0;
    constexpr double ac6_oracle_rel = 1e-12;
    // AC7
    constexpr double ac7_rate_rel = 1e-9;
    // AC8
    constexpr double ac8_gap_db = 15.0;

    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    struct Options
    {
        int seeds = 50;
        int threads = 0;
        std::set<std::string> only;
        bool strict = false;
    };

    double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

    std::string fmt(const char *f, double a)
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, f, a);
        return buf;
    }

    double seconds_since(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    // Brute-force minimum of ||f||^2 over f = s * (cos t u1 + sin t e^{jp} u2) for two constraints in span{u1, u2}.
    // Coarse grid, then three zooms around the incumbent.
    double grid_min_power(const QcqpSpec &spec)
    {
        CMat g(spec.dim, 2);
        g << spec.constraints[0].g, spec.constraints[1].g;
        const CMat basis = Eigen::HouseholderQR<CMat>(g).householderQ() * CMat::Identity(spec.dim, 2);
        const CMat gr = basis.adjoint() * g;
        auto power_along = [&](double th, double ps) {
            const Eigen::Vector2cd u(std::cos(th), std::sin(th) * std::polar(1.0, ps));
            double s2 = 0.0;
            for (int k = 0; k < 2; ++k)
            {
                const double gain = std::norm(gr.col(k).dot(u));
                s2 = std::max(s2, gain > 0.0 ? spec.constraints[k].t / gain : 1e300);
            }
            return s2;
        };
        // for fixed theta both gains are sinusoids in the phase: the optimum phase is a gain maximiser
        // or a point where the two scaled gains cross, all in closed form
        auto best_phase = [&](double th) {
            double m = 1e300, lin[3] = {0.0, 0.0, 0.0};
            for (int k = 0; k < 2; ++k)
            {
                const cplx x = std::conj(gr(0, k)) * std::cos(th), y = std::conj(gr(1, k)) * std::sin(th);
                const cplx z = std::conj(x) * y;
                m = std::min(m, power_along(th, -std::arg(z)));
                const double w = k == 0 ? spec.constraints[1].t : -spec.constraints[0].t;
                lin[0] += w * (std::norm(x) + std::norm(y));
                lin[1] += w * 2.0 * z.real();
                lin[2] -= w * 2.0 * z.imag();
            }
            const double r = std::hypot(lin[1], lin[2]);
            if (r > 0.0 && std::abs(lin[0]) <= r)
                for (double sgn : {-1.0, 1.0})
                    m = std::min(m, power_along(th, std::atan2(lin[2], lin[1]) + sgn * std::acos(-lin[0] / r)));
            return m;
        };
        double best = 1e300, bt = 0.0, t_lo = 0.0, t_hi = 0.5 * pi;
        for (int level = 0; level < 5; ++level)
        {
            const int n = 400;
            for (int i = 0; i <= n; ++i)
            {
                const double th = std::clamp(t_lo + (t_hi - t_lo) * i / n, 0.0, 0.5 * pi);
                const double v = best_phase(th);
                if (v < best)
                {
                    best = v;
                    bt = th;
                }
            }
            const double wt = 4.0 * (t_hi - t_lo) / n;
            t_lo = bt - wt;
            t_hi = bt + wt;
        }
        return best;
    }

    struct SearchInstance
    {
        Upa upa;
        CVec h_u;
        double lambda_u, gamma, e_min, sigma2;
        AngleAzZe angle_s;
    };

    SearchInstance random_search_instance(std::mt19937_64 &rng)
    {
        static const Upa shapes[] = {{4, 4, 0.5}, {4, 5, 0.5}, {5, 5, 0.5}, {4, 8, 0.5}, {6, 6, 0.5},
                                     {5, 8, 0.5}, {6, 8, 0.5}, {7, 8, 0.5}, {8, 8, 0.5}};
        std::uniform_int_distribution<int> pick(0, 8);
        std::uniform_real_distribution<double> ang(0.0, 180.0), unit(0.0, 1.0);
        SearchInstance s;
        s.upa = shapes[pick(rng)];
        // a few-path user so h_u is not a pure steering vector
        CVec h = CVec::Zero(s.upa.size());
        for (int l = 0; l < 3; ++l)
            h += std::polar(l == 0 ? 1.0 : 0.3 * unit(rng), 2.0 * pi * unit(rng)) *
                 steering_vector(s.upa, {ang(rng), ang(rng)}).conjugate();
        s.h_u = h / h.norm();
        s.lambda_u = 1e-5 * (1.0 + 9.0 * unit(rng));
        s.sigma2 = 1.5e-9;
        s.gamma = std::pow(10.0, 2.0 * unit(rng) - 1.0);
        s.e_min = s.gamma * s.sigma2 / (s.lambda_u * s.lambda_u) * std::pow(10.0, 4.0 * unit(rng) - 2.0);
        s.angle_s = {ang(rng), ang(rng)};
        return s;
    }

    QcqpSpec search_spec(const SearchInstance &s)
    {
        return {s.upa.size(),
                {{s.h_u, s.sigma2 * s.gamma / (s.lambda_u * s.lambda_u)},
                 {steering_vector(s.upa, s.angle_s).conjugate(), s.upa.size() * s.e_min}}};
    }

    Outcome ac1(const Options &)
    {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(0xAC1);
        double worst_gap = 0.0, worst_slack = 0.0;
        int bad = 0;
        for (int i = 0; i < ac1_instances; ++i)
        {
            const SearchInstance s = random_search_instance(rng);
            const QcqpResult r = search_beam_sdr(s.h_u, s.lambda_u, s.angle_s, s.gamma, s.e_min, s.sigma2, s.upa);
            const QcqpSpec spec = search_spec(s);
            const double oracle = grid_min_power(spec);
            const double gap = rel(r.power, oracle);
            double sl = 0.0;
            for (const auto &c : spec.constraints)
                sl = std::max(sl, 1.0 - std::norm(c.g.dot(r.f)) / c.t);
            worst_gap = std::max(worst_gap, gap);
            worst_slack = std::max(worst_slack, sl);
            bad += gap > ac1_power_rel || sl > ac1_slack;
        }
        const double secs = seconds_since(t0);
        return {bad == 0 && secs < ac1_seconds,
                std::to_string(ac1_instances) + " instances, worst power gap " + fmt("%.2e", worst_gap) +
                    ", worst constraint shortfall " + fmt("%.2e", worst_slack) + ", " + fmt("%.1f s", secs)};
    }

    Outcome ac2(const Options &)
    {
        std::mt19937_64 rng(0xAC2);
        int violations = 0;
        double min_ratio = 1e300;
        for (int i = 0; i < ac1_instances; ++i)
        {
            const SearchInstance s = random_search_instance(rng);
            const double sdr = search_beam_sdr(s.h_u, s.lambda_u, s.angle_s, s.gamma, s.e_min, s.sigma2, s.upa).power;
            const double cf =
                search_beam_closed_form(s.h_u, s.lambda_u, s.angle_s, s.gamma, s.e_min, s.sigma2, s.upa).squaredNorm();
            min_ratio = std::min(min_ratio, cf / sdr);
            violations += cf < sdr * (1.0 - ac2_dominance_rel);
        }

        // orthogonal user and sensing directions: a DFT cell apart in u on the azimuth axis
        double worst_eq = 0.0;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int i = 0; i < 100; ++i)
        {
            const Upa upa = i % 2 ? Upa{8, 8, 0.5} : Upa{4, 4, 0.5};
            const double u_user = -0.5 + 0.4 * unit(rng);
            const double u_s = u_user + 2.0 / upa.m;
            const AngleAzZe user{rad2deg(std::acos(u_user)), 90.0}, sens{rad2deg(std::acos(u_s)), 90.0};
            const CVec h = steering_vector(upa, user).conjugate() / std::sqrt(double(upa.size()));
            const double lambda = 2.4e-5 * std::sqrt(double(upa.size())), sigma2 = 1.5e-9;
            const double gamma = std::pow(10.0, 2.0 * unit(rng) - 1.0);
            const double e_min = gamma * sigma2 / (lambda * lambda) * std::pow(10.0, 2.0 * unit(rng) - 1.0);
            const double sdr = search_beam_sdr(h, lambda, sens, gamma, e_min, sigma2, upa).power;
            const double cf = search_beam_closed_form(h, lambda, sens, gamma, e_min, sigma2, upa).squaredNorm();
            worst_eq = std::max(worst_eq, rel(cf, sdr));
        }
        return {violations == 0 && worst_eq <= ac2_equal_rel,
                "min closed-form/SDR power ratio " + fmt("%.9f", min_ratio) + " over " +
                    std::to_string(ac1_instances) + " instances, worst orthogonal-case mismatch " +
                    fmt("%.2e", worst_eq)};
    }

    Outcome ac3(const Options &)
    {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentConfig cfg = default_config("desk");
        cfg.chain.denoise = false;
        const double cell = 1.0 / (cfg.num.p_count * cfg.num.delta_f);
        std::ostringstream os;
        os << R"({"name": "N", "users": [{"paths": [{"alpha_abs": 2.4e-5, "azimuth_deg": 106, "zenith_deg": 41}]},
                   {"paths": [{"alpha_abs": 8.8e-6, "azimuth_deg": 96, "zenith_deg": 145}]}], "targets": [)";
        const double az[3] = {55, 90, 125}, ze[3] = {95, 75, 100}, cells[3] = {11, 20, 30};
        for (int k = 0; k < 3; ++k)
            os << (k ? "," : "") << R"({"azimuth_deg": )" << az[k] << R"(, "zenith_deg": )" << ze[k]
               << R"(, "range_m": )" << delay_to_range(cells[k] * cell) << R"(, "alpha_abs": 1e-6})";
        os << "]}";
        const SceneSpec scene = parse_scene(os.str(), cfg.num, 1);

        bool ok = true;
        std::string detail;
        for (Scheme scheme : {Scheme::zero, Scheme::dedicated})
        {
            const SchemeSetup setup = make_setup(cfg, scene, scheme);
            BeamPlan beams = design_search_beams(cfg, setup);
            scale_to_power(beams, setup.plan, 1.0);
            const auto targets = draw_targets(scene, 5);
            const SymbolGrid sym = draw_symbols(9, cfg.num);
            const SensingTensor y = synth_sensing_tensor(targets, cfg.upa, cfg.num, setup.plan, beams, sym, 3, 0.0);
            ChainInputs in{&y, &sym, &setup.plan, &beams, cfg.upa, cfg.num, Stage::search};
            ChainOptions opt = cfg.chain;
            opt.k_a = 3;
            const DetectionReport rep = detect_targets(in, opt);

            // one refined bin of the window the estimator actually used
            const int p_eff = setup.plan.has_sensing_block() ? setup.plan.p_len : cfg.num.p_count;
            const int q_eff = (setup.plan.has_sensing_block() ? setup.plan.q_len : cfg.num.q_count) / cfg.upa.size();
            const double tau_tol = 1.0 / (opt.oversample * p_eff * cfg.num.delta_f);
            const double fd_tol = 1.0 / (opt.oversample * q_eff * cfg.num.t_o);

            double worst_ang = 0.0, worst_tau = 0.0, worst_fd = 0.0, worst_alpha = 0.0;
            int found = 0;
            for (const auto &t : targets)
            {
                const DetectedTarget *best = nullptr;
                double bd = 1e300;
                for (const auto &d : rep.targets)
                {
                    const double dist = std::hypot(d.angle.azimuth - t.angle.azimuth, d.angle.zenith - t.angle.zenith) +
                                        std::abs(d.delay - t.delay()) / cell;
                    if (dist < bd)
                    {
                        bd = dist;
                        best = &d;
                    }
                }
                if (!best)
                    continue;
                const double ea = std::max(std::abs(best->angle.azimuth - t.angle.azimuth),
                                           std::abs(best->angle.zenith - t.angle.zenith));
                const double et = std::abs(best->delay - t.delay()), ef = std::abs(best->doppler - t.doppler(cfg.num));
                const double eal = std::abs(best->alpha - t.alpha) / std::abs(t.alpha);
                worst_ang = std::max(worst_ang, ea);
                worst_tau = std::max(worst_tau, et / tau_tol);
                worst_fd = std::max(worst_fd, ef / fd_tol);
                worst_alpha = std::max(worst_alpha, eal);
                found += ea <= ac3_angle_deg && et <= tau_tol && ef <= fd_tol && eal <= ac3_alpha_rel;
            }
            ok &= found == 3;
            detail += std::string(scheme_name(scheme)) + ": " + std::to_string(found) + "/3, angle " +
                      fmt("%.2e deg", worst_ang) + ", delay " + fmt("%.2e bins", worst_tau) + ", Doppler " +
                      fmt("%.2e bins", worst_fd) + ", alpha " + fmt("%.2e", worst_alpha) + "; ";
        }
        const double secs = seconds_since(t0);
        return {ok && secs < ac3_seconds, detail + fmt("%.1f s", secs)};
    }

    // Fraction of seeds where MUSIC finds the listed truth angles within tolerance, per target
    struct AngleHits
    {
        std::vector<int> per_target;
        int all = 0;
    };

    AngleHits angle_hits(const ExperimentConfig &cfg, const SceneSpec &scene, const SchemeSetup &setup,
                         const BeamPlan &base, double power_dbm, bool denoise, int seeds)
    {
        BeamPlan beams = base;
        scale_to_power(beams, setup.plan, db_to_linear(power_dbm));
        AngleHits h;
        h.per_target.assign(scene.targets.size(), 0);
        std::vector<std::vector<char>> hit(seeds);
#pragma omp parallel for schedule(dynamic)
        for (int s = 0; s < seeds; ++s)
        {
            const std::uint64_t ts = stream_seed(cfg.seed, s);
            const auto targets = draw_targets(scene, ts);
            const SymbolGrid sym = draw_symbols(stream_seed(ts, 2), cfg.num);
            const SensingTensor y = synth_sensing_tensor(targets, cfg.upa, cfg.num, setup.plan, beams, sym,
                                                         stream_seed(ts, 4), cfg.num.sigma2_re());
            ChainInputs in{&y, &sym, &setup.plan, &beams, cfg.upa, cfg.num, Stage::search};
            ChainOptions opt = cfg.chain;
            opt.denoise = denoise;
            opt.k_a = distinct_angles(targets);
            const auto est = estimate_angles(in, opt);
            hit[s].assign(targets.size(), 0);
            for (size_t k = 0; k < targets.size(); ++k)
                for (const auto &e : est)
                    if (std::abs(e.angle.azimuth - targets[k].angle.azimuth) <= ac4_angle_deg &&
                        std::abs(e.angle.zenith - targets[k].angle.zenith) <= ac4_angle_deg)
                        hit[s][k] = 1;
        }
        for (const auto &v : hit)
        {
            for (size_t k = 0; k < v.size(); ++k)
                h.per_target[k] += v[k];
            h.all += std::all_of(v.begin(), v.end(), [](char c) { return c != 0; });
        }
        return h;
    }

    Outcome ac4(const Options &o)
    {
        ExperimentConfig cfg = default_config("desk");
        const SceneSpec scene = load_scene("builtin:desk_far", cfg.num, cfg.seed);
        const SchemeSetup setup = make_setup(cfg, scene, Scheme::zero);
        const BeamPlan base = design_search_beams(cfg, setup);
        size_t weak = 0;
        for (size_t k = 0; k < scene.targets.size(); ++k)
            if (scene.targets[k].angle.azimuth == 143.0)
                weak = k;

        // calibration: every sweep power where raw MUSIC misses the weak target in >= 80% of seeds
        std::string detail;
        bool pass = false;
        double best_den = -1.0, best_p = 0.0, best_raw_miss = 0.0;
        int calibrated = 0;
        for (double p = 30.0; p <= 80.0; p += 2.5)
        {
            const AngleHits raw = angle_hits(cfg, scene, setup, base, p, false, o.seeds);
            const double miss = 1.0 - double(raw.per_target[weak]) / o.seeds;
            if (miss < ac4_fraction)
                continue;
            ++calibrated;
            const AngleHits den = angle_hits(cfg, scene, setup, base, p, true, o.seeds);
            const double frac = double(den.all) / o.seeds;
            if (frac > best_den)
            {
                best_den = frac;
                best_p = p;
                best_raw_miss = miss;
            }
            pass |= frac >= ac4_fraction;
        }
        if (calibrated == 0)
            return {false, "no sweep power where raw MUSIC misses the (143,112) target in >= 80% of seeds"};
        return {pass, std::to_string(calibrated) + " calibrated powers (keep " + std::to_string(cfg.chain.keep_bins) +
                          " bins); best: " + fmt("%.1f dBm", best_p) + ", raw miss " + fmt("%.2f", best_raw_miss) +
                          ", denoised all-three " + fmt("%.2f", best_den)};
    }

    Outcome ac5(const Options &o)
    {
        ExperimentConfig cfg = default_config("desk");
        cfg.scenes = {"builtin:desk_close"};
        cfg.powers_dbm = {ac5_power_dbm};
        cfg.seeds = o.seeds;
        const auto [full_step, _] = resolution(cfg.num, 1.0, 1.0);
        const auto [ded_step, __] = resolution(cfg.num, cfg.kappa_p, cfg.kappa_q);
        const SceneSpec scene = load_scene(cfg.scene_path(0), cfg.num, cfg.seed);
        double gap = 1e300;
        for (size_t a = 0; a < scene.targets.size(); ++a)
            for (size_t b = a + 1; b < scene.targets.size(); ++b)
                if (scene.targets[a].angle.azimuth == scene.targets[b].angle.azimuth &&
                    scene.targets[a].angle.zenith == scene.targets[b].angle.zenith)
                    gap = std::min(gap, std::abs(scene.targets[a].delay() - scene.targets[b].delay()));
        const bool geometry = gap > full_step && gap < ded_step;

        const auto rows = run_sensing(cfg, Stage::search);
        int ded_ok = 0, zero_ok = 0;
        for (const auto &r : rows)
        {
            if (r.scheme == Scheme::dedicated)
                ded_ok += r.ok && r.detected <= 2;
            else
                zero_ok += r.ok && r.detected == 3;
        }
        const double fd = double(ded_ok) / o.seeds, fz = double(zero_ok) / o.seeds;
        return {geometry && fd >= ac5_fraction && fz >= ac5_fraction,
                "delay gap " + fmt("%.3g", gap / full_step) + " full cells (dedicated step " +
                    fmt("%.3g", ded_step / full_step) + "), " + fmt("%.0f dBm", ac5_power_dbm) +
                    ": dedicated <=2 in " + fmt("%.2f", fd) + ", zero-overhead 3 in " + fmt("%.2f", fz)};
    }

    // Track-mode delay RMSE of a single target with a dedicated block of kappa_p P x Q, average sensing power p_s
    double track_delay_rmse(const ExperimentConfig &cfg, double kappa_p, double p_s, int trials, double *crb)
    {
        const ResourcePlan plan = build_resource_plan(cfg.num, 1, Scheme::dedicated, kappa_p, 1.0, 0, 0);
        const AngleAzZe angle{80.0, 100.0};
        const double alpha_abs = 1e-6;
        const double mn = cfg.upa.size();
        BeamPlan beams = BeamPlan::empty((int)mn, 1, cfg.num.q_count);
        // per-RE norm so the grid-averaged sensing power equals p_s
        const CVec f = steering_vector(cfg.upa, angle).conjugate() * std::sqrt(p_s / plan.kappa() / mn);
        for (int q = 0; q < cfg.num.q_count; ++q)
        {
            beams.sensing_beam(q) = f;
            beams.user_beam(0, q) = CVec::Zero((Eigen::Index)mn);
        }
        *crb = acrb(cfg.num, kappa_p, 1.0, alpha_abs * alpha_abs * mn, p_s, cfg.upa).acrb_delay;

        std::vector<double> err2(trials, 0.0);
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < trials; ++t)
        {
            const std::uint64_t ts = stream_seed(0xAC6, (std::uint64_t)t);
            std::mt19937_64 rng(ts);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            TargetSpec tg;
            tg.angle = angle;
            tg.range = 40.0 + 20.0 * unit(rng);
            tg.velocity = 5.0;
            tg.alpha = std::polar(alpha_abs, 2.0 * pi * unit(rng));
            const SymbolGrid sym = draw_symbols(stream_seed(ts, 2), cfg.num);
            const SensingTensor y = synth_sensing_tensor({tg}, cfg.upa, cfg.num, plan, beams, sym,
                                                         stream_seed(ts, 4), cfg.num.sigma2_re());
            ChainInputs in{&y, &sym, &plan, &beams, cfg.upa, cfg.num, Stage::track};
            ChainOptions opt = cfg.chain;
            opt.k_a = 1;
            opt.peaks.max_peaks = 1;
            const DetectionReport rep = detect_targets(in, opt);
            double e = tg.delay(); // a miss counts the full delay as error
            for (const auto &d : rep.targets)
                e = std::min(e, std::abs(d.delay - tg.delay()));
            err2[t] = e * e;
        }
        double s = 0.0;
        for (double e : err2)
            s += e;
        return std::sqrt(s / trials);
    }

    Outcome ac6(const Options &)
    {
        // bound oracle: full-scale numerology, kappa = 1, 20 dBsm at 53.7 m, 1 mW, frozen from an independent evaluation
        const OfdmNumerology t1 = OfdmNumerology::make(1024, 1024, 120e3, 2.0833e-6, 28e9, -169.0);
        const double a = alpha_magnitude_from_rcs(20.0, 53.7, t1);
        const AcrbReport o = acrb(t1, 1.0, 1.0, a * a * 64.0, 1.0, {8, 8, 0.5});
        const double oracle_err = std::max(rel(o.acrb_delay, 5.218578919523369e-24), rel(o.acrb_doppler, 6.92564128244843e-4));

        ExperimentConfig cfg = default_config("desk");
        const double p_s = db_to_linear(30.0);
        std::string detail = "oracle rel err " + fmt("%.1e", oracle_err) + "; RMSE/sqrt(ACRB):";
        double prev = 1e300, full_ratio = 0.0;
        bool monotone = true;
        for (double kp : {0.25, 0.5, 1.0})
        {
            double crb = 0.0;
            const double rmse = track_delay_rmse(cfg, kp, p_s, ac6_trials, &crb);
            monotone &= rmse < prev;
            prev = rmse;
            detail += " kappa_p " + fmt("%.2f", kp) + " -> " + fmt("%.3g ns", rmse * 1e9) + " (" +
                      fmt("%.2f", rmse / std::sqrt(crb)) + ")";
            if (kp == 1.0)
                full_ratio = rmse / std::sqrt(crb);
        }
        return {oracle_err <= ac6_oracle_rel && monotone && full_ratio <= ac6_crb_factor, detail};
    }

    Outcome ac7(const Options &)
    {
        ExperimentConfig cfg = default_config("desk");
        if (cfg.powers_dbm.size() != 10)
            return {false, "desk sweep does not have 10 points"};
        const auto rows = run_comm(cfg);
        int points = 0, wins = 0;
        double min_margin = 1e300;
        for (const auto &z : rows)
        {
            if (z.scheme != Scheme::zero)
                continue;
            for (const auto &d : rows)
                if (d.scheme == Scheme::dedicated && d.scene == z.scene && d.stage == z.stage &&
                    d.power_dbm == z.power_dbm)
                {
                    ++points;
                    wins += z.sum_rate > d.sum_rate;
                    min_margin = std::min(min_margin, z.sum_rate / d.sum_rate);
                }
        }

        // simulated single-user MRT rate against the closed form, and the kappa sweep
        const Upa &upa = cfg.upa;
        const PathSpec user{std::polar(2.4e-5, 0.3), {106.0, 41.0}, 0.0, 0.0};
        double worst = 0.0;
        for (double kp : {0.125, 0.25, 0.5})
        {
            const ResourcePlan plan = build_resource_plan(cfg.num, 1, Scheme::dedicated, kp, 1.0);
            BeamPlan beams = BeamPlan::empty(upa.size(), 1, cfg.num.q_count);
            const CVec f = steering_vector(upa, user.angle).conjugate() / std::sqrt(double(upa.size()));
            for (int q = 0; q < cfg.num.q_count; ++q)
            {
                beams.user_beam(0, q) = f;
                beams.sensing_beam(q) = CVec::Zero(upa.size());
            }
            const double pc = power_split(plan, beams).first;
            worst = std::max(worst, rel(sum_rate(plan, {{user}}, beams, upa, cfg.num),
                                        dedicated_rate_closed_form(cfg.num, plan.kappa(), pc, 2.4e-5, upa)));
        }
        bool monotone = true;
        double prev = 1e300;
        for (int i = 0; i <= 5; ++i)
        {
            const double c = dedicated_rate_closed_form(cfg.num, 0.1 * i, 1.0, 2.4e-5, upa);
            monotone &= c < prev;
            prev = c;
        }
        return {points == 40 && wins == points && worst <= ac7_rate_rel && monotone,
                std::to_string(wins) + "/" + std::to_string(points) + " sweep points favour zero-overhead (min ratio " +
                    fmt("%.3f", min_margin) + "), closed-form mismatch " + fmt("%.1e", worst) +
                    (monotone ? ", C_U decreasing in kappa" : ", C_U NOT monotone in kappa")};
    }

    Outcome ac8(const Options &o)
    {
        ExperimentConfig cfg = default_config("desk");
        cfg.scenes = {"builtin:desk_far"};
        cfg.schemes = {Scheme::zero};
        cfg.seeds = o.seeds;
        std::vector<double> powers;
        for (double p = 0.0; p <= 80.0; p += 5.0)
            powers.push_back(p);
        cfg.powers_dbm = powers;
        const auto search = summarize(run_sensing(cfg, Stage::search));
        const auto track = summarize(run_sensing(cfg, Stage::track));
        const std::string scene = search.front().scene;

        // reference: the RMSE searching reaches at the top of its sweep, relaxed to the first level it holds
        double target = 0.0;
        for (const auto &r : search)
            if (r.power_dbm == powers.back())
                target = angle_rmse(r);
        const auto ps = power_to_reach(search, scene, Scheme::zero, Stage::search, target);
        const auto pt = power_to_reach(track, scene, Scheme::zero, Stage::track, target);
        if (!ps || !pt)
            return {false, "target RMSE " + fmt("%.3g deg", target) + " not reached by " + (ps ? "tracking" : "searching")};
        const double gap = *ps - *pt;
        return {gap >= ac8_gap_db, "angle RMSE " + fmt("%.3g deg", target) + ": searching " + fmt("%.1f dBm", *ps) +
                                       ", tracking " + fmt("%.1f dBm", *pt) + ", gap " + fmt("%.1f dB", gap)};
    }

    Outcome ac9(const Options &)
    {
        ExperimentConfig cfg = default_config("desk");
        cfg.scenes = {"builtin:desk_close"};
        cfg.powers_dbm = {60.0, 75.0};
        cfg.seeds = 4;
        auto render = [&](int threads) {
            configure_threads(threads);
            std::ostringstream os;
            const auto s = run_sensing(cfg, Stage::search);
            write_csv(os, s);
            write_csv(os, summarize(s));
            write_csv(os, run_sensing(cfg, Stage::track));
            write_csv(os, run_comm(cfg));
            return os.str();
        };
        const int n = std::max(4, omp_get_num_procs());
        const std::string one = render(1), many = render(n);
        configure_threads(0);
        return {one == many, std::to_string(one.size()) + " bytes of CSV, 1 vs " + std::to_string(n) + " threads " +
                                 (one == many ? "identical" : "DIFFER")};
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Acceptance criteria"};
    Options o;
    std::vector<std::string> only;
    app.add_option("--seeds", o.seeds, "Monte Carlo seeds for the statistical criteria")->check(CLI::PositiveNumber);
    app.add_option("--threads", o.threads, "Worker threads (0 = OpenMP default)");
    app.add_option("--only", only, "Run only these criteria (AC1 ... AC9)");
    app.add_flag("--strict", o.strict, "Exit nonzero when any criterion fails");
    CLI11_PARSE(app, argc, argv);
    o.only = {only.begin(), only.end()};
    configure_threads(o.threads);

    const std::vector<std::pair<std::string, std::pair<std::string, std::function<Outcome(const Options &)>>>> all{
        {"AC1", {"beamforming optimality", ac1}},
        {"AC2", {"closed-form dominance and equality", ac2}},
        {"AC3", {"noiseless end-to-end oracle", ac3}},
        {"AC4", {"denoising recovers the weak target", ac4}},
        {"AC5", {"resolution separation, close scene", ac5}},
        {"AC6", {"delay RMSE versus averaged bound", ac6}},
        {"AC7", {"sum-rate ordering", ac7}},
        {"AC8", {"search-versus-track power gap", ac8}},
        {"AC9", {"thread-count determinism", ac9}},
    };
    int failed = 0, run = 0;
    for (const auto &[id, entry] : all)
    {
        if (!o.only.empty() && !o.only.count(id))
            continue;
        ++run;
        Outcome r;
        try
        {
            r = entry.second(o);
        }
        catch (const std::exception &e)
        {
            r = {false, std::string("exception: ") + e.what()};
        }
        failed += !r.pass;
        std::cout << (r.pass ? "PASS " : "FAIL ") << id << ' ' << entry.first << ": " << r.detail << std::endl;
    }
    std::cout << run - failed << "/" << run << " criteria passed" << std::endl;
    return o.strict && failed ? 1 : 0;
}
