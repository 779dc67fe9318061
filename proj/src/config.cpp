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

#include "isac/config.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace isac
{
    using nlohmann::json;

    namespace
    {
        const char *builtin_prefix = "builtin:";

        // reference users; the desk profile keeps the first two
        const char *user_block(int count)
        {
            static const char *four = R"([
                {"paths": [{"alpha_abs": 2.4e-5, "azimuth_deg": 106, "zenith_deg": 41, "delay_ns": 113.9, "doppler_khz": 2.5}]},
                {"paths": [{"alpha_abs": 8.8e-6, "azimuth_deg": 96, "zenith_deg": 145, "delay_ns": 325.5, "doppler_khz": 3.2}]},
                {"paths": [{"alpha_abs": 8.9e-6, "azimuth_deg": 49, "zenith_deg": 147, "delay_ns": 317.4, "doppler_khz": -3.0}]},
                {"paths": [{"alpha_abs": 3.7e-5, "azimuth_deg": 88, "zenith_deg": 120, "delay_ns": 73.2, "doppler_khz": 3.3}]}])";
            static const char *two = R"([
                {"paths": [{"alpha_abs": 2.4e-5, "azimuth_deg": 106, "zenith_deg": 41, "delay_ns": 113.9, "doppler_khz": 2.5}]},
                {"paths": [{"alpha_abs": 8.8e-6, "azimuth_deg": 96, "zenith_deg": 145, "delay_ns": 325.5, "doppler_khz": 3.2}]}])";
            return count == 4 ? four : two;
        }

        // reference target geometry. In the desk close case targets 1 and 3 sit 1.5 range cells apart on the 256-subcarrier grid.
        std::string builtin_scene(const std::string &name)
        {
            const bool desk = name.rfind("desk_", 0) == 0;
            const bool paper = name.rfind("paper_", 0) == 0;
            const bool far = name.size() > 4 && name.substr(name.size() - 4) == "_far";
            const bool close = name.size() > 6 && name.substr(name.size() - 6) == "_close";
            if (!(desk || paper) || !(far || close))
                throw ConfigError("unknown built-in scene '" + name + "'");
            const double r3 = far ? 67.1 : (desk ? 61.0203 : 56.2);
            const double az3 = far ? 77.0 : 63.0;
            std::ostringstream os;
            os << R"({"name": ")" << (far ? "F" : "C") << R"(", "users": )" << user_block(desk ? 2 : 4)
               << R"(, "targets": [
                {"azimuth_deg": 63, "zenith_deg": 109, "range_m": 53.7, "velocity_mps": 12, "rcs_dbsm": 20},
                {"azimuth_deg": 143, "zenith_deg": 112, "range_m": 125.7, "velocity_mps": -8, "rcs_dbsm": 20},
                {"azimuth_deg": )"
               << az3 << R"(, "zenith_deg": 109, "range_m": )" << r3
               << R"(, "velocity_mps": 5, "rcs_dbsm": 20}]})";
            return os.str();
        }

        std::string read_file(const std::string &path)
        {
            std::ifstream in(path);
            if (!in)
                throw ConfigError("cannot open '" + path + "'");
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }

        json parse_json(const std::string &text, const std::string &what)
        {
            try
            {
                return json::parse(text);
            }
            catch (const json::parse_error &e)
            {
                throw ConfigError(what + ": " + e.what());
            }
        }

        void check_keys(const json &j, const std::set<std::string> &allowed, const std::string &where)
        {
            if (!j.is_object())
                throw ConfigError(where + ": expected an object");
            for (const auto &[k, v] : j.items())
                if (!allowed.count(k))
                    throw ConfigError(where + ": unknown key '" + k + "'");
        }

        template <typename T>
        T get(const json &j, const char *key, const std::string &where)
        {
            if (!j.contains(key))
                throw ConfigError(where + ": missing key '" + key + "'");
            try
            {
                return j.at(key).get<T>();
            }
            catch (const json::exception &e)
            {
                throw ConfigError(where + ": bad value for '" + key + "': " + e.what());
            }
        }

        template <typename T>
        void maybe(const json &j, const char *key, T &out, const std::string &where)
        {
            if (j.contains(key))
                out = get<T>(j, key, where);
        }

        Scheme parse_scheme(const std::string &s)
        {
            if (s == "dedicated")
                return Scheme::dedicated;
            if (s == "zero")
                return Scheme::zero;
            throw ConfigError("unknown scheme '" + s + "'");
        }
    }

    namespace
    {
        SceneSpec parse_scene_json(const std::string &text, const OfdmNumerology &num, std::uint64_t phase_seed)
        {
            const json j = parse_json(text, "scene");
            check_keys(j, {"name", "users", "targets"}, "scene");
            SceneSpec sc;
            maybe(j, "name", sc.name, "scene");
            std::uniform_real_distribution<double> uni(0.0, 2.0 * pi);

            if (j.contains("users"))
            {
                int u = 0;
                for (const auto &ju : j.at("users"))
                {
                    const std::string where = "scene user " + std::to_string(u);
                    check_keys(ju, {"paths"}, where);
                    std::vector<PathSpec> paths;
                    int l = 0;
                    for (const auto &jp : ju.at("paths"))
                    {
                        check_keys(jp, {"alpha_abs", "alpha_phase_deg", "azimuth_deg", "zenith_deg", "delay_ns",
                                        "doppler_khz"},
                                   where);
                        PathSpec p;
                        const double mag = get<double>(jp, "alpha_abs", where);
                        if (!(mag > 0.0))
                            throw ConfigError(where + ": alpha_abs must be positive");
                        std::mt19937_64 rng(stream_seed(phase_seed, 0xA1FA'0000ull + (std::uint64_t)u * 64 + l));
                        const double ph = jp.contains("alpha_phase_deg") ? deg2rad(get<double>(jp, "alpha_phase_deg", where))
                                                                         : uni(rng);
                        p.alpha = std::polar(mag, ph);
                        p.angle = {get<double>(jp, "azimuth_deg", where), get<double>(jp, "zenith_deg", where)};
                        try
                        {
                            p.angle.validate();
                        }
                        catch (const InvalidArgument &e)
                        {
                            throw ConfigError(where + ": " + e.what());
                        }
                        p.delay = jp.value("delay_ns", 0.0) * 1e-9;
                        p.doppler = jp.value("doppler_khz", 0.0) * 1e3;
                        paths.push_back(p);
                        ++l;
                    }
                    if (paths.empty())
                        throw ConfigError(where + ": no paths");
                    // synchronise to the strongest path
                    const auto strongest = *std::max_element(paths.begin(), paths.end(), [](const auto &a, const auto &b) {
                        return std::abs(a.alpha) < std::abs(b.alpha);
                    });
                    for (auto &p : paths)
                    {
                        p.delay -= strongest.delay;
                        p.doppler -= strongest.doppler;
                    }
                    sc.users.push_back(paths);
                    ++u;
                }
            }

            if (j.contains("targets"))
            {
                int k = 0;
                for (const auto &jt : j.at("targets"))
                {
                    const std::string where = "scene target " + std::to_string(k++);
                    check_keys(jt, {"azimuth_deg", "zenith_deg", "range_m", "velocity_mps", "rcs_dbsm", "alpha_abs"},
                               where);
                    TargetSpec t;
                    t.angle = {get<double>(jt, "azimuth_deg", where), get<double>(jt, "zenith_deg", where)};
                    t.range = get<double>(jt, "range_m", where);
                    t.velocity = jt.value("velocity_mps", 0.0);
                    if (!(t.range > 0.0))
                        throw ConfigError(where + ": range must be positive");
                    if (jt.contains("rcs_dbsm") == jt.contains("alpha_abs"))
                        throw ConfigError(where + ": give exactly one of rcs_dbsm and alpha_abs");
                    if (jt.contains("rcs_dbsm"))
                    {
                        t.rcs_dbsm = get<double>(jt, "rcs_dbsm", where);
                        t.alpha = alpha_magnitude_from_rcs(*t.rcs_dbsm, t.range, num);
                    }
                    else
                        t.alpha = get<double>(jt, "alpha_abs", where);
                    sc.targets.push_back(t);
                }
            }
            return sc;
        }
    }

    SceneSpec parse_scene(const std::string &text, const OfdmNumerology &num, std::uint64_t phase_seed)
    {
        try
        {
            return parse_scene_json(text, num, phase_seed);
        }
        catch (const json::exception &e)
        {
            throw ConfigError(std::string("scene: ") + e.what());
        }
    }

    SceneSpec load_scene(const std::string &path, const OfdmNumerology &num, std::uint64_t phase_seed)
    {
        if (path.rfind(builtin_prefix, 0) == 0)
            return parse_scene(builtin_scene(path.substr(std::string(builtin_prefix).size())), num, phase_seed);
        return parse_scene(read_file(path), num, phase_seed);
    }

    void ExperimentConfig::validate() const
    {
        try
        {
            num.validate();
            upa.validate();
        }
        catch (const InvalidArgument &e)
        {
            throw ConfigError(e.what());
        }
        if (scenes.empty())
            throw ConfigError("config: no scenes");
        if (schemes.empty())
            throw ConfigError("config: no schemes");
        if (powers_dbm.empty())
            throw ConfigError("config: power sweep is empty");
        if (seeds < 1)
            throw ConfigError("config: seeds must be >= 1");
        if (!(kappa_p > 0.0 && kappa_p <= 1.0 && kappa_q > 0.0 && kappa_q <= 1.0))
            throw ConfigError("config: kappa_p and kappa_q must lie in (0,1]");
        if (chain.keep_bins < 1 || chain.oversample < 1 || chain.smooth_i < 1 || chain.smooth_j < 1 ||
            !(chain.grid.step > 0.0))
            throw ConfigError("config: estimator settings must be positive");
        if (chain.smooth_i >= upa.m || chain.smooth_j >= upa.n)
            throw ConfigError("config: smoothing leaves a subarray with fewer than 2 elements per axis");
        if (threads < 0)
            throw ConfigError("config: threads must be >= 0");
        for (size_t i = 0; i < scenes.size(); ++i)
        {
            const auto p = scene_path(i);
            if (p.rfind(builtin_prefix, 0) != 0 && !std::filesystem::exists(p))
                throw ConfigError("config: scene file '" + p + "' does not exist");
        }
    }

    std::string ExperimentConfig::scene_path(size_t i) const
    {
        const std::string &s = scenes.at(i);
        if (s.rfind(builtin_prefix, 0) == 0 || std::filesystem::path(s).is_absolute())
            return s;
        return (std::filesystem::path(base_dir) / s).string();
    }

    ExperimentConfig default_config(const std::string &scale)
    {
        ExperimentConfig c;
        c.scale = scale;
        if (scale == "desk")
        {
            c.num = OfdmNumerology::make(256, 256, 120e3, 2.0833e-6, 28e9, -169.0);
            c.upa = {4, 4, 0.5};
            c.scenes = {"builtin:desk_far", "builtin:desk_close"};
            c.chain.keep_bins = 7; // 100 scaled by the bin-count ratio 256^2 / 1024^2, rounded up
            c.chain.smooth_i = c.chain.smooth_j = 2;
            c.powers_dbm = {35, 40, 45, 50, 55, 60, 65, 70, 75, 80};
        }
        else if (scale == "paper")
        {
            c.num = OfdmNumerology::make(1024, 1024, 120e3, 2.0833e-6, 28e9, -169.0);
            c.upa = {8, 8, 0.5};
            c.scenes = {"builtin:paper_far", "builtin:paper_close"};
            c.chain.keep_bins = 100;
            c.chain.smooth_i = c.chain.smooth_j = 3;
            c.powers_dbm = {35, 40, 45, 50, 55, 60, 65, 70, 75, 80};
            c.beampattern.user_alpha = 2.4e-5;
        }
        else
            throw ConfigError("unknown scale '" + scale + "' (expected desk or paper)");
        return c;
    }

    namespace
    {
        ExperimentConfig parse_config_json(const std::string &text, const std::string &base_dir,
                                           const std::optional<std::string> &scale_override)
        {
            const json j = parse_json(text, "config");
            check_keys(j,
                       {"name", "scale", "numerology", "array", "scenes", "schemes", "kappa_p", "kappa_q", "p_start",
                        "q_start", "powers_dbm", "seeds", "seed", "gamma_bar_db", "e_min_ratio_dbm", "track_ratio_db",
                        "search_beam", "prior", "estimator", "gates", "beampattern", "crlb_kappas", "threads"},
                       "config");
            std::string scale = scale_override ? *scale_override : j.value("scale", std::string("desk"));
            ExperimentConfig c = default_config(scale);
            c.base_dir = base_dir;
            const std::string w = "config";
            maybe(j, "name", c.name, w);

            if (j.contains("numerology"))
            {
                const json &n = j.at("numerology");
                const std::string wn = "config.numerology";
                check_keys(n, {"subcarriers", "symbols", "subcarrier_spacing_hz", "cp_s", "carrier_hz", "n0_dbm_hz"},
                           wn);
                int p = c.num.p_count, q = c.num.q_count;
                double df = c.num.delta_f, cp = c.num.t_cp, fc = c.num.f_c, n0 = linear_to_db(c.num.n0);
                maybe(n, "subcarriers", p, wn);
                maybe(n, "symbols", q, wn);
                maybe(n, "subcarrier_spacing_hz", df, wn);
                maybe(n, "cp_s", cp, wn);
                maybe(n, "carrier_hz", fc, wn);
                maybe(n, "n0_dbm_hz", n0, wn);
                try
                {
                    c.num = OfdmNumerology::make(p, q, df, cp, fc, n0);
                }
                catch (const InvalidArgument &e)
                {
                    throw ConfigError(wn + ": " + e.what());
                }
            }
            if (j.contains("array"))
            {
                const json &a = j.at("array");
                check_keys(a, {"m", "n", "spacing"}, "config.array");
                maybe(a, "m", c.upa.m, "config.array");
                maybe(a, "n", c.upa.n, "config.array");
                maybe(a, "spacing", c.upa.spacing, "config.array");
            }
            maybe(j, "scenes", c.scenes, w);
            if (j.contains("schemes"))
            {
                c.schemes.clear();
                for (const auto &s : get<std::vector<std::string>>(j, "schemes", w))
                    c.schemes.push_back(parse_scheme(s));
            }
            maybe(j, "kappa_p", c.kappa_p, w);
            maybe(j, "kappa_q", c.kappa_q, w);
            if (j.contains("p_start"))
                c.p_start = get<int>(j, "p_start", w);
            if (j.contains("q_start"))
                c.q_start = get<int>(j, "q_start", w);
            maybe(j, "powers_dbm", c.powers_dbm, w);
            maybe(j, "seeds", c.seeds, w);
            maybe(j, "seed", c.seed, w);
            maybe(j, "gamma_bar_db", c.gamma_bar_db, w);
            maybe(j, "e_min_ratio_dbm", c.e_min_ratio_dbm, w);
            maybe(j, "track_ratio_db", c.track_ratio_db, w);
            if (j.contains("search_beam"))
            {
                const auto s = get<std::string>(j, "search_beam", w);
                if (s == "sdr")
                    c.search_design = BeamDesign::sdr;
                else if (s == "closed_form")
                    c.search_design = BeamDesign::closed_form;
                else
                    throw ConfigError("config: search_beam must be sdr or closed_form");
            }
            if (j.contains("prior"))
            {
                const json &p = j.at("prior");
                check_keys(p, {"angle_sigma_deg", "alpha_sigma"}, "config.prior");
                maybe(p, "angle_sigma_deg", c.prior_angle_sigma_deg, "config.prior");
                maybe(p, "alpha_sigma", c.prior_alpha_sigma, "config.prior");
            }
            if (j.contains("estimator"))
            {
                const json &e = j.at("estimator");
                const std::string we = "config.estimator";
                check_keys(e,
                           {"denoise", "keep_bins", "smooth_i", "smooth_j", "grid_step_deg", "oversample", "k_a",
                            "k_a_ratio", "symbol_rule", "polish", "newton", "max_peaks", "relative_threshold",
                            "noise_factor"},
                           we);
                maybe(e, "denoise", c.chain.denoise, we);
                maybe(e, "keep_bins", c.chain.keep_bins, we);
                maybe(e, "smooth_i", c.chain.smooth_i, we);
                maybe(e, "smooth_j", c.chain.smooth_j, we);
                maybe(e, "grid_step_deg", c.chain.grid.step, we);
                maybe(e, "oversample", c.chain.oversample, we);
                maybe(e, "k_a_ratio", c.chain.k_a_ratio, we);
                maybe(e, "polish", c.chain.polish, we);
                maybe(e, "newton", c.chain.peaks.newton, we);
                maybe(e, "max_peaks", c.chain.peaks.max_peaks, we);
                maybe(e, "relative_threshold", c.chain.peaks.relative_threshold, we);
                maybe(e, "noise_factor", c.chain.peaks.noise_factor, we);
                if (e.contains("k_a"))
                {
                    const auto s = get<std::string>(e, "k_a", we);
                    if (s == "truth")
                        c.k_a_policy = KaPolicy::truth;
                    else if (s == "estimate")
                        c.k_a_policy = KaPolicy::estimate;
                    else
                        throw ConfigError(we + ": k_a must be truth or estimate");
                }
                if (e.contains("symbol_rule"))
                {
                    const auto s = get<std::string>(e, "symbol_rule", we);
                    if (s == "closest_beam")
                        c.chain.symbol_rule = SymbolRule::closest_beam;
                    else if (s == "sine_window")
                        c.chain.symbol_rule = SymbolRule::sine_window;
                    else
                        throw ConfigError(we + ": symbol_rule must be closest_beam or sine_window");
                }
            }
            if (j.contains("gates"))
            {
                const json &g = j.at("gates");
                check_keys(g, {"angle_deg", "delay_s"}, "config.gates");
                if (g.contains("angle_deg"))
                    c.gate_angle_deg = get<double>(g, "angle_deg", "config.gates");
                if (g.contains("delay_s"))
                    c.gate_delay_s = get<double>(g, "delay_s", "config.gates");
            }
            if (j.contains("beampattern"))
            {
                const json &b = j.at("beampattern");
                const std::string wb = "config.beampattern";
                check_keys(b,
                           {"user_azimuth_deg", "user_zenith_deg", "sensing_azimuth_deg", "sensing_zenith_deg",
                            "user_alpha", "gamma_bar_db", "e_min_dbm", "grid_step_deg"},
                           wb);
                maybe(b, "user_azimuth_deg", c.beampattern.user.azimuth, wb);
                maybe(b, "user_zenith_deg", c.beampattern.user.zenith, wb);
                maybe(b, "sensing_azimuth_deg", c.beampattern.sensing.azimuth, wb);
                maybe(b, "sensing_zenith_deg", c.beampattern.sensing.zenith, wb);
                maybe(b, "user_alpha", c.beampattern.user_alpha, wb);
                maybe(b, "gamma_bar_db", c.beampattern.gamma_bar_db, wb);
                maybe(b, "grid_step_deg", c.beampattern.grid_step_deg, wb);
                if (b.contains("e_min_dbm"))
                {
                    c.beampattern.e_min_dbm = get<double>(b, "e_min_dbm", wb);
                    c.beampattern.e_min_matches_comm = false;
                }
            }
            maybe(j, "crlb_kappas", c.crlb_kappas, w);
            maybe(j, "threads", c.threads, w);
            c.validate();
            return c;
        }
    }

    ExperimentConfig parse_config(const std::string &text, const std::string &base_dir,
                                  const std::optional<std::string> &scale_override)
    {
        try
        {
            return parse_config_json(text, base_dir, scale_override);
        }
        catch (const json::exception &e)
        {
            throw ConfigError(std::string("config: ") + e.what());
        }
    }

    ExperimentConfig load_config(const std::string &path, const std::optional<std::string> &scale_override)
    {
        const auto dir = std::filesystem::path(path).parent_path();
        return parse_config(read_file(path), dir.empty() ? "." : dir.string(), scale_override);
    }
}
