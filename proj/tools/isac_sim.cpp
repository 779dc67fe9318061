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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace isac;

namespace
{
    struct Common
    {
        std::string config;
        std::string scale;
        std::optional<std::uint64_t> seed;
        std::string out = "out";
        std::optional<int> threads;
        std::optional<int> seeds;
        std::string dump;
    };

    ExperimentConfig resolve(const Common &c)
    {
        const std::optional<std::string> scale = c.scale.empty() ? std::nullopt : std::optional(c.scale);
        ExperimentConfig cfg = c.config.empty() ? default_config(scale.value_or("desk")) : load_config(c.config, scale);
        if (c.seed)
            cfg.seed = *c.seed;
        if (c.threads)
            cfg.threads = *c.threads;
        if (c.seeds)
            cfg.seeds = *c.seeds;
        cfg.validate();
        return cfg;
    }

    std::ofstream open_out(const Common &c, const std::string &file)
    {
        std::filesystem::create_directories(c.out);
        const auto path = std::filesystem::path(c.out) / file;
        std::ofstream os(path);
        if (!os)
            throw ConfigError("cannot write '" + path.string() + "'");
        std::cout << "wrote " << path.string() << '\n';
        return os;
    }

    void sensing(const Common &c, Stage stage)
    {
        const ExperimentConfig cfg = resolve(c);
        const auto rows = run_sensing(cfg, stage);
        const std::string base = cfg.name + "_" + stage_name(stage);
        auto t = open_out(c, base + "_trials.csv");
        write_csv(t, rows);
        auto s = open_out(c, base + "_summary.csv");
        write_csv(s, summarize(rows));
        if (!c.dump.empty())
            for (const auto &f : dump_spectra(cfg, stage, c.dump))
                std::cout << "wrote " << f << '\n';
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Multi-user MIMO-OFDM sensing and communication simulator"};
    app.require_subcommand(1);
    Common c;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", c.config, "JSON experiment config")->check(CLI::ExistingFile);
        sub->add_option("--scale", c.scale, "Built-in profile")->check(CLI::IsMember({"desk", "paper"}));
        sub->add_option("--seed", c.seed, "Master seed");
        sub->add_option("--seeds", c.seeds, "Monte Carlo trials per power point");
        sub->add_option("--out", c.out, "Output directory");
        sub->add_option("--threads", c.threads, "Worker threads (0 = OpenMP default)");
    };

    auto *search = app.add_subcommand("search", "Target searching sweep (detections and RMSE)");
    auto *track = app.add_subcommand("track", "Target tracking sweep (RMSE)");
    auto *comm = app.add_subcommand("comm", "Sum rate of both schemes and stages");
    auto *beam = app.add_subcommand("beampattern", "Searching-beam patterns and design powers");
    auto *crlb = app.add_subcommand("crlb", "Delay/Doppler bounds and resolution versus kappa");
    for (auto *s : {search, track, comm, beam, crlb})
        add_common(s);
    for (auto *s : {search, track})
        s->add_option("--dump", c.dump, "Also write seed-0 tensors and spectra at the top power to this directory");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (search->parsed())
            sensing(c, Stage::search);
        else if (track->parsed())
            sensing(c, Stage::track);
        else if (comm->parsed())
        {
            const ExperimentConfig cfg = resolve(c);
            auto os = open_out(c, cfg.name + "_comm.csv");
            write_csv(os, run_comm(cfg));
        }
        else if (beam->parsed())
        {
            const ExperimentConfig cfg = resolve(c);
            const auto res = emit_beampattern(cfg);
            auto os = open_out(c, cfg.name + "_beampattern.csv");
            write_csv(os, res);
            auto pt = open_out(c, cfg.name + "_beam_power.csv");
            write_power_table(pt, res);
        }
        else if (crlb->parsed())
        {
            const ExperimentConfig cfg = resolve(c);
            auto os = open_out(c, cfg.name + "_crlb.csv");
            write_csv(os, crlb_table(cfg));
        }
    }
    catch (const ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    catch (const SolverError &e)
    {
        std::cerr << "solver failure: " << e.what() << " (primal " << e.primal_residual << ", dual "
                  << e.dual_residual << ", gap " << e.gap << ")\n";
        return 3;
    }
    catch (const InvalidArgument &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
