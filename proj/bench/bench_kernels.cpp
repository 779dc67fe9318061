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

// Serial reference versus OpenMP kernels on the desk profile.
// Thread count follows OMP_NUM_THREADS.

#include "isac/experiment.hpp"

#include <benchmark/benchmark.h>

using namespace isac;

namespace
{
    struct Fixture
    {
        ExperimentConfig cfg = default_config("desk");
        SceneSpec scene = load_scene("builtin:desk_far", cfg.num, 1);
        SchemeSetup setup = make_setup(cfg, scene, Scheme::zero);
        BeamPlan beams = design_search_beams(cfg, setup);
        std::vector<TargetSpec> targets = draw_targets(scene, 7);
        SymbolGrid symbols = draw_symbols(7, cfg.num);
        SensingTensor tensor;
        DdTensor dd;
        CMat r;

        Fixture()
        {
            scale_to_power(beams, setup.plan, db_to_linear(20.0));
            tensor = synth_sensing_tensor(targets, cfg.upa, cfg.num, setup.plan, beams, symbols, 7,
                                          cfg.num.sigma2_re());
            dd = dd_transform(remove_symbol_randomness(tensor, symbols), setup.plan, &*beams.schedule);
            r = smoothed_covariance(dd, cfg.upa, 2, 2);
        }
    };

    Fixture &fx()
    {
        static Fixture f;
        return f;
    }

    void BM_SynthSerial(benchmark::State &st)
    {
        auto &f = fx();
        for (auto _ : st)
            benchmark::DoNotOptimize(synth_sensing_tensor_serial(f.targets, f.cfg.upa, f.cfg.num, f.setup.plan,
                                                                 f.beams, f.symbols, 7, f.cfg.num.sigma2_re()));
    }

    void BM_SynthParallel(benchmark::State &st)
    {
        auto &f = fx();
        for (auto _ : st)
            benchmark::DoNotOptimize(synth_sensing_tensor(f.targets, f.cfg.upa, f.cfg.num, f.setup.plan, f.beams,
                                                          f.symbols, 7, f.cfg.num.sigma2_re()));
    }

    void BM_CovarianceSerial(benchmark::State &st)
    {
        auto &f = fx();
        for (auto _ : st)
            benchmark::DoNotOptimize(smoothed_covariance_serial(f.dd, f.cfg.upa, 2, 2));
    }

    void BM_CovarianceParallel(benchmark::State &st)
    {
        auto &f = fx();
        for (auto _ : st)
            benchmark::DoNotOptimize(smoothed_covariance(f.dd, f.cfg.upa, 2, 2));
    }

    void BM_MusicSerial(benchmark::State &st)
    {
        auto &f = fx();
        const Upa sub{3, 3, 0.5};
        for (auto _ : st)
            benchmark::DoNotOptimize(music_spectrum_serial(f.r, 3, sub, AngleGrid{}));
    }

    void BM_MusicParallel(benchmark::State &st)
    {
        auto &f = fx();
        const Upa sub{3, 3, 0.5};
        for (auto _ : st)
            benchmark::DoNotOptimize(music_spectrum(f.r, 3, sub, AngleGrid{}));
    }
}

BENCHMARK(BM_SynthSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SynthParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CovarianceSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CovarianceParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MusicSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MusicParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
