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

#ifndef ISAC_GRIDSIM_HPP
#define ISAC_GRIDSIM_HPP

#include "isac/scene.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace isac
{
    enum class Scheme
    {
        dedicated,
        zero
    };

    const char *scheme_name(Scheme s);

    // Owner label per resource element: user index >= 0, or sensing_owner
    inline constexpr int sensing_owner = -1;

    struct ResourcePlan
    {
        Scheme scheme = Scheme::zero;
        int p_count = 0, q_count = 0;
        int users = 0;
        double kappa_p = 0.0, kappa_q = 0.0;
        int p_start = 0, q_start = 0; // sensing block origin
        int p_len = 0, q_len = 0;     // sensing block size, 0 in zero-overhead mode
        std::vector<int> owner;       // index q * p_count + p

        int owner_at(int p, int q) const { return owner[(size_t)q * p_count + p]; }
        double kappa() const { return double(p_len) * q_len / (double(p_count) * q_count); }
        bool has_sensing_block() const { return p_len > 0 && q_len > 0; }

        std::vector<std::pair<int, int>> user_set(int u) const;
        std::vector<std::pair<int, int>> sensing_set() const;
        size_t user_count(int u) const;
        void validate() const; // partition invariants
    };

    // Zero-overhead mode tiles the grid among users; dedicated mode carves the sensing block first.
    ResourcePlan build_resource_plan(const OfdmNumerology &num, int users, Scheme scheme,
                                     double kappa_p = 0.5, double kappa_q = 0.5,
                                     std::optional<int> p_start = std::nullopt,
                                     std::optional<int> q_start = std::nullopt);

    // QPSK with |b|^2 = 1/P, column-wise streams so any subset of columns is reproducible
    struct SymbolGrid
    {
        CMat values; // P x Q
    };

    SymbolGrid draw_symbols(std::uint64_t seed, const OfdmNumerology &num);

    // Per-symbol transmit beams. user_beams[q * users + u] and sensing_beams[q]; an empty vector means unused.
    struct BeamPlan
    {
        int dim = 0;
        int users = 0;
        int q_count = 0;
        std::vector<CVec> user_beams;
        std::vector<CVec> sensing_beams;
        std::optional<SweepSchedule> schedule;
        int sweep_offset = 0; // symbol index of sweep symbol 0

        static BeamPlan empty(int dim, int users, int q_count);

        CVec &user_beam(int u, int q) { return user_beams[(size_t)q * users + u]; }
        const CVec &user_beam(int u, int q) const { return user_beams[(size_t)q * users + u]; }
        CVec &sensing_beam(int q) { return sensing_beams[q]; }
        const CVec &sensing_beam(int q) const { return sensing_beams[q]; }

        // Beam transmitted on a resource element with the given owner label
        const CVec &beam_for(int owner, int q) const;

        void scale(double factor); // multiplies every beam
        void validate(const ResourcePlan &plan) const;
    };

    // Mean over all resource elements of ||f_{p,q}||^2; unused elements count as zero
    double average_transmit_power(const ResourcePlan &plan, const BeamPlan &beams);

    // Average communication and sensing powers (dedicated: (1-kappa)||f_U||^2 and kappa||f_S||^2 per RE share)
    std::pair<double, double> power_split(const ResourcePlan &plan, const BeamPlan &beams);

    // Y_u[p,q] = h^H f_{u,q} b + noise on the user's REs, zero elsewhere
    CMat synth_ue_grid(const std::vector<PathSpec> &ue, const Upa &upa, const OfdmNumerology &num,
                       const ResourcePlan &plan, int u, const BeamPlan &beams, const SymbolGrid &symbols,
                       std::uint64_t seed, double noise_var);

    // MN x P x Q received cube, sample (e, p, q) at index (q * P + p) * MN + e
    struct SensingTensor
    {
        int mn = 0, p_count = 0, q_count = 0;
        double noise_var = 0.0;
        std::vector<cplx> samples;

        size_t index(int e, int p, int q) const { return ((size_t)q * p_count + p) * mn + e; }
        cplx *column(int p, int q) { return samples.data() + index(0, p, q); }
        const cplx *column(int p, int q) const { return samples.data() + index(0, p, q); }
    };

    // Targets must carry their alpha already resolved. noise_var = 0 gives a noiseless cube.
    SensingTensor synth_sensing_tensor(const std::vector<TargetSpec> &targets, const Upa &upa,
                                       const OfdmNumerology &num, const ResourcePlan &plan,
                                       const BeamPlan &beams, const SymbolGrid &symbols, std::uint64_t seed,
                                       double noise_var);

    // Direct per-RE evaluation, kept as the reference for the parallel kernel
    SensingTensor synth_sensing_tensor_serial(const std::vector<TargetSpec> &targets, const Upa &upa,
                                              const OfdmNumerology &num, const ResourcePlan &plan,
                                              const BeamPlan &beams, const SymbolGrid &symbols,
                                              std::uint64_t seed, double noise_var);

    // Little-endian header {MN, P, Q} as uint64 followed by interleaved float64 re/im
    void write_tensor(const SensingTensor &t, const std::string &path);
    SensingTensor read_tensor(const std::string &path);

    // C_sum in bits/s with the full-band sigma^2 = P df N0 in the SNR
    double sum_rate(const ResourcePlan &plan, const std::vector<std::vector<PathSpec>> &channels,
                    const BeamPlan &beams, const Upa &upa, const OfdmNumerology &num);
}

#endif
