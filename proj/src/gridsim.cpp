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

#include "isac/gridsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace isac
{
    const char *scheme_name(Scheme s)
    {
        return s == Scheme::dedicated ? "dedicated" : "zero";
    }

    std::vector<std::pair<int, int>> ResourcePlan::user_set(int u) const
    {
        std::vector<std::pair<int, int>> s;
        for (int q = 0; q < q_count; ++q)
            for (int p = 0; p < p_count; ++p)
                if (owner_at(p, q) == u)
                    s.emplace_back(p, q);
        return s;
    }

    std::vector<std::pair<int, int>> ResourcePlan::sensing_set() const
    {
        return user_set(sensing_owner);
    }

    size_t ResourcePlan::user_count(int u) const
    {
        return (size_t)std::count(owner.begin(), owner.end(), u);
    }

    void ResourcePlan::validate() const
    {
        if (owner.size() != (size_t)p_count * q_count)
            throw InvalidArgument("ResourcePlan: owner map has the wrong size");
        for (int q = 0; q < q_count; ++q)
            for (int p = 0; p < p_count; ++p)
            {
                const int o = owner_at(p, q);
                const bool in_block = p >= p_start && p < p_start + p_len && q >= q_start && q < q_start + q_len;
                if (in_block != (o == sensing_owner))
                    throw InvalidArgument("ResourcePlan: sensing set is not the configured block");
                if (o != sensing_owner && (o < 0 || o >= users))
                    throw InvalidArgument("ResourcePlan: resource element without a valid owner");
            }
        if (scheme == Scheme::zero && has_sensing_block())
            throw InvalidArgument("ResourcePlan: zero-overhead plan with a sensing block");
    }

    ResourcePlan build_resource_plan(const OfdmNumerology &num, int users, Scheme scheme, double kappa_p,
                                     double kappa_q, std::optional<int> p_start, std::optional<int> q_start)
    {
        if (users < 1)
            throw InvalidArgument("build_resource_plan: need at least one user");
        ResourcePlan plan;
        plan.scheme = scheme;
        plan.p_count = num.p_count;
        plan.q_count = num.q_count;
        plan.users = users;
        plan.owner.assign((size_t)num.p_count * num.q_count, 0);

        // rows along p, columns along q, row-major tile order; the last user absorbs spare tiles
        const int rows = (int)std::ceil(std::sqrt(double(users)));
        const int cols = (users + rows - 1) / rows;
        for (int q = 0; q < num.q_count; ++q)
        {
            const int c = (int)((long)q * cols / num.q_count);
            for (int p = 0; p < num.p_count; ++p)
            {
                const int r = (int)((long)p * rows / num.p_count);
                plan.owner[(size_t)q * num.p_count + p] = std::min(r * cols + c, users - 1);
            }
        }

        if (scheme == Scheme::dedicated)
        {
            if (!(kappa_p > 0.0 && kappa_p <= 1.0 && kappa_q > 0.0 && kappa_q <= 1.0))
                throw InvalidArgument("build_resource_plan: kappa_p, kappa_q must lie in (0,1]");
            plan.kappa_p = kappa_p;
            plan.kappa_q = kappa_q;
            plan.p_len = (int)std::lround(kappa_p * num.p_count);
            plan.q_len = (int)std::lround(kappa_q * num.q_count);
            if (plan.p_len < 1 || plan.q_len < 1)
                throw InvalidArgument("build_resource_plan: sensing block rounds to zero size");
            plan.p_start = p_start.value_or(num.p_count - plan.p_len);
            plan.q_start = q_start.value_or(num.q_count - plan.q_len);
            if (plan.p_start < 0 || plan.q_start < 0 || plan.p_start + plan.p_len > num.p_count ||
                plan.q_start + plan.q_len > num.q_count)
                throw InvalidArgument("build_resource_plan: sensing block out of bounds");
            for (int q = plan.q_start; q < plan.q_start + plan.q_len; ++q)
                for (int p = plan.p_start; p < plan.p_start + plan.p_len; ++p)
                    plan.owner[(size_t)q * num.p_count + p] = sensing_owner;
        }
        plan.validate();
        return plan;
    }

    SymbolGrid draw_symbols(std::uint64_t seed, const OfdmNumerology &num)
    {
        SymbolGrid g;
        g.values.resize(num.p_count, num.q_count);
        const double amp = 1.0 / std::sqrt(2.0 * num.p_count);
        for (int q = 0; q < num.q_count; ++q)
        {
            std::mt19937_64 rng(stream_seed(seed, 0x5359'4D00ull + q));
            for (int p = 0; p < num.p_count; ++p)
            {
                const std::uint64_t bits = rng();
                g.values(p, q) = cplx((bits & 1) ? amp : -amp, (bits & 2) ? amp : -amp);
            }
        }
        return g;
    }

    BeamPlan BeamPlan::empty(int dim, int users, int q_count)
    {
        BeamPlan b;
        b.dim = dim;
        b.users = users;
        b.q_count = q_count;
        b.user_beams.assign((size_t)users * q_count, CVec());
        b.sensing_beams.assign(q_count, CVec());
        return b;
    }

    const CVec &BeamPlan::beam_for(int owner, int q) const
    {
        return owner == sensing_owner ? sensing_beam(q) : user_beam(owner, q);
    }

    void BeamPlan::scale(double factor)
    {
        for (auto &f : user_beams)
            f *= factor;
        for (auto &f : sensing_beams)
            f *= factor;
    }

    void BeamPlan::validate(const ResourcePlan &plan) const
    {
        if (q_count != plan.q_count || users != plan.users)
            throw InvalidArgument("BeamPlan: shape does not match the resource plan");
        auto check = [&](const CVec &f) {
            if (f.size() != 0 && (f.size() != dim || !f.allFinite()))
                throw InvalidArgument("BeamPlan: beam with wrong length or non-finite entries");
        };
        for (const auto &f : user_beams)
            check(f);
        for (const auto &f : sensing_beams)
            check(f);
    }

    double average_transmit_power(const ResourcePlan &plan, const BeamPlan &beams)
    {
        auto [c, s] = power_split(plan, beams);
        return c + s;
    }

    std::pair<double, double> power_split(const ResourcePlan &plan, const BeamPlan &beams)
    {
        double comm = 0.0, sens = 0.0;
        for (int q = 0; q < plan.q_count; ++q)
        {
            // accumulate per column to keep the summation order fixed
            double cq = 0.0, sq = 0.0;
            for (int p = 0; p < plan.p_count; ++p)
            {
                const int o = plan.owner_at(p, q);
                const CVec &f = beams.beam_for(o, q);
                (o == sensing_owner ? sq : cq) += f.squaredNorm();
            }
            comm += cq;
            sens += sq;
        }
        const double n = double(plan.p_count) * plan.q_count;
        return {comm / n, sens / n};
    }

    namespace
    {
        void add_noise(cplx *col, size_t count, double noise_var, std::uint64_t seed, int q)
        {
            if (noise_var <= 0.0)
                return;
            std::mt19937_64 rng(stream_seed(seed, q));
            std::normal_distribution<double> nd(0.0, std::sqrt(noise_var / 2.0));
            for (size_t i = 0; i < count; ++i)
            {
                const double re = nd(rng);
                const double im = nd(rng);
                col[i] += cplx(re, im);
            }
        }

        SensingTensor allocate(const Upa &upa, const OfdmNumerology &num, double noise_var)
        {
            SensingTensor t;
            t.mn = upa.size();
            t.p_count = num.p_count;
            t.q_count = num.q_count;
            t.noise_var = noise_var;
            t.samples.assign((size_t)t.mn * t.p_count * t.q_count, cplx(0.0, 0.0));
            return t;
        }

        void check_inputs(const ResourcePlan &plan, const BeamPlan &beams, const OfdmNumerology &num,
                          const SymbolGrid &symbols)
        {
            if (plan.p_count != num.p_count || plan.q_count != num.q_count)
                throw InvalidArgument("synthesis: plan does not match numerology");
            if (symbols.values.rows() != num.p_count || symbols.values.cols() != num.q_count)
                throw InvalidArgument("synthesis: symbol grid does not match numerology");
            beams.validate(plan);
        }
    }

    SensingTensor synth_sensing_tensor(const std::vector<TargetSpec> &targets, const Upa &upa,
                                       const OfdmNumerology &num, const ResourcePlan &plan,
                                       const BeamPlan &beams, const SymbolGrid &symbols, std::uint64_t seed,
                                       double noise_var)
    {
        check_inputs(plan, beams, num, symbols);
        SensingTensor t = allocate(upa, num, noise_var);
        const int K = (int)targets.size();
        const int mn = upa.size();
        const int owners = plan.users + 1; // slot 0 is the sensing role

        std::vector<CVec> a(K);
        std::vector<double> tau(K), fd(K);
        for (int k = 0; k < K; ++k)
        {
            a[k] = steering_vector(upa, targets[k].angle);
            tau[k] = targets[k].delay();
            fd[k] = targets[k].doppler(num);
        }

        const int Q = num.q_count, P = num.p_count;
#pragma omp parallel for schedule(static)
        for (int q = 0; q < Q; ++q)
        {
            // a_k^T f for every owner active in this symbol
            std::vector<cplx> gain((size_t)owners * K, cplx(0.0));
            std::vector<char> active(owners, 0);
            for (int o = -1; o < plan.users; ++o)
            {
                const CVec &f = beams.beam_for(o, q);
                if (f.size() == 0)
                    continue;
                active[o + 1] = 1;
                for (int k = 0; k < K; ++k)
                    gain[(size_t)(o + 1) * K + k] = a[k].transpose() * f;
            }
            std::vector<cplx> doppler_ph(K);
            for (int k = 0; k < K; ++k)
                doppler_ph[k] = std::polar(1.0, 2.0 * pi * fd[k] * q * num.t_o);

            std::vector<cplx> coef(K);
            for (int p = 0; p < P; ++p)
            {
                const int o = plan.owner_at(p, q);
                cplx *col = t.column(p, q);
                if (!active[o + 1] || K == 0)
                    continue;
                const cplx b = symbols.values(p, q);
                for (int k = 0; k < K; ++k)
                    coef[k] = targets[k].alpha * gain[(size_t)(o + 1) * K + k] * b *
                              std::polar(1.0, -2.0 * pi * p * num.delta_f * tau[k]) * doppler_ph[k];
                for (int e = 0; e < mn; ++e)
                {
                    cplx acc(0.0, 0.0);
                    for (int k = 0; k < K; ++k)
                        acc += coef[k] * a[k][e];
                    col[e] = acc;
                }
            }
            add_noise(t.column(0, q), (size_t)mn * P, noise_var, seed, q);
        }
        return t;
    }

    SensingTensor synth_sensing_tensor_serial(const std::vector<TargetSpec> &targets, const Upa &upa,
                                              const OfdmNumerology &num, const ResourcePlan &plan,
                                              const BeamPlan &beams, const SymbolGrid &symbols,
                                              std::uint64_t seed, double noise_var)
    {
        check_inputs(plan, beams, num, symbols);
        SensingTensor t = allocate(upa, num, noise_var);
        const int mn = upa.size();
        for (int q = 0; q < num.q_count; ++q)
        {
            for (int p = 0; p < num.p_count; ++p)
            {
                const CVec &f = beams.beam_for(plan.owner_at(p, q), q);
                if (f.size() == 0)
                    continue;
                Eigen::Map<CVec> col(t.column(p, q), mn);
                for (const auto &tg : targets)
                {
                    const CVec a = steering_vector(upa, tg.angle);
                    const cplx at_f = a.transpose() * f;
                    col += tg.alpha * a * at_f * symbols.values(p, q) * target_phase(tg, num, p, q);
                }
            }
            add_noise(t.column(0, q), (size_t)mn * num.p_count, noise_var, seed, q);
        }
        return t;
    }

    void write_tensor(const SensingTensor &t, const std::string &path)
    {
        static_assert(std::endian::native == std::endian::little, "tensor dump assumes a little-endian host");
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot open " + path);
        const std::uint64_t hdr[3] = {(std::uint64_t)t.mn, (std::uint64_t)t.p_count, (std::uint64_t)t.q_count};
        os.write(reinterpret_cast<const char *>(hdr), sizeof(hdr));
        os.write(reinterpret_cast<const char *>(t.samples.data()), (std::streamsize)(t.samples.size() * sizeof(cplx)));
    }

    SensingTensor read_tensor(const std::string &path)
    {
        std::ifstream is(path, std::ios::binary);
        if (!is)
            throw std::runtime_error("cannot open " + path);
        std::uint64_t hdr[3];
        is.read(reinterpret_cast<char *>(hdr), sizeof(hdr));
        SensingTensor t;
        t.mn = (int)hdr[0];
        t.p_count = (int)hdr[1];
        t.q_count = (int)hdr[2];
        t.samples.resize((size_t)hdr[0] * hdr[1] * hdr[2]);
        is.read(reinterpret_cast<char *>(t.samples.data()), (std::streamsize)(t.samples.size() * sizeof(cplx)));
        if (!is)
            throw std::runtime_error("truncated tensor file " + path);
        return t;
    }

    CMat synth_ue_grid(const std::vector<PathSpec> &ue, const Upa &upa, const OfdmNumerology &num,
                       const ResourcePlan &plan, int u, const BeamPlan &beams, const SymbolGrid &symbols,
                       std::uint64_t seed, double noise_var)
    {
        check_inputs(plan, beams, num, symbols);
        CMat y = CMat::Zero(num.p_count, num.q_count);
        for (int q = 0; q < num.q_count; ++q)
        {
            std::mt19937_64 rng(stream_seed(seed ^ 0x55454752ull, (std::uint64_t)u * num.q_count + q));
            std::normal_distribution<double> nd(0.0, std::sqrt(std::max(noise_var, 0.0) / 2.0));
            for (int p = 0; p < num.p_count; ++p)
            {
                if (plan.owner_at(p, q) != u)
                    continue;
                const CVec &f = beams.user_beam(u, q);
                if (f.size() == 0)
                    throw InvalidArgument("synth_ue_grid: missing beam for an occupied symbol");
                const cplx s = ue_channel_at(ue, upa, num, p, q).adjoint() * f;
                y(p, q) = s * symbols.values(p, q);
                if (noise_var > 0.0)
                {
                    const double re = nd(rng);
                    y(p, q) += cplx(re, nd(rng));
                }
            }
        }
        return y;
    }

    double sum_rate(const ResourcePlan &plan, const std::vector<std::vector<PathSpec>> &channels,
                    const BeamPlan &beams, const Upa &upa, const OfdmNumerology &num)
    {
        if ((int)channels.size() < plan.users)
            throw InvalidArgument("sum_rate: fewer channels than users");
        const double sigma2 = num.sigma2_full();
        double total = 0.0;
        for (int u = 0; u < plan.users; ++u)
        {
            const auto &ue = channels[u];
            std::vector<CVec> a(ue.size());
            for (size_t l = 0; l < ue.size(); ++l)
                a[l] = steering_vector(upa, ue[l].angle);
            std::vector<cplx> af(ue.size());
            for (int q = 0; q < plan.q_count; ++q)
            {
                const CVec &f = beams.user_beam(u, q);
                bool fetched = false;
                double col = 0.0;
                for (int p = 0; p < plan.p_count; ++p)
                {
                    if (plan.owner_at(p, q) != u || f.size() == 0)
                        continue;
                    if (!fetched)
                    {
                        for (size_t l = 0; l < ue.size(); ++l)
                            af[l] = a[l].transpose() * f;
                        fetched = true;
                    }
                    // h^H f = sum_l alpha_l (a_l^T f) exp(j2pi(fD q T_O - p df tau))
                    cplx hf(0.0, 0.0);
                    for (size_t l = 0; l < ue.size(); ++l)
                        hf += ue[l].alpha * af[l] *
                              std::polar(1.0, 2.0 * pi * (ue[l].doppler * q * num.t_o - p * num.delta_f * ue[l].delay));
                    col += std::log2(1.0 + std::norm(hf) / sigma2);
                }
                total += col;
            }
        }
        return total / (num.q_count * num.t_o);
    }
}
