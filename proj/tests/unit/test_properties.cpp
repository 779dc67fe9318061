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

// Randomised invariants. Each generator is a plain function of a seeded engine so failures replay exactly.
#include "isac/experiment.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace isac;

namespace
{
    struct Gen
    {
        std::mt19937_64 rng;
        explicit Gen(std::uint64_t seed) : rng(seed) {}

        int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
        double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
        cplx gauss()
        {
            std::normal_distribution<double> n;
            return {n(rng), n(rng)};
        }
        CVec vec(int dim)
        {
            CVec v(dim);
            for (auto &x : v)
                x = gauss();
            return v;
        }
        AngleAzZe angle() { return {real(0.0, 180.0), real(0.0, 180.0)}; }
        Upa upa() { return {integer(1, 6), integer(1, 6), 0.5}; }
    };

    constexpr int cases = 60;
}

TEST_CASE("property: steering vectors have unit-modulus entries")
{
    Gen g(1);
    for (int i = 0; i < cases; ++i)
    {
        const Upa u = g.upa();
        const CVec a = steering_vector(u, g.angle());
        for (auto x : a)
            CHECK(std::abs(x) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("property: QCQP solutions are feasible and no cheaper than the relaxation")
{
    Gen g(2);
    for (int i = 0; i < cases; ++i)
    {
        QcqpSpec spec;
        spec.dim = g.integer(2, 12);
        const int k = g.integer(1, 4);
        for (int c = 0; c < k; ++c)
            spec.constraints.push_back({g.vec(spec.dim), g.real(0.1, 5.0)});
        const QcqpResult r = solve_min_power_qcqp(spec);
        for (const auto &c : spec.constraints)
            CHECK(std::norm(c.g.dot(r.f)) >= c.t * (1.0 - 1e-6));
        CHECK(r.power >= r.sdr_bound * (1.0 - 1e-7));
        CHECK(r.power == doctest::Approx(r.f.squaredNorm()).epsilon(1e-12));
    }
}

TEST_CASE("property: closed-form searching beam never beats the relaxation")
{
    Gen g(3);
    const Upa upa{4, 4, 0.5};
    for (int i = 0; i < cases; ++i)
    {
        CVec h = g.vec(16);
        h /= h.norm();
        const double lambda = g.real(0.1, 2.0), gamma = g.real(0.1, 4.0), e_min = g.real(0.0, 3.0);
        const AngleAzZe s = g.angle();
        const CVec f = search_beam_closed_form(h, lambda, s, gamma, e_min, 1.0, upa);
        const QcqpResult sdr = search_beam_sdr(h, lambda, s, gamma, e_min, 1.0, upa);
        CHECK(f.squaredNorm() >= sdr.power * (1.0 - 1e-6));
        CHECK(std::norm(h.dot(f)) * lambda * lambda >= gamma * (1.0 - 1e-9));
        CHECK(beam_gain(upa, f, s) >= 16.0 * e_min * (1.0 - 1e-9));
    }
}

TEST_CASE("property: denoising keeps exactly the strongest bins")
{
    Gen g(4);
    for (int i = 0; i < cases; ++i)
    {
        DdTensor dd;
        dd.mn = g.integer(1, 4);
        dd.g_count = g.integer(1, 9);
        dd.w_count = g.integer(1, 9);
        dd.bins.resize((size_t)dd.mn * dd.bin_count());
        // coarse values so ties are common
        for (auto &x : dd.bins)
            x = cplx(g.integer(-2, 2), 0.0);
        const auto before = bin_energies(dd);
        const size_t keep = (size_t)g.integer(1, (int)dd.bin_count());
        DdTensor out = dd;
        denoise_top(out, keep);
        const auto after = bin_energies(out);

        double retained_min = 1e300;
        size_t kept = 0;
        for (size_t b = 0; b < after.size(); ++b)
            if (after[b] > 0.0)
            {
                retained_min = std::min(retained_min, before[b]);
                ++kept;
            }
        CHECK(kept <= keep);
        for (size_t b = 0; b < before.size(); ++b)
            if (before[b] > retained_min)
                CHECK(after[b] == before[b]);
    }
}

TEST_CASE("property: smoothed covariance is Hermitian with the subarray size")
{
    Gen g(5);
    for (int i = 0; i < cases / 2; ++i)
    {
        const Upa upa{g.integer(2, 5), g.integer(2, 5), 0.5};
        DdTensor dd;
        dd.mn = upa.size();
        dd.g_count = g.integer(1, 6);
        dd.w_count = g.integer(1, 6);
        dd.bins.resize((size_t)dd.mn * dd.bin_count());
        for (auto &x : dd.bins)
            x = g.gauss();
        const int ic = g.integer(1, upa.m), jc = g.integer(1, upa.n);
        const CMat r = smoothed_covariance(dd, upa, ic, jc);
        CHECK(r.rows() == (upa.m - ic + 1) * (upa.n - jc + 1));
        CHECK((r - r.adjoint()).norm() <= 1e-12 * r.norm());
    }
}

TEST_CASE("property: beam equalization never emits non-finite values")
{
    Gen g(6);
    const Upa upa{4, 4, 0.5};
    const OfdmNumerology num = OfdmNumerology::make(16, 8, 120e3, 2.0833e-6, 28e9, -169.0);
    for (int i = 0; i < cases / 2; ++i)
    {
        const ResourcePlan plan = build_resource_plan(num, g.integer(1, 3), Scheme::zero);
        BeamPlan beams = BeamPlan::empty(16, plan.users, plan.q_count);
        for (int q = 0; q < plan.q_count; ++q)
            for (int u = 0; u < plan.users; ++u)
                beams.user_beam(u, q) = g.integer(0, 3) == 0 ? CVec::Zero(16) : g.vec(16);
        CMat y(16, 8);
        for (auto &x : y.reshaped())
            x = g.gauss();
        const TfWindow w = equalize_by_beams(y, draw_symbols(i, num), plan, beams, g.angle(), upa, 0, 16, 0, 8);
        CHECK(w.values.allFinite());
        CHECK(w.used_count + w.excluded <= 16u * 8u);
    }
}

TEST_CASE("property: scoring is invariant to estimate order")
{
    Gen g(7);
    for (int i = 0; i < cases; ++i)
    {
        std::vector<TruthTarget> truth(g.integer(1, 4));
        for (auto &t : truth)
            t = {g.angle(), g.real(0.0, 1e-6), g.real(-3000.0, 3000.0)};
        std::vector<DetectedTarget> est(g.integer(0, 5));
        for (auto &e : est)
        {
            // near a random truth target, sometimes duplicated
            const auto &t = truth[g.integer(0, (int)truth.size() - 1)];
            e.angle = {std::clamp(t.angle.azimuth + g.real(-5, 5), 0.0, 180.0),
                       std::clamp(t.angle.zenith + g.real(-5, 5), 0.0, 180.0)};
            e.delay = t.delay + g.real(-1e-8, 1e-8);
            e.doppler = t.doppler;
        }
        if (est.size() > 1 && g.integer(0, 1))
            est.back() = est.front();
        const Gates gates{4.0, 1e-8};
        const ScoreReport a = match_and_score(truth, est, gates);
        std::vector<DetectedTarget> shuffled = est;
        std::shuffle(shuffled.begin(), shuffled.end(), g.rng);
        const ScoreReport b = match_and_score(truth, shuffled, gates);
        CHECK(a.detected_count == b.detected_count);
        CHECK(a.matched == b.matched);
        CHECK(a.rmse_azimuth == b.rmse_azimuth);
        CHECK(a.rmse_delay == b.rmse_delay);
        CHECK(a.detected_count <= (int)truth.size());
    }
}

TEST_CASE("property: resource plans partition the grid")
{
    Gen g(8);
    for (int i = 0; i < cases; ++i)
    {
        const OfdmNumerology num = OfdmNumerology::make(g.integer(4, 40), g.integer(4, 40), 120e3, 2.0833e-6, 28e9, -169.0);
        const int users = g.integer(1, 5);
        const bool ded = g.integer(0, 1);
        const double kp = g.real(0.2, 1.0), kq = g.real(0.2, 1.0);
        const ResourcePlan plan = build_resource_plan(num, users, ded ? Scheme::dedicated : Scheme::zero, kp, kq);
        size_t total = plan.sensing_set().size();
        for (int u = 0; u < users; ++u)
            total += plan.user_count(u);
        CHECK(total == (size_t)num.p_count * num.q_count);
        if (ded)
            CHECK(plan.sensing_set().size() == (size_t)plan.p_len * plan.q_len);
    }
}

TEST_CASE("property: averaged bounds fall with transmit power")
{
    Gen g(9);
    const OfdmNumerology num;
    for (int i = 0; i < cases; ++i)
    {
        const double kp = g.real(0.1, 1.0), kq = g.real(0.1, 1.0), gain = g.real(1e-12, 1e-6), p = g.real(0.01, 100.0);
        const AcrbReport lo = acrb(num, kp, kq, gain, p, {4, 4, 0.5});
        const AcrbReport hi = acrb(num, kp, kq, gain, 2.0 * p, {4, 4, 0.5});
        CHECK(hi.acrb_delay < lo.acrb_delay);
        CHECK(hi.acrb_doppler < lo.acrb_doppler);
    }
}
