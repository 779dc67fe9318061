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

#include "isac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace isac
{
    AcrbReport acrb(const OfdmNumerology &num, double kappa_p, double kappa_q, double gain2, double p_tx_s,
                    const Upa &upa)
    {
        const double kp2 = std::pow(kappa_p * num.p_count, 2) - 1.0;
        const double kq2 = std::pow(kappa_q * num.q_count, 2) - 1.0;
        if (!(kp2 > 0.0) || !(kq2 > 0.0))
            throw InvalidArgument("acrb: kappa_p P and kappa_q Q must exceed 1");
        if (!(gain2 > 0.0) || !(p_tx_s > 0.0))
            throw InvalidArgument("acrb: gain and power must be positive");
        const double common = 2.0 * pi * pi * p_tx_s * gain2 * num.q_count * upa.size();
        AcrbReport r;
        r.acrb_delay = 3.0 * num.n0 / (common * kp2 * num.delta_f);
        r.acrb_doppler = 3.0 * num.n0 * num.delta_f / (common * kq2 * num.t_o * num.t_o);
        r.kappa_p = kappa_p;
        r.kappa_q = kappa_q;
        r.p_tx_s = p_tx_s;
        r.gain2 = gain2;
        return r;
    }

    std::pair<double, double> resolution(const OfdmNumerology &num, double kappa_p, double kappa_q)
    {
        if (!(kappa_p > 0.0) || !(kappa_q > 0.0))
            throw InvalidArgument("resolution: kappa must be positive");
        return {1.0 / (kappa_p * num.p_count * num.delta_f), 1.0 / (kappa_q * num.q_count * num.t_o)};
    }

    double dedicated_rate_closed_form(const OfdmNumerology &num, double kappa, double p_tx_c, double alpha_u,
                                      const Upa &upa)
    {
        if (!(kappa >= 0.0 && kappa < 1.0))
            throw InvalidArgument("dedicated_rate_closed_form: kappa must lie in [0,1)");
        const double share = 1.0 - kappa;
        const double snr = upa.size() * p_tx_c * alpha_u * alpha_u / (share * num.sigma2_full());
        return share * num.p_count / num.t_o * std::log2(1.0 + snr);
    }

    Gates default_gates(const OfdmNumerology &num, const Upa &upa)
    {
        return {rad2deg(1.0) / upa.m, 1.0 / (num.p_count * num.delta_f)};
    }

    ScoreReport match_and_score(const std::vector<TruthTarget> &truth, const std::vector<DetectedTarget> &est,
                                const Gates &gates)
    {
        if (!(gates.angle_deg > 0.0) || !(gates.delay_s > 0.0))
            throw InvalidArgument("match_and_score: gates must be positive");

        struct Pair
        {
            double d;
            size_t t, e;
        };
        // tie-break on the estimate values so the result does not depend on the estimate order
        const auto key = [&](size_t e) {
            return std::make_tuple(est[e].angle.azimuth, est[e].angle.zenith, est[e].delay, est[e].doppler);
        };
        std::vector<Pair> pairs;
        for (size_t t = 0; t < truth.size(); ++t)
            for (size_t e = 0; e < est.size(); ++e)
            {
                const double da = (est[e].angle.azimuth - truth[t].angle.azimuth) / gates.angle_deg;
                const double dz = (est[e].angle.zenith - truth[t].angle.zenith) / gates.angle_deg;
                const double dt = (est[e].delay - truth[t].delay) / gates.delay_s;
                pairs.push_back({std::sqrt(da * da + dz * dz + dt * dt), t, e});
            }
        std::sort(pairs.begin(), pairs.end(), [&](const Pair &a, const Pair &b) {
            if (a.d != b.d)
                return a.d < b.d;
            if (a.t != b.t)
                return a.t < b.t;
            return key(a.e) < key(b.e);
        });

        ScoreReport rep;
        rep.matched.assign(truth.size(), 0);
        rep.match_of.assign(truth.size(), -1);
        std::vector<char> used(est.size(), 0);
        for (const auto &p : pairs)
        {
            if (rep.match_of[p.t] >= 0 || used[p.e])
                continue;
            const auto &e = est[p.e];
            const auto &t = truth[p.t];
            if (std::abs(e.angle.azimuth - t.angle.azimuth) > gates.angle_deg ||
                std::abs(e.angle.zenith - t.angle.zenith) > gates.angle_deg ||
                std::abs(e.delay - t.delay) > gates.delay_s)
                continue;
            rep.match_of[p.t] = (int)p.e;
            rep.matched[p.t] = 1;
            used[p.e] = 1;
        }

        double tmin = 0.0, tmax = 0.0, fmin = 0.0, fmax = 0.0;
        if (!truth.empty())
        {
            const auto [lo, hi] = std::minmax_element(truth.begin(), truth.end(),
                                                      [](const auto &a, const auto &b) { return a.delay < b.delay; });
            tmin = lo->delay;
            tmax = hi->delay;
            const auto [flo, fhi] = std::minmax_element(
                truth.begin(), truth.end(), [](const auto &a, const auto &b) { return a.doppler < b.doppler; });
            fmin = flo->doppler;
            fmax = fhi->doppler;
        }
        double sa = 0.0, sz = 0.0, st = 0.0, sf = 0.0;
        for (size_t t = 0; t < truth.size(); ++t)
        {
            if (rep.matched[t])
            {
                const auto &e = est[rep.match_of[t]];
                ++rep.detected_count;
                sa += std::pow(e.angle.azimuth - truth[t].angle.azimuth, 2);
                sz += std::pow(e.angle.zenith - truth[t].angle.zenith, 2);
                st += std::pow(e.delay - truth[t].delay, 2);
                sf += std::pow(e.doppler - truth[t].doppler, 2);
            }
            else
            {
                sa += 90.0 * 90.0;
                sz += 90.0 * 90.0;
                st += std::pow(tmax - tmin, 2);
                sf += std::pow(fmax - fmin, 2);
            }
        }
        if (!truth.empty())
        {
            const double n = double(truth.size());
            rep.rmse_azimuth = std::sqrt(sa / n);
            rep.rmse_zenith = std::sqrt(sz / n);
            rep.rmse_delay = std::sqrt(st / n);
            rep.rmse_doppler = std::sqrt(sf / n);
        }
        return rep;
    }
}
