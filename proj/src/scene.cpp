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

#include "isac/scene.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace isac
{
    OfdmNumerology OfdmNumerology::make(int p, int q, double delta_f, double t_cp, double f_c, double n0_dbm_hz)
    {
        OfdmNumerology num;
        num.p_count = p;
        num.q_count = q;
        num.delta_f = delta_f;
        num.t_cp = t_cp;
        num.t_o = 1.0 / delta_f + t_cp;
        num.f_c = f_c;
        num.n0 = db_to_linear(n0_dbm_hz);
        num.validate();
        return num;
    }

    void OfdmNumerology::validate() const
    {
        if (p_count < 1 || q_count < 1)
            throw InvalidArgument("numerology: P and Q must be >= 1");
        if (!(delta_f > 0.0) || !(t_cp >= 0.0) || !(f_c > 0.0) || !(n0 >= 0.0))
            throw InvalidArgument("numerology: nonpositive physical parameter");
        if (std::abs(t_o - (1.0 / delta_f + t_cp)) > 1e-12)
            throw InvalidArgument("numerology: t_o must equal 1/delta_f + t_cp");
    }

    double range_to_delay(double range_m) { return 2.0 * range_m / speed_of_light; }
    double delay_to_range(double delay_s) { return speed_of_light * delay_s / 2.0; }
    double velocity_to_doppler(double velocity, const OfdmNumerology &num) { return 2.0 * velocity / num.wavelength(); }
    double doppler_to_velocity(double doppler, const OfdmNumerology &num) { return doppler * num.wavelength() / 2.0; }

    double TargetSpec::delay() const { return range_to_delay(range); }
    double TargetSpec::doppler(const OfdmNumerology &num) const { return velocity_to_doppler(velocity, num); }

    CVec ue_channel_at(const std::vector<PathSpec> &ue, const Upa &upa, const OfdmNumerology &num, int p, int q)
    {
        if (ue.empty())
            throw InvalidArgument("ue_channel_at: empty path list");
        CVec h = CVec::Zero(upa.size());
        for (const auto &path : ue)
        {
            const double ph = 2.0 * pi * (path.doppler * q * num.t_o - p * num.delta_f * path.delay);
            h += std::conj(path.alpha * std::polar(1.0, ph)) * steering_vector(upa, path.angle).conjugate();
        }
        return h;
    }

    double ChannelStats::lambda() const { return std::sqrt(lambda2); }

    ChannelStats channel_covariance(const std::vector<PathSpec> &ue, const Upa &upa, const OfdmNumerology &num,
                                    const std::vector<std::pair<int, int>> &gamma_u)
    {
        if (ue.empty())
            throw InvalidArgument("channel_covariance: empty path list");
        if (gamma_u.empty())
            throw InvalidArgument("channel_covariance: empty resource set");

        // h = sum_l v_l c_l(p,q) with v_l = conj(alpha_l a_l) and c_l a unit phase, so
        // R = sum_{l,l'} v_l v_l'^H mean(c_l conj(c_l')).
        const size_t L = ue.size();
        std::vector<CVec> v(L);
        for (size_t l = 0; l < L; ++l)
            v[l] = std::conj(ue[l].alpha) * steering_vector(upa, ue[l].angle).conjugate();

        CMat cross = CMat::Zero(L, L);
        std::vector<cplx> c(L);
        for (const auto &[p, q] : gamma_u)
        {
            for (size_t l = 0; l < L; ++l)
                c[l] = std::polar(1.0, -2.0 * pi * (ue[l].doppler * q * num.t_o - p * num.delta_f * ue[l].delay));
            for (size_t l = 0; l < L; ++l)
                for (size_t k = 0; k < L; ++k)
                    cross(l, k) += c[l] * std::conj(c[k]);
        }
        cross /= double(gamma_u.size());

        ChannelStats st;
        st.r = CMat::Zero(upa.size(), upa.size());
        for (size_t l = 0; l < L; ++l)
            for (size_t k = 0; k < L; ++k)
                st.r += cross(l, k) * v[l] * v[k].adjoint();
        st.r = 0.5 * (st.r + st.r.adjoint()).eval();

        Eigen::SelfAdjointEigenSolver<CMat> es(st.r);
        const Eigen::Index top = st.r.rows() - 1;
        st.lambda2 = std::max(es.eigenvalues()[top], 0.0);
        st.h_u = es.eigenvectors().col(top);
        // fix the arbitrary eigenvector phase so that the largest entry is real positive
        Eigen::Index imax;
        st.h_u.cwiseAbs().maxCoeff(&imax);
        st.h_u *= std::polar(1.0, -std::arg(st.h_u[imax]));
        return st;
    }

    double alpha_magnitude_from_rcs(double rcs_dbsm, double range_m, const OfdmNumerology &num)
    {
        if (!(range_m > 0.0))
            throw InvalidArgument("alpha_from_rcs: range must be positive");
        const double lambda = num.wavelength();
        const double sigma = db_to_linear(rcs_dbsm);
        return std::sqrt(lambda * lambda * sigma / (std::pow(4.0 * pi, 3) * std::pow(range_m, 4)));
    }

    cplx alpha_from_rcs(double rcs_dbsm, double range_m, const OfdmNumerology &num, std::mt19937_64 &rng)
    {
        const double mag = alpha_magnitude_from_rcs(rcs_dbsm, range_m, num);
        std::uniform_real_distribution<double> uni(0.0, 2.0 * pi);
        return std::polar(mag, uni(rng));
    }

    cplx target_phase(const TargetSpec &target, const OfdmNumerology &num, int p, int q)
    {
        return std::polar(1.0, -2.0 * pi * p * num.delta_f * target.delay()) *
               std::polar(1.0, 2.0 * pi * target.doppler(num) * q * num.t_o);
    }
}
