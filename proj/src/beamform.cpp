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

#include "isac/beamform.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

namespace isac
{
    CVec mrt(const AngleAzZe &angle, const Upa &upa)
    {
        return steering_vector(upa, angle).conjugate();
    }

    namespace
    {
        void check_user(const CVec &h_u, double lambda_u, double sigma2, const Upa &upa)
        {
            if (h_u.size() != upa.size())
                throw InvalidArgument("beamformer: user channel length does not match the array");
            if (!(lambda_u > 0.0) || !(sigma2 > 0.0))
                throw InvalidArgument("beamformer: lambda_u and sigma2 must be positive");
        }
    }

    QcqpResult search_beam_sdr(const CVec &h_u, double lambda_u, const AngleAzZe &angle_s, double gamma_bar,
                               double e_min, double sigma2, const Upa &upa, const QcqpOptions &opt)
    {
        check_user(h_u, lambda_u, sigma2, upa);
        if (gamma_bar < 0.0 || e_min < 0.0)
            throw InvalidArgument("search_beam_sdr: thresholds must be nonnegative");
        QcqpSpec spec;
        spec.dim = upa.size();
        spec.constraints.push_back({h_u, sigma2 * gamma_bar / (lambda_u * lambda_u)});
        spec.constraints.push_back({steering_vector(upa, angle_s).conjugate(), upa.size() * e_min});
        return solve_min_power_qcqp(spec, opt);
    }

    CVec search_beam_closed_form(const CVec &h_u, double lambda_u, const AngleAzZe &angle_s, double gamma_bar,
                                 double e_min, double sigma2, const Upa &upa)
    {
        check_user(h_u, lambda_u, sigma2, upa);
        if (gamma_bar < 0.0 || e_min < 0.0)
            throw InvalidArgument("search_beam_closed_form: thresholds must be nonnegative");
        const double mn = upa.size();
        const CVec a_s = steering_vector(upa, angle_s);
        const double a_u = std::sqrt(gamma_bar * sigma2) / lambda_u;
        const cplx ash = a_s.transpose() * h_u;
        const double phi = std::arg(ash);
        const double b = std::max((std::sqrt(mn * e_min) - std::abs(a_u * ash)) / mn, 0.0);
        return a_u * h_u + b * std::polar(1.0, phi) * a_s.conjugate();
    }

    QcqpResult track_beam_dedicated(const std::vector<TrackPrior> &track_set, double gamma_s_bar, double sigma2,
                                    const Upa &upa, const QcqpOptions &opt)
    {
        if (track_set.empty())
            throw InvalidArgument("track_beam_dedicated: empty track set");
        QcqpSpec spec;
        spec.dim = upa.size();
        for (const auto &pr : track_set)
            spec.constraints.push_back({(std::conj(pr.alpha) * steering_vector(upa, pr.angle).conjugate()).eval(),
                                        sigma2 * gamma_s_bar});
        return solve_min_power_qcqp(spec, opt);
    }

    QcqpResult track_beam_shared(const CVec &h_u, double lambda_u, const std::vector<TrackPrior> &track_set,
                                 double gamma_bar, double gamma_s_bar, double sigma2, const Upa &upa,
                                 const QcqpOptions &opt)
    {
        check_user(h_u, lambda_u, sigma2, upa);
        QcqpSpec spec;
        spec.dim = upa.size();
        spec.constraints.push_back({h_u, sigma2 * gamma_bar / (lambda_u * lambda_u)});
        for (const auto &pr : track_set)
            spec.constraints.push_back({(std::conj(pr.alpha) * steering_vector(upa, pr.angle).conjugate()).eval(),
                                        sigma2 * gamma_s_bar});
        return solve_min_power_qcqp(spec, opt);
    }

    CVec zf_extractor(const std::vector<AngleAzZe> &angles, size_t k, const Upa &upa)
    {
        if (k >= angles.size())
            throw InvalidArgument("zf_extractor: angle index out of range");
        const CVec ak = steering_vector(upa, angles[k]);
        if (angles.size() == 1)
            return ak / ak.norm();

        CMat a(upa.size(), (Eigen::Index)angles.size() - 1);
        Eigen::Index col = 0;
        for (size_t j = 0; j < angles.size(); ++j)
            if (j != k)
                a.col(col++) = steering_vector(upa, angles[j]);

        Eigen::JacobiSVD<CMat> svd(a, Eigen::ComputeThinU);
        const RVec &sv = svd.singularValues();
        if (a.cols() > a.rows() || sv[sv.size() - 1] < 1e-6 * sv[0])
            throw InvalidArgument("zf_extractor: interfering steering matrix is rank deficient");

        // Q a_k with Q = I - U U^H, U an orthonormal basis of range(A)
        const CMat &u = svd.matrixU();
        CVec f = ak - u * (u.adjoint() * ak);
        const double nrm = f.norm();
        if (nrm < 1e-8 * ak.norm())
            throw InvalidArgument("zf_extractor: target steering vector lies in the interference span");
        return f / nrm;
    }

    const char *stage_name(Stage s)
    {
        return s == Stage::search ? "search" : "track";
    }

    Thresholds calibrate_power_ratio(Stage stage, double kappa, double base_gamma, double base_ratio)
    {
        if (!(kappa > 0.0 && kappa < 1.0))
            throw InvalidArgument("calibrate_power_ratio: kappa must lie in (0,1) for dedicated resources");
        if (!(base_gamma > 0.0) || !(base_ratio > 0.0))
            throw InvalidArgument("calibrate_power_ratio: base thresholds must be positive");
        const double mult = (1.0 - kappa) / kappa;
        Thresholds th;
        th.gamma_bar = base_gamma;
        if (stage == Stage::search)
            th.sensing = base_gamma * base_ratio * mult; // e_min,D
        else
            th.sensing = base_gamma / base_ratio * mult; // gamma_s,D
        return th;
    }

    Thresholds proposed_thresholds(Stage stage, double base_gamma, double base_ratio)
    {
        Thresholds th;
        th.gamma_bar = base_gamma;
        th.sensing = stage == Stage::search ? base_gamma * base_ratio : base_gamma / base_ratio;
        return th;
    }
}
