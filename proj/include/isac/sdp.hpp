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

#ifndef ISAC_SDP_HPP
#define ISAC_SDP_HPP

#include "isac/common.hpp"

#include <cstdint>
#include <vector>

namespace isac
{
    namespace sdp
    {
        // min Re tr(C W)  s.t.  Re tr(A_i W) = b_i,  W Hermitian PSD
        struct Problem
        {
            CMat c;
            std::vector<CMat> a;
            RVec b;
        };

        struct Options
        {
            double tol = 1e-9;
            int max_iter = 100;
            double step_fraction = 0.98;
        };

        struct Solution
        {
            CMat w;
            RVec y;
            CMat z;
            int iterations = 0;
            double primal_objective = 0.0;
            double dual_objective = 0.0;
            double relative_gap = 0.0;
            double primal_residual = 0.0;
            double dual_residual = 0.0;
            bool converged = false;
        };

        // Infeasible-start primal-dual interior point (HKM direction, Mehrotra predictor-corrector).
        // z0 = C - sum y0_i A_i must be positive definite, as must w0.
        Solution solve(const Problem &prob, const CMat &w0, const RVec &y0, const Options &opt = {});
    }

    // |g_i^H f|^2 >= t_i
    struct QcqpConstraint
    {
        CVec g;
        double t = 0.0;
    };

    struct QcqpSpec
    {
        int dim = 0;
        std::vector<QcqpConstraint> constraints;

        void validate() const;
    };

    struct QcqpOptions
    {
        double tol = 1e-9;
        int max_iter = 100;
        int random_samples = 200;
        std::uint64_t seed = 0x5eed0001ull;
        double rank1_ratio = 1e-6; // lambda_2 / lambda_1 below this counts as rank one
    };

    struct QcqpResult
    {
        CVec f;
        double power = 0.0;     // ||f||^2
        double sdr_bound = 0.0; // relaxed optimum, a lower bound on power
        bool rank_one = false;  // relaxation was tight (directly or after rank reduction)
        bool randomized = false;
        int iterations = 0;
    };

    // min ||f||^2 subject to the constraints, via semidefinite relaxation on span{g_i}
    QcqpResult solve_min_power_qcqp(const QcqpSpec &spec, const QcqpOptions &opt = {});
}

#endif
