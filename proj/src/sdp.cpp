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

#include "isac/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace isac
{
    namespace sdp
    {
        namespace
        {
            // Re tr(A B)
            double re_trace_product(const CMat &a, const CMat &b)
            {
                return a.cwiseProduct(b.transpose()).sum().real();
            }

            CMat herm(const CMat &x) { return 0.5 * (x + x.adjoint()); }

            RVec apply_a(const Problem &p, const CMat &w)
            {
                RVec r(p.a.size());
                for (size_t i = 0; i < p.a.size(); ++i)
                    r[i] = re_trace_product(p.a[i], w);
                return r;
            }

            // Largest step t <= 1/frac with x + t dx PSD, scaled by frac
            double step_length(const CMat &x, const CMat &dx, double frac)
            {
                Eigen::LLT<CMat> llt(x);
                const CMat linv = llt.matrixL().solve(CMat::Identity(x.rows(), x.cols()));
                const CMat s = herm(linv * dx * linv.adjoint());
                const double lmin = Eigen::SelfAdjointEigenSolver<CMat>(s, Eigen::EigenvaluesOnly).eigenvalues()[0];
                if (lmin >= 0.0)
                    return 1.0;
                return std::min(1.0, frac * (-1.0 / lmin));
            }
        }

        Solution solve(const Problem &prob, const CMat &w0, const RVec &y0, const Options &opt)
        {
            const Eigen::Index n = prob.c.rows();
            const size_t m = prob.a.size();
            Solution s;
            s.w = w0;
            s.y = y0;
            s.z = prob.c;
            for (size_t i = 0; i < m; ++i)
                s.z -= y0[i] * prob.a[i];

            const double bnorm = 1.0 + prob.b.norm();
            const double cnorm = 1.0 + prob.c.norm();

            for (int it = 0; it <= opt.max_iter; ++it)
            {
                const RVec rp = prob.b - apply_a(prob, s.w);
                CMat rd = prob.c - s.z;
                for (size_t i = 0; i < m; ++i)
                    rd -= s.y[i] * prob.a[i];
                rd = herm(rd);

                s.primal_objective = re_trace_product(prob.c, s.w);
                s.dual_objective = prob.b.dot(s.y);
                const double gap = re_trace_product(s.w, s.z);
                s.relative_gap = std::abs(gap) / (1.0 + std::abs(s.primal_objective) + std::abs(s.dual_objective));
                s.primal_residual = rp.norm() / bnorm;
                s.dual_residual = rd.norm() / cnorm;
                s.iterations = it;
                if (s.relative_gap <= opt.tol && s.primal_residual <= opt.tol && s.dual_residual <= opt.tol)
                {
                    s.converged = true;
                    break;
                }
                if (it == opt.max_iter)
                    break;

                const double mu = gap / double(n);
                const CMat zinv = herm(Eigen::LLT<CMat>(s.z).solve(CMat::Identity(n, n)));

                // Schur complement M_ij = Re tr(A_i Z^-1 A_j W)
                std::vector<CMat> g(m);
                for (size_t j = 0; j < m; ++j)
                    g[j] = zinv * prob.a[j] * s.w;
                RMat schur(m, m);
                for (size_t i = 0; i < m; ++i)
                    for (size_t j = 0; j < m; ++j)
                        schur(i, j) = re_trace_product(prob.a[i], g[j]);
                Eigen::LDLT<RMat> ldlt(0.5 * (schur + schur.transpose()));

                const CMat zrw = zinv * rd * s.w;
                const RVec base = rp + apply_a(prob, s.w) + apply_a(prob, zrw);

                auto direction = [&](double sigma_mu, const CMat *corr, RVec &dy, CMat &dz, CMat &dw) {
                    RVec rhs = base - sigma_mu * apply_a(prob, zinv);
                    if (corr)
                        rhs += apply_a(prob, *corr);
                    dy = ldlt.solve(rhs);
                    dz = rd;
                    for (size_t i = 0; i < m; ++i)
                        dz -= dy[i] * prob.a[i];
                    CMat raw = sigma_mu * zinv - s.w - zinv * dz * s.w;
                    if (corr)
                        raw -= *corr;
                    dw = herm(raw);
                };

                // predictor
                RVec dy;
                CMat dz, dw;
                direction(0.0, nullptr, dy, dz, dw);
                const double ap_aff = step_length(s.w, dw, 1.0);
                const double ad_aff = step_length(s.z, dz, 1.0);
                const double mu_aff =
                    re_trace_product(s.w + ap_aff * dw, s.z + ad_aff * dz) / double(n);
                const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

                // corrector
                const CMat corr = zinv * dz * dw;
                direction(sigma * mu, &corr, dy, dz, dw);
                const double ap = step_length(s.w, dw, opt.step_fraction);
                const double ad = step_length(s.z, dz, opt.step_fraction);

                s.w = herm(s.w + ap * dw);
                s.y += ad * dy;
                s.z = herm(s.z + ad * dz);
            }
            return s;
        }
    }

    void QcqpSpec::validate() const
    {
        if (dim < 1)
            throw InvalidArgument("QcqpSpec: dimension must be >= 1");
        if (constraints.empty())
            throw InvalidArgument("QcqpSpec: at least one constraint is required");
        for (const auto &c : constraints)
        {
            if (c.g.size() != dim)
                throw InvalidArgument("QcqpSpec: constraint vector has the wrong length");
            if (!(c.t >= 0.0) || !std::isfinite(c.t))
                throw InvalidArgument("QcqpSpec: thresholds must be finite and nonnegative");
            if (!(c.g.norm() > 0.0))
                throw InvalidArgument("QcqpSpec: zero constraint vector");
        }
    }

    namespace
    {
        // Real basis of Hermitian r x r matrices
        std::vector<CMat> hermitian_basis(int r)
        {
            std::vector<CMat> basis;
            for (int i = 0; i < r; ++i)
            {
                CMat e = CMat::Zero(r, r);
                e(i, i) = 1.0;
                basis.push_back(e);
            }
            for (int i = 0; i < r; ++i)
                for (int j = i + 1; j < r; ++j)
                {
                    CMat e = CMat::Zero(r, r);
                    e(i, j) = e(j, i) = 1.0;
                    basis.push_back(e);
                    CMat f = CMat::Zero(r, r);
                    f(i, j) = cplx(0.0, 1.0);
                    f(j, i) = cplx(0.0, -1.0);
                    basis.push_back(f);
                }
            return basis;
        }

        // Factor X = V V^H keeping eigenvalues above rel * lambda_max
        CMat psd_factor(const CMat &x, double rel)
        {
            Eigen::SelfAdjointEigenSolver<CMat> es(x);
            const RVec &ev = es.eigenvalues();
            const double lmax = ev[ev.size() - 1];
            std::vector<Eigen::Index> keep;
            for (Eigen::Index i = ev.size() - 1; i >= 0; --i)
                if (ev[i] > rel * lmax)
                    keep.push_back(i);
            CMat v(x.rows(), (Eigen::Index)keep.size());
            for (size_t k = 0; k < keep.size(); ++k)
                v.col(k) = es.eigenvectors().col(keep[k]) * std::sqrt(ev[keep[k]]);
            return v;
        }

        // Rank reduction that keeps every c_i^H X c_i fixed; stops once rank^2 <= m
        CMat reduce_rank(CMat v, const std::vector<CVec> &c)
        {
            const size_t m = c.size();
            while (v.cols() > 1 && (size_t)(v.cols() * v.cols()) > m)
            {
                const int r = (int)v.cols();
                const auto basis = hermitian_basis(r);
                RMat e(m, basis.size());
                for (size_t i = 0; i < m; ++i)
                {
                    const CVec w = v.adjoint() * c[i];
                    for (size_t k = 0; k < basis.size(); ++k)
                        e(i, k) = (w.adjoint() * basis[k] * w)(0, 0).real();
                }
                Eigen::JacobiSVD<RMat> svd(e, Eigen::ComputeFullV);
                const RVec x = svd.matrixV().col(svd.matrixV().cols() - 1);
                CMat delta = CMat::Zero(r, r);
                for (size_t k = 0; k < basis.size(); ++k)
                    delta += x[k] * basis[k];
                Eigen::SelfAdjointEigenSolver<CMat> es(delta);
                const RVec &dv = es.eigenvalues();
                const double dmax = std::abs(dv[0]) > std::abs(dv[r - 1]) ? dv[0] : dv[r - 1];
                const CMat core = CMat::Identity(r, r) - delta / dmax;
                const CMat xr = v * core * v.adjoint();
                const CMat vnext = psd_factor(0.5 * (xr + xr.adjoint()), 1e-10);
                if (vnext.cols() >= r)
                    break; // numerical stall; leave the remainder to randomization
                v = vnext;
            }
            return v;
        }
    }

    QcqpResult solve_min_power_qcqp(const QcqpSpec &spec, const QcqpOptions &opt)
    {
        spec.validate();
        QcqpResult res;
        res.f = CVec::Zero(spec.dim);

        std::vector<const QcqpConstraint *> act;
        for (const auto &c : spec.constraints)
            if (c.t > 0.0)
                act.push_back(&c);
        if (act.empty())
            return res;
        const int m = (int)act.size();

        // orthonormal basis of span{g_i}; the optimum has no component outside it
        CMat gmat(spec.dim, m);
        for (int i = 0; i < m; ++i)
            gmat.col(i) = act[i]->g;
        Eigen::JacobiSVD<CMat> gsvd(gmat, Eigen::ComputeThinU);
        const RVec &sv = gsvd.singularValues();
        int r = 0;
        while (r < sv.size() && sv[r] > 1e-10 * sv[0])
            ++r;
        const CMat basis = gsvd.matrixU().leftCols(r);

        std::vector<CVec> c(m);
        RVec t(m);
        for (int i = 0; i < m; ++i)
        {
            const double gn = act[i]->g.norm();
            c[i] = basis.adjoint() * act[i]->g / gn;
            t[i] = act[i]->t / (gn * gn);
        }
        const double tscale = t.maxCoeff();
        t /= tscale;

        // W = blkdiag(X, diag(s)), constraints c_i^H X c_i - s_i = t_i
        const int n = r + m;
        sdp::Problem prob;
        prob.c = CMat::Zero(n, n);
        prob.c.topLeftCorner(r, r).setIdentity();
        prob.b = t;
        for (int i = 0; i < m; ++i)
        {
            CMat a = CMat::Zero(n, n);
            a.topLeftCorner(r, r) = c[i] * c[i].adjoint();
            a(r + i, r + i) = -1.0;
            prob.a.push_back(a);
        }
        sdp::Options sopt;
        sopt.tol = opt.tol;
        sopt.max_iter = opt.max_iter;
        const sdp::Solution sol = sdp::solve(prob, CMat::Identity(n, n), RVec::Constant(m, 0.5 / m), sopt);
        res.iterations = sol.iterations;
        if (!sol.converged && !(sol.relative_gap <= 1e-6 && sol.primal_residual <= 1e-6 && sol.dual_residual <= 1e-6))
            throw SolverError("QCQP relaxation did not converge", sol.primal_residual, sol.dual_residual,
                              sol.relative_gap);

        CMat x = sol.w.topLeftCorner(r, r);
        x = 0.5 * (x + x.adjoint());
        res.sdr_bound = x.trace().real() * tscale;

        Eigen::SelfAdjointEigenSolver<CMat> es(x);
        const RVec &ev = es.eigenvalues();
        CVec fr;
        if (r == 1 || ev[r - 2] <= opt.rank1_ratio * ev[r - 1])
        {
            fr = es.eigenvectors().col(r - 1) * std::sqrt(std::max(ev[r - 1], 0.0));
            res.rank_one = true;
        }
        else
        {
            const CMat v = reduce_rank(psd_factor(x, 1e-9), c);
            if (v.cols() == 1)
            {
                fr = v.col(0);
                res.rank_one = true;
            }
            else
            {
                // Gaussian randomisation on X = V V^H, each sample rescaled onto the feasible set
                res.randomized = true;
                std::mt19937_64 rng(opt.seed);
                std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
                auto rescaled = [&](const CVec &xi) {
                    double s2 = 0.0;
                    for (int i = 0; i < m; ++i)
                    {
                        const double g2 = std::norm(c[i].dot(xi));
                        s2 = std::max(s2, g2 > 0.0 ? t[i] / g2 : std::numeric_limits<double>::infinity());
                    }
                    return std::sqrt(s2) * xi;
                };
                fr = rescaled(v.col(0));
                double best = fr.squaredNorm();
                for (int k = 0; k < opt.random_samples; ++k)
                {
                    CVec z(v.cols());
                    for (Eigen::Index j = 0; j < z.size(); ++j)
                    {
                        const double re = nd(rng);
                        z[j] = cplx(re, nd(rng));
                    }
                    const CVec cand = rescaled(v * z);
                    const double pw = cand.squaredNorm();
                    if (pw < best)
                    {
                        best = pw;
                        fr = cand;
                    }
                }
            }
        }

        CVec f = basis * fr * std::sqrt(tscale);
        double s2 = 0.0;
        for (int i = 0; i < m; ++i)
        {
            const double g2 = std::norm(act[i]->g.dot(f));
            s2 = std::max(s2, g2 > 0.0 ? act[i]->t / g2 : std::numeric_limits<double>::infinity());
        }
        if (!std::isfinite(s2))
            throw SolverError("QCQP rank-one extraction produced a null direction", 0.0, 0.0, sol.relative_gap);
        res.f = f * std::sqrt(s2);
        res.power = res.f.squaredNorm();
        return res;
    }
}
