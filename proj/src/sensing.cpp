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

#include "isac/sensing.hpp"
#include "isac/fft.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>

namespace isac
{
    SensingTensor remove_symbol_randomness(const SensingTensor &tensor, const SymbolGrid &symbols)
    {
        if (symbols.values.rows() != tensor.p_count || symbols.values.cols() != tensor.q_count)
            throw InvalidArgument("remove_symbol_randomness: symbol grid does not match the tensor");
        SensingTensor out = tensor;
        const int P = tensor.p_count, Q = tensor.q_count, mn = tensor.mn;
        for (int q = 0; q < Q; ++q)
            for (int p = 0; p < P; ++p)
            {
                const cplx b = symbols.values(p, q);
                if (b == cplx(0.0, 0.0))
                    throw InvalidArgument("remove_symbol_randomness: zero modulation symbol");
                const cplx inv = 1.0 / b;
                cplx *col = out.column(p, q);
                for (int e = 0; e < mn; ++e)
                    col[e] *= inv;
            }
        out.noise_var = tensor.noise_var / std::norm(symbols.values(0, 0));
        return out;
    }

    DdTensor dd_transform(const SensingTensor &y_tilde, const ResourcePlan &plan, const SweepSchedule *schedule)
    {
        if (plan.p_count != y_tilde.p_count || plan.q_count != y_tilde.q_count)
            throw InvalidArgument("dd_transform: plan does not match the tensor");
        const bool block = plan.has_sensing_block();
        const int p0 = block ? plan.p_start : 0, p_len = block ? plan.p_len : plan.p_count;
        const int q0 = block ? plan.q_start : 0, q_len = block ? plan.q_len : plan.q_count;

        DdTensor dd;
        dd.mn = y_tilde.mn;
        dd.g_count = y_tilde.p_count;
        dd.w_count = q_len;
        dd.search_layout = schedule != nullptr;
        if (schedule)
        {
            if (schedule->total_symbols != q_len)
                throw InvalidArgument("dd_transform: sweep length does not match the sensing symbols");
            dd.block = schedule->symbols_per_beam;
        }
        else
            dd.block = q_len;
        dd.bins.assign((size_t)dd.mn * dd.g_count * dd.w_count, cplx(0.0, 0.0));

        const int mn = dd.mn, P = dd.g_count;
        for (int w = 0; w < q_len; ++w)
            for (int p = p0; p < p0 + p_len; ++p)
                std::copy_n(y_tilde.column(p, q0 + w), mn, dd.bins.data() + dd.index(0, p, w));

        fft::execute(dd.bins.data(), {{P, mn}}, {{mn, 1}, {q_len, P * mn}}, fft::backward);
        const int nblocks = q_len / dd.block;
        fft::execute(dd.bins.data(), {{dd.block, P * mn}}, {{P * mn, 1}, {nblocks, dd.block * P * mn}},
                     fft::forward);
        return dd;
    }

    std::vector<double> bin_energies(const DdTensor &dd)
    {
        std::vector<double> en(dd.bin_count());
        for (size_t b = 0; b < en.size(); ++b)
        {
            const cplx *c = dd.bins.data() + b * dd.mn;
            double s = 0.0;
            for (int e = 0; e < dd.mn; ++e)
                s += std::norm(c[e]);
            en[b] = s;
        }
        return en;
    }

    void denoise_top(DdTensor &dd, size_t keep_count)
    {
        if (keep_count < 1)
            throw InvalidArgument("denoise_top: keep count must be >= 1");
        const size_t nb = dd.bin_count();
        if (keep_count >= nb)
            return;
        const auto en = bin_energies(dd);
        // bin index b = w * g_count + g, so ascending b is not (g, w) order; compare (g, w) explicitly
        auto gw_less = [&](size_t a, size_t b) {
            const size_t ga = a % dd.g_count, wa = a / dd.g_count, gb = b % dd.g_count, wb = b / dd.g_count;
            return ga != gb ? ga < gb : wa < wb;
        };
        std::vector<size_t> idx(nb);
        std::iota(idx.begin(), idx.end(), size_t(0));
        std::nth_element(idx.begin(), idx.begin() + (keep_count - 1), idx.end(), [&](size_t a, size_t b) {
            return en[a] != en[b] ? en[a] > en[b] : gw_less(a, b);
        });
        std::vector<char> keep(nb, 0);
        for (size_t i = 0; i < keep_count; ++i)
            keep[idx[i]] = 1;
        for (size_t b = 0; b < nb; ++b)
            if (!keep[b])
                std::fill_n(dd.bins.data() + b * dd.mn, dd.mn, cplx(0.0, 0.0));
    }

    void denoise_threshold(DdTensor &dd, double threshold)
    {
        if (!(threshold >= 0.0))
            throw InvalidArgument("denoise_threshold: threshold must be nonnegative");
        const auto en = bin_energies(dd);
        for (size_t b = 0; b < en.size(); ++b)
            if (en[b] < threshold)
                std::fill_n(dd.bins.data() + b * dd.mn, dd.mn, cplx(0.0, 0.0));
    }

    namespace
    {
        struct SmoothingLayout
        {
            int m_sub, n_sub, d_sub;
            std::vector<std::vector<int>> idx;
        };

        SmoothingLayout smoothing_layout(const DdTensor &dd, const Upa &upa, int i_count, int j_count)
        {
            if (dd.mn != upa.size())
                throw InvalidArgument("smoothed_covariance: array does not match the tensor");
            if (i_count < 1 || j_count < 1 || i_count > upa.m || j_count > upa.n)
                throw InvalidArgument("smoothed_covariance: subarray larger than the array");
            SmoothingLayout s;
            s.m_sub = upa.m - i_count + 1;
            s.n_sub = upa.n - j_count + 1;
            s.d_sub = s.m_sub * s.n_sub;
            for (int i = 0; i < i_count; ++i)
                for (int j = 0; j < j_count; ++j)
                    s.idx.push_back(subarray_indices(upa, i, j, s.m_sub, s.n_sub));
            return s;
        }

        CMat forward_backward(const CMat &r, double norm)
        {
            const Eigen::Index d = r.rows();
            CMat fb(d, d);
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = 0; j < d; ++j)
                    fb(i, j) = 0.5 * (r(i, j) + std::conj(r(d - 1 - i, d - 1 - j))) / norm;
            return 0.5 * (fb + fb.adjoint());
        }
    }

    CMat smoothed_covariance(const DdTensor &dd, const Upa &upa, int i_count, int j_count)
    {
        const SmoothingLayout lay = smoothing_layout(dd, upa, i_count, j_count);
        const size_t nsub = lay.idx.size();

        std::vector<size_t> live;
        for (size_t b = 0; b < dd.bin_count(); ++b)
        {
            const cplx *c = dd.bins.data() + b * dd.mn;
            if (std::any_of(c, c + dd.mn, [](const cplx &x) { return x != cplx(0.0, 0.0); }))
                live.push_back(b);
        }

        // fixed chunking so the summation order does not depend on the thread count
        constexpr size_t chunk = 512;
        const size_t nchunks = (live.size() + chunk - 1) / chunk;
        std::vector<CMat> part(nchunks);
#pragma omp parallel for schedule(static)
        for (long ci = 0; ci < (long)nchunks; ++ci)
        {
            const size_t b0 = (size_t)ci * chunk, b1 = std::min(live.size(), b0 + chunk);
            CMat d(lay.d_sub, (Eigen::Index)((b1 - b0) * nsub));
            Eigen::Index col = 0;
            for (size_t k = b0; k < b1; ++k)
            {
                const cplx *c = dd.bins.data() + live[k] * dd.mn;
                for (const auto &ix : lay.idx)
                {
                    for (int r = 0; r < lay.d_sub; ++r)
                        d(r, col) = c[ix[r]];
                    ++col;
                }
            }
            part[ci] = d * d.adjoint();
        }
        CMat r = CMat::Zero(lay.d_sub, lay.d_sub);
        for (const auto &p : part)
            r += p;
        return forward_backward(r, double(dd.bin_count()) * nsub);
    }

    CMat smoothed_covariance_serial(const DdTensor &dd, const Upa &upa, int i_count, int j_count)
    {
        const SmoothingLayout lay = smoothing_layout(dd, upa, i_count, j_count);
        CMat r = CMat::Zero(lay.d_sub, lay.d_sub);
        CVec x(lay.d_sub);
        for (size_t b = 0; b < dd.bin_count(); ++b)
        {
            const cplx *c = dd.bins.data() + b * dd.mn;
            for (const auto &ix : lay.idx)
            {
                for (int k = 0; k < lay.d_sub; ++k)
                    x[k] = c[ix[k]];
                r += x * x.adjoint();
            }
        }
        return forward_backward(r, double(dd.bin_count()) * lay.idx.size());
    }

    int AngleGrid::az_count() const { return (int)std::floor((az_max - az_min) / step + 1e-9) + 1; }
    int AngleGrid::ze_count() const { return (int)std::floor((ze_max - ze_min) / step + 1e-9) + 1; }

    namespace
    {
        CMat noise_subspace(const CMat &r_fb, int k_a)
        {
            const Eigen::Index d = r_fb.rows();
            if (k_a < 1 || k_a >= d)
                throw InvalidArgument("music_spectrum: k_a must satisfy 1 <= k_a < subarray size");
            Eigen::SelfAdjointEigenSolver<CMat> es(r_fb);
            return es.eigenvectors().leftCols(d - k_a); // eigenvalues ascending
        }

        constexpr double music_floor = 1e-300;
    }

    RMat music_spectrum(const CMat &r_fb, int k_a, const Upa &upa_sub, const AngleGrid &grid)
    {
        if (r_fb.rows() != upa_sub.size())
            throw InvalidArgument("music_spectrum: covariance size does not match the subarray");
        const CMat en = noise_subspace(r_fb, k_a);
        const CMat en_h = en.adjoint();
        const int na = grid.az_count(), nz = grid.ze_count();
        RMat spec(na, nz);
#pragma omp parallel for schedule(static)
        for (int j = 0; j < nz; ++j)
        {
            const double th = deg2rad(grid.ze(j));
            const double v = std::cos(th), st = std::sin(th);
            CVec az_part(upa_sub.n);
            for (int n = 0; n < upa_sub.n; ++n)
                az_part[n] = std::polar(1.0, 2.0 * pi * upa_sub.spacing * v * n);
            CVec a(upa_sub.size());
            for (int i = 0; i < na; ++i)
            {
                const double u = std::cos(deg2rad(grid.az(i))) * st;
                for (int m = 0; m < upa_sub.m; ++m)
                {
                    const cplx ax = std::polar(1.0, 2.0 * pi * upa_sub.spacing * u * m);
                    for (int n = 0; n < upa_sub.n; ++n)
                        a[m * upa_sub.n + n] = ax * az_part[n];
                }
                spec(i, j) = 1.0 / std::max((en_h * a).squaredNorm(), music_floor);
            }
        }
        return spec;
    }

    RMat music_spectrum_serial(const CMat &r_fb, int k_a, const Upa &upa_sub, const AngleGrid &grid)
    {
        if (r_fb.rows() != upa_sub.size())
            throw InvalidArgument("music_spectrum: covariance size does not match the subarray");
        const CMat en = noise_subspace(r_fb, k_a);
        const CMat proj = en * en.adjoint();
        RMat spec(grid.az_count(), grid.ze_count());
        for (int i = 0; i < spec.rows(); ++i)
            for (int j = 0; j < spec.cols(); ++j)
            {
                const CVec a = steering_vector(upa_sub, {grid.az(i), grid.ze(j)});
                spec(i, j) = 1.0 / std::max((a.adjoint() * proj * a)(0, 0).real(), music_floor);
            }
        return spec;
    }

    namespace
    {
        // Vertex offset of a parabola through three log-values, clamped to half a step
        double parabolic_offset(double lm, double l0, double lp)
        {
            const double den = lm - 2.0 * l0 + lp;
            if (!(den < 0.0))
                return 0.0;
            return std::clamp(0.5 * (lm - lp) / den, -0.5, 0.5);
        }

        // Strict local maximum over the 8-neighbourhood; ties go to the lower linear index.
        // With wrap, indices are taken modulo the size in both dimensions.
        template <typename Mat>
        bool is_local_max(const Mat &x, Eigen::Index i, Eigen::Index j, bool wrap)
        {
            const double v = x(i, j);
            const Eigen::Index R = x.rows(), C = x.cols();
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj)
                {
                    if (di == 0 && dj == 0)
                        continue;
                    Eigen::Index ii = i + di, jj = j + dj;
                    if (wrap)
                    {
                        ii = (ii + R) % R;
                        jj = (jj + C) % C;
                        if (ii == i && jj == j)
                            continue;
                    }
                    else if (ii < 0 || jj < 0 || ii >= R || jj >= C)
                        continue;
                    const double nv = x(ii, jj);
                    const bool earlier = jj * R + ii < j * R + i;
                    if (earlier ? !(v > nv) : !(v >= nv))
                        return false;
                }
            return true;
        }
    }

    std::vector<AngleEstimate> pick_angles(const RMat &spectrum, int k_a, const AngleGrid &grid)
    {
        struct Cand
        {
            double v;
            Eigen::Index i, j;
        };
        std::vector<Cand> cands;
        for (Eigen::Index j = 0; j < spectrum.cols(); ++j)
            for (Eigen::Index i = 0; i < spectrum.rows(); ++i)
                if (is_local_max(spectrum, i, j, false))
                    cands.push_back({spectrum(i, j), i, j});
        std::stable_sort(cands.begin(), cands.end(), [](const Cand &a, const Cand &b) { return a.v > b.v; });
        if ((int)cands.size() > k_a)
            cands.resize(k_a);

        std::vector<AngleEstimate> out;
        for (const auto &c : cands)
        {
            const auto lg = [&](Eigen::Index i, Eigen::Index j) { return std::log(spectrum(i, j)); };
            double di = 0.0, dj = 0.0;
            if (c.i > 0 && c.i + 1 < spectrum.rows())
                di = parabolic_offset(lg(c.i - 1, c.j), lg(c.i, c.j), lg(c.i + 1, c.j));
            if (c.j > 0 && c.j + 1 < spectrum.cols())
                dj = parabolic_offset(lg(c.i, c.j - 1), lg(c.i, c.j), lg(c.i, c.j + 1));
            AngleEstimate e;
            e.angle.azimuth = std::clamp(grid.az(0) + (c.i + di) * grid.step, 0.0, 180.0);
            e.angle.zenith = std::clamp(grid.ze(0) + (c.j + dj) * grid.step, 0.0, 180.0);
            e.spectrum_peak = c.v;
            out.push_back(e);
        }
        return out;
    }

    AngleAzZe polish_angle(const CMat &r_fb, int k_a, const Upa &upa_sub, const AngleAzZe &start, double max_step)
    {
        const CMat en_h = noise_subspace(r_fb, k_a).adjoint();
        const auto cost = [&](double az, double ze) {
            return (en_h * steering_vector_uv(upa_sub, std::cos(deg2rad(az)) * std::sin(deg2rad(ze)),
                                              std::cos(deg2rad(ze))))
                .squaredNorm();
        };
        const double h = 1e-3;
        double az = start.azimuth, ze = start.zenith;
        double f0 = cost(az, ze);
        for (int it = 0; it < 12; ++it)
        {
            const double fpa = cost(az + h, ze), fma = cost(az - h, ze);
            const double fpz = cost(az, ze + h), fmz = cost(az, ze - h);
            const double fpp = cost(az + h, ze + h), fmm = cost(az - h, ze - h);
            const double fpm = cost(az + h, ze - h), fmp = cost(az - h, ze + h);
            const Eigen::Vector2d g((fpa - fma) / (2 * h), (fpz - fmz) / (2 * h));
            Eigen::Matrix2d H;
            H(0, 0) = (fpa - 2 * f0 + fma) / (h * h);
            H(1, 1) = (fpz - 2 * f0 + fmz) / (h * h);
            H(0, 1) = H(1, 0) = (fpp - fpm - fmp + fmm) / (4 * h * h);
            if (!(H.determinant() > 0.0 && H(0, 0) > 0.0))
                break;
            const Eigen::Vector2d step = -H.ldlt().solve(g);
            const double naz = az + step[0], nze = ze + step[1];
            if (std::abs(naz - start.azimuth) > max_step || std::abs(nze - start.zenith) > max_step || naz < 0.0 ||
                naz > 180.0 || nze < 0.0 || nze > 180.0)
                break;
            const double f1 = cost(naz, nze);
            if (!(f1 <= f0))
                break;
            az = naz;
            ze = nze;
            f0 = f1;
            if (step.norm() < 1e-12)
                break;
        }
        return {az, ze};
    }

    int count_sources(const CMat &r_fb, double ratio)
    {
        Eigen::SelfAdjointEigenSolver<CMat> es(r_fb, Eigen::EigenvaluesOnly);
        const RVec ev = es.eigenvalues().reverse();
        if (!(ev[0] > 0.0))
            return 1;
        int k = 1;
        while (k < ev.size() - 1 && ev[k] / ev[0] >= ratio)
            ++k;
        return k;
    }

    std::vector<int> symbol_set_for_angle(const SweepSchedule &schedule, const AngleAzZe &angle_est,
                                          const Upa &upa)
    {
        if (schedule.beams.empty())
            throw InvalidArgument("symbol_set_for_angle: empty schedule");
        const double w = 1.0 / upa.m;
        const double sp = std::sin(deg2rad(angle_est.azimuth)), st = std::sin(deg2rad(angle_est.zenith));
        std::vector<int> out;
        for (int q = 0; q < (int)schedule.beams.size(); ++q)
        {
            const double dp = std::sin(deg2rad(schedule.beams[q].azimuth)) - sp;
            const double dt = std::sin(deg2rad(schedule.beams[q].zenith)) - st;
            if (dp >= -w && dp < w && dt >= -w && dt < w)
                out.push_back(q);
        }
        return out;
    }

    int closest_beam_block(const SweepSchedule &schedule, const AngleAzZe &angle_est, const Upa &upa)
    {
        const CVec a = steering_vector(upa, angle_est);
        int best = 0;
        double best_v = -1.0;
        for (int nb = 0; nb < schedule.beam_count(); ++nb)
        {
            const double v = std::abs(steering_vector(upa, schedule.block_angle(nb)).dot(a));
            if (v > best_v * (1.0 + 1e-12))
            {
                best_v = v;
                best = nb;
            }
        }
        return best;
    }

    CMat extract_angle_grid(const SensingTensor &tensor, const CVec &f_zf)
    {
        if (f_zf.size() != tensor.mn)
            throw InvalidArgument("extract_angle_grid: combiner length does not match the tensor");
        CMat y(tensor.p_count, tensor.q_count);
#pragma omp parallel for schedule(static)
        for (int q = 0; q < tensor.q_count; ++q)
            for (int p = 0; p < tensor.p_count; ++p)
                y(p, q) = f_zf.dot(Eigen::Map<const CVec>(tensor.column(p, q), tensor.mn));
        return y;
    }

    namespace
    {
        TfWindow make_window(const CMat &y_grid, int p0, int p_len, int q0, int q_len)
        {
            if (p_len < 1 || q_len < 1 || p0 < 0 || q0 < 0 || p0 + p_len > y_grid.rows() || q0 + q_len > y_grid.cols())
                throw InvalidArgument("equalize: window outside the resource grid");
            TfWindow w;
            w.p0 = p0;
            w.q0 = q0;
            w.values = CMat::Zero(p_len, q_len);
            w.used = Eigen::Matrix<char, -1, -1>::Zero(p_len, q_len);
            return w;
        }
    }

    TfWindow equalize_by_symbols(const CMat &y_grid, const SymbolGrid &symbols, int p0, int p_len, int q0,
                                 int q_len)
    {
        TfWindow w = make_window(y_grid, p0, p_len, q0, q_len);
        for (int q = 0; q < q_len; ++q)
            for (int p = 0; p < p_len; ++p)
            {
                const cplx b = symbols.values(p0 + p, q0 + q);
                if (b == cplx(0.0, 0.0))
                    throw InvalidArgument("equalize: zero modulation symbol");
                w.values(p, q) = y_grid(p0 + p, q0 + q) / b;
                w.used(p, q) = 1;
            }
        w.used_count = (size_t)p_len * q_len;
        return w;
    }

    TfWindow equalize_by_beams(const CMat &y_grid, const SymbolGrid &symbols, const ResourcePlan &plan,
                               const BeamPlan &beams, const AngleAzZe &angle_est, const Upa &upa, int p0,
                               int p_len, int q0, int q_len, double floor)
    {
        TfWindow w = make_window(y_grid, p0, p_len, q0, q_len);
        const CVec a = steering_vector(upa, angle_est);
        const double min_beta = floor * std::sqrt(1.0 / plan.p_count);
        std::vector<cplx> af(plan.users + 1);
        std::vector<char> has(plan.users + 1);
        for (int q = 0; q < q_len; ++q)
        {
            for (int o = -1; o < plan.users; ++o)
            {
                const CVec &f = beams.beam_for(o, q0 + q);
                has[o + 1] = f.size() != 0;
                af[o + 1] = has[o + 1] ? cplx(a.transpose() * f) : cplx(0.0);
            }
            for (int p = 0; p < p_len; ++p)
            {
                const int o = plan.owner_at(p0 + p, q0 + q);
                if (!has[o + 1])
                    continue;
                const cplx beta = af[o + 1] * symbols.values(p0 + p, q0 + q);
                if (std::abs(beta) < min_beta)
                {
                    ++w.excluded;
                    continue;
                }
                w.values(p, q) = y_grid(p0 + p, q0 + q) / beta;
                w.used(p, q) = 1;
                ++w.used_count;
            }
        }
        return w;
    }

    double Periodogram::fd_at(int w) const
    {
        return (w < (fd_bins + 1) / 2 ? w : w - fd_bins) * fd_step;
    }

    Periodogram periodogram(const TfWindow &win, const OfdmNumerology &num, int oversample)
    {
        if (win.used_count == 0)
            throw InvalidArgument("periodogram: empty resource set");
        if (oversample < 1)
            throw InvalidArgument("periodogram: oversample must be >= 1");
        const int lp = (int)win.values.rows(), lq = (int)win.values.cols();
        const int np = oversample * lp, nq = oversample * lq;
        CMat x = CMat::Zero(np, nq);
        x.topLeftCorner(lp, lq) = win.values;
        fft::transform_columns(x, fft::backward);
        fft::transform_rows(x, fft::forward);

        Periodogram per;
        const double inv = 1.0 / double(win.used_count);
        per.power = x.cwiseAbs2() * (inv * inv);
        per.tau_step = 1.0 / (np * num.delta_f);
        per.fd_step = 1.0 / (nq * num.t_o);
        per.fd_bins = nq;
        return per;
    }

    cplx periodogram_value(const TfWindow &win, const OfdmNumerology &num, double tau, double fd)
    {
        if (win.used_count == 0)
            throw InvalidArgument("periodogram: empty resource set");
        const int lp = (int)win.values.rows(), lq = (int)win.values.cols();
        CVec ep(lp);
        for (int p = 0; p < lp; ++p)
            ep[p] = std::polar(1.0, 2.0 * pi * (win.p0 + p) * num.delta_f * tau);
        cplx s(0.0, 0.0);
        for (int q = 0; q < lq; ++q)
            s += std::polar(1.0, -2.0 * pi * (win.q0 + q) * num.t_o * fd) * (win.values.col(q).transpose() * ep)(0, 0);
        return s / double(win.used_count);
    }

    namespace
    {
        // |S|^2 with gradient and Hessian in normalised coordinates x = tau df, y = fD T_O,
        // S = sum v[p, q] exp(j2pi(p x - q y)) with centred local indices
        struct LocalFit
        {
            double f;
            Eigen::Vector2d grad;
            Eigen::Matrix2d hess;
        };

        LocalFit local_fit(const CMat &v, double x, double y)
        {
            const int lp = (int)v.rows(), lq = (int)v.cols();
            const double cp = 0.5 * (lp - 1), cq = 0.5 * (lq - 1);
            CVec e0(lp), e1(lp), e2(lp);
            for (int p = 0; p < lp; ++p)
            {
                const double pc = p - cp;
                e0[p] = std::polar(1.0, 2.0 * pi * pc * x);
                e1[p] = pc * e0[p];
                e2[p] = pc * e1[p];
            }
            const CVec u0 = v.transpose() * e0, u1 = v.transpose() * e1, u2 = v.transpose() * e2;
            cplx s(0), sx(0), sxx(0), sy(0), syy(0), sxy(0);
            for (int q = 0; q < lq; ++q)
            {
                const double qc = q - cq;
                const cplx eq = std::polar(1.0, -2.0 * pi * qc * y);
                s += eq * u0[q];
                sx += eq * u1[q];
                sxx += eq * u2[q];
                sy += qc * eq * u0[q];
                syy += qc * qc * eq * u0[q];
                sxy += qc * eq * u1[q];
            }
            const double a = 2.0 * pi;
            const cplx j(0.0, 1.0);
            sx *= j * a;
            sxx *= -a * a;
            sy *= -j * a;
            syy *= -a * a;
            sxy *= a * a;
            LocalFit lf;
            lf.f = std::norm(s);
            lf.grad << 2.0 * (std::conj(s) * sx).real(), 2.0 * (std::conj(s) * sy).real();
            lf.hess(0, 0) = 2.0 * (std::norm(sx) + (std::conj(s) * sxx).real());
            lf.hess(1, 1) = 2.0 * (std::norm(sy) + (std::conj(s) * syy).real());
            lf.hess(0, 1) = lf.hess(1, 0) = 2.0 * ((std::conj(sx) * sy).real() + (std::conj(s) * sxy).real());
            return lf;
        }
    }

    std::vector<DelayDopplerPeak> pick_delay_doppler(const TfWindow &win, const Periodogram &per,
                                                     const OfdmNumerology &num, const PeakOptions &opt)
    {
        const RMat &pw = per.power;
        const double vmax = pw.maxCoeff();
        std::vector<double> tmp(pw.data(), pw.data() + pw.size());
        std::nth_element(tmp.begin(), tmp.begin() + tmp.size() / 2, tmp.end());
        const double noise_mean = tmp[tmp.size() / 2] / std::log(2.0);
        const double thr = std::max(opt.relative_threshold * vmax, opt.noise_factor * noise_mean);

        struct Cand
        {
            double v;
            Eigen::Index g, w;
        };
        std::vector<Cand> cands;
        for (Eigen::Index w = 0; w < pw.cols(); ++w)
            for (Eigen::Index g = 0; g < pw.rows(); ++g)
                if (pw(g, w) >= thr && pw(g, w) > 0.0 && is_local_max(pw, g, w, true))
                    cands.push_back({pw(g, w), g, w});
        std::stable_sort(cands.begin(), cands.end(), [](const Cand &a, const Cand &b) { return a.v > b.v; });
        if ((int)cands.size() > opt.max_peaks)
            cands.resize(opt.max_peaks);

        const Eigen::Index R = pw.rows(), C = pw.cols();
        std::vector<DelayDopplerPeak> out;
        for (const auto &c : cands)
        {
            const auto lg = [&](Eigen::Index g, Eigen::Index w) {
                return std::log(std::max(pw((g + R) % R, (w + C) % C), 1e-300));
            };
            const double dg = parabolic_offset(lg(c.g - 1, c.w), lg(c.g, c.w), lg(c.g + 1, c.w));
            const double dw = parabolic_offset(lg(c.g, c.w - 1), lg(c.g, c.w), lg(c.g, c.w + 1));
            double x = (c.g + dg) * per.tau_step * num.delta_f;
            double y = (per.fd_at((int)c.w) + dw * per.fd_step) * num.t_o;

            if (opt.newton)
            {
                // bounded Newton ascent on the exact periodogram, kept within one grid step of the start
                const double x0 = x, y0 = y;
                const double sx = per.tau_step * num.delta_f, sy = per.fd_step * num.t_o;
                CMat masked = win.values;
                for (Eigen::Index q = 0; q < masked.cols(); ++q)
                    for (Eigen::Index p = 0; p < masked.rows(); ++p)
                        if (!win.used(p, q))
                            masked(p, q) = 0.0;
                LocalFit lf = local_fit(masked, x, y);
                for (int it = 0; it < 8; ++it)
                {
                    if (!(lf.hess.determinant() > 0.0 && lf.hess(0, 0) < 0.0))
                        break;
                    const Eigen::Vector2d step = -lf.hess.ldlt().solve(lf.grad);
                    const double nx = x + step[0], ny = y + step[1];
                    if (std::abs(nx - x0) > sx || std::abs(ny - y0) > sy)
                        break;
                    const LocalFit nf = local_fit(masked, nx, ny);
                    if (!(nf.f >= lf.f))
                        break;
                    x = nx;
                    y = ny;
                    lf = nf;
                    if (std::abs(step[0]) < 1e-9 * sx && std::abs(step[1]) < 1e-9 * sy)
                        break;
                }
            }

            DelayDopplerPeak pk;
            pk.tau = x / num.delta_f;
            if (pk.tau < 0.0)
                pk.tau += 1.0 / num.delta_f;
            pk.fd = y / num.t_o;
            pk.value = periodogram_value(win, num, pk.tau, pk.fd);
            pk.power = std::norm(pk.value);
            out.push_back(pk);
        }
        return out;
    }

    cplx estimate_alpha(cplx peak_value, const CVec &f_zf, const AngleAzZe &angle_est, const CVec *f_tx,
                        const Upa &upa)
    {
        const CVec a = steering_vector(upa, angle_est);
        cplx den = f_zf.dot(a);
        if (f_tx)
            den *= cplx(a.transpose() * *f_tx);
        if (std::abs(den) <= 1e-12)
            throw InvalidArgument("estimate_alpha: denominator too small");
        return peak_value / den;
    }

    std::vector<AngleEstimate> estimate_angles(const ChainInputs &in, const ChainOptions &opt, CMat *r_out,
                                               RMat *spectrum)
    {
        const SensingTensor y_tilde = remove_symbol_randomness(*in.tensor, *in.symbols);
        const SweepSchedule *sched = nullptr;
        if (in.stage == Stage::search)
        {
            if (!in.beams->schedule)
                throw InvalidArgument("detect_targets: searching requires a sweep schedule");
            sched = &*in.beams->schedule;
        }
        DdTensor dd = dd_transform(y_tilde, *in.plan, sched);
        if (opt.denoise)
            denoise_top(dd, opt.keep_bins);
        const CMat r = smoothed_covariance(dd, in.upa, opt.smooth_i, opt.smooth_j);
        if (r_out)
            *r_out = r;
        const Upa sub{in.upa.m - opt.smooth_i + 1, in.upa.n - opt.smooth_j + 1, in.upa.spacing};
        const int k_a = std::clamp(opt.k_a ? *opt.k_a : count_sources(r, opt.k_a_ratio), 1, sub.size() - 1);
        const RMat spec = music_spectrum(r, k_a, sub, opt.grid);
        auto est = pick_angles(spec, k_a, opt.grid);
        if (spectrum)
            *spectrum = spec;
        if (opt.polish)
            for (auto &e : est)
                e.angle = polish_angle(r, k_a, sub, e.angle, opt.grid.step);
        return est;
    }

    DetectionReport detect_targets(const ChainInputs &in, const ChainOptions &opt, ChainTrace *trace)
    {
        DetectionReport rep;
        rep.angles = estimate_angles(in, opt, nullptr, trace ? &trace->music : nullptr);
        if (trace)
            trace->grid = opt.grid;

        std::vector<AngleAzZe> angles;
        for (const auto &a : rep.angles)
            angles.push_back(a.angle);

        const ResourcePlan &plan = *in.plan;
        const bool dedicated = plan.has_sensing_block();
        const int p0 = dedicated ? plan.p_start : 0, p_len = dedicated ? plan.p_len : plan.p_count;
        const int s0 = dedicated ? plan.q_start : 0, s_len = dedicated ? plan.q_len : plan.q_count;

        for (size_t k = 0; k < angles.size(); ++k)
        {
            CVec f_zf;
            try
            {
                f_zf = zf_extractor(angles, k, in.upa);
            }
            catch (const InvalidArgument &)
            {
                // estimates too close to null each other: fall back to the matched combiner
                const CVec a = steering_vector(in.upa, angles[k]);
                f_zf = a / a.norm();
                ++rep.zf_fallbacks;
            }
            const CMat y = extract_angle_grid(*in.tensor, f_zf);

            std::vector<std::pair<int, int>> q_ranges; // (first symbol, count)
            if (in.stage == Stage::search)
            {
                const SweepSchedule &sc = *in.beams->schedule;
                const int qb = sc.symbols_per_beam;
                if (opt.symbol_rule == SymbolRule::closest_beam)
                    q_ranges.emplace_back(s0 + closest_beam_block(sc, angles[k], in.upa) * qb, qb);
                else
                {
                    // contiguous runs of the sine-window symbol set
                    const auto qs = symbol_set_for_angle(sc, angles[k], in.upa);
                    for (size_t i = 0; i < qs.size();)
                    {
                        size_t j = i;
                        while (j + 1 < qs.size() && qs[j + 1] == qs[j] + 1)
                            ++j;
                        q_ranges.emplace_back(s0 + qs[i], (int)(j - i + 1));
                        i = j + 1;
                    }
                    // only the first run is processed; runs of different beams cannot share one periodogram
                    if (q_ranges.size() > 1)
                        q_ranges.resize(1);
                }
            }
            else
                q_ranges.emplace_back(s0, s_len);

            for (const auto &[q0, q_len] : q_ranges)
            {
                TfWindow win = dedicated
                                   ? equalize_by_symbols(y, *in.symbols, p0, p_len, q0, q_len)
                                   : equalize_by_beams(y, *in.symbols, plan, *in.beams, angles[k], in.upa, p0, p_len,
                                                       q0, q_len);
                rep.excluded_res += win.excluded;
                if (win.used_count == 0)
                    continue;
                const Periodogram per = periodogram(win, in.num, opt.oversample);
                const auto peaks = pick_delay_doppler(win, per, in.num, opt.peaks);
                if (trace)
                {
                    trace->periodograms.push_back(per);
                    trace->periodogram_angle.push_back((int)k);
                }
                const CVec *f_tx = dedicated ? &in.beams->sensing_beam(q0) : nullptr;
                for (const auto &pk : peaks)
                {
                    DetectedTarget t;
                    t.angle = angles[k];
                    t.delay = pk.tau;
                    t.doppler = pk.fd;
                    t.range = delay_to_range(pk.tau);
                    t.velocity = doppler_to_velocity(pk.fd, in.num);
                    try
                    {
                        t.alpha = estimate_alpha(pk.value, f_zf, angles[k], f_tx, in.upa);
                    }
                    catch (const InvalidArgument &)
                    {
                        t.alpha = cplx(0.0, 0.0);
                    }
                    t.angle_index = (int)k;
                    rep.targets.push_back(t);
                }
            }
        }
        return rep;
    }

    void write_music_csv(std::ostream &os, const RMat &spectrum, const AngleGrid &grid)
    {
        os << "azimuth_deg,zenith_deg,pseudo_spectrum\n";
        for (Eigen::Index i = 0; i < spectrum.rows(); ++i)
            for (Eigen::Index j = 0; j < spectrum.cols(); ++j)
                os << grid.az((int)i) << ',' << grid.ze((int)j) << ',' << spectrum(i, j) << '\n';
    }

    void write_periodogram_csv(std::ostream &os, const Periodogram &per)
    {
        os << "delay_s,doppler_hz,power\n";
        for (Eigen::Index g = 0; g < per.power.rows(); ++g)
            for (Eigen::Index w = 0; w < per.power.cols(); ++w)
                os << per.tau_at((int)g) << ',' << per.fd_at((int)w) << ',' << per.power(g, w) << '\n';
    }
}
