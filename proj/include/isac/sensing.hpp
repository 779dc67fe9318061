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

#ifndef ISAC_SENSING_HPP
#define ISAC_SENSING_HPP

#include "isac/beamform.hpp"
#include "isac/gridsim.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace isac
{
    // y / b on every resource element
    SensingTensor remove_symbol_randomness(const SensingTensor &tensor, const SymbolGrid &symbols);

    // Delay-Doppler cube, bin (e, g, w) at index (w * g_count + g) * mn + e.
    // Search layout: w = n_b * block + local Doppler index; track layout: one block spanning all w.
    struct DdTensor
    {
        int mn = 0, g_count = 0, w_count = 0;
        int block = 0;
        bool search_layout = false;
        std::vector<cplx> bins;

        size_t index(int e, int g, int w) const { return ((size_t)w * g_count + g) * mn + e; }
        const cplx *column(int g, int w) const { return bins.data() + index(0, g, w); }
        size_t bin_count() const { return (size_t)g_count * w_count; }
    };

    // P-point transform along subcarriers (exp(+j)), then Doppler transforms (exp(-j)) per beam block
    // when a schedule is given or once across the sensing symbols otherwise. The sensing region is the
    // plan's sensing block, or the whole grid when the plan has none.
    DdTensor dd_transform(const SensingTensor &y_tilde, const ResourcePlan &plan, const SweepSchedule *schedule);

    // Keep the keep_count bins with the largest column energy (ties to the lower (g, w) index)
    void denoise_top(DdTensor &dd, size_t keep_count);
    // Zero every bin whose column energy is below threshold
    void denoise_threshold(DdTensor &dd, double threshold);
    std::vector<double> bin_energies(const DdTensor &dd);

    // Spatially smoothed forward-backward covariance over I x J subarrays
    CMat smoothed_covariance(const DdTensor &dd, const Upa &upa, int i_count, int j_count);
    CMat smoothed_covariance_serial(const DdTensor &dd, const Upa &upa, int i_count, int j_count);

    struct AngleGrid
    {
        double az_min = 0.0, az_max = 180.0;
        double ze_min = 0.0, ze_max = 180.0;
        double step = 0.5;

        int az_count() const;
        int ze_count() const;
        double az(int i) const { return az_min + i * step; }
        double ze(int j) const { return ze_min + j * step; }
    };

    // MUSIC pseudo-spectrum, element (i, j) for (az(i), ze(j))
    RMat music_spectrum(const CMat &r_fb, int k_a, const Upa &upa_sub, const AngleGrid &grid);
    RMat music_spectrum_serial(const CMat &r_fb, int k_a, const Upa &upa_sub, const AngleGrid &grid);

    struct AngleEstimate
    {
        AngleAzZe angle;
        double spectrum_peak = 0.0;
    };

    // k_a largest strict 8-neighbour maxima, each refined by a parabola per axis; may return fewer
    std::vector<AngleEstimate> pick_angles(const RMat &spectrum, int k_a, const AngleGrid &grid);

    // Newton descent on a^H E_n E_n^H a from a grid estimate, moving at most max_step degrees per axis
    AngleAzZe polish_angle(const CMat &r_fb, int k_a, const Upa &upa_sub, const AngleAzZe &start, double max_step);

    // Smallest k with eigenvalue_{k+1} / eigenvalue_1 < ratio
    int count_sources(const CMat &r_fb, double ratio = 1e-2);

    // Sweep symbols q with -1/M <= sin(x_s) - sin(x_hat) < 1/M in both angles
    std::vector<int> symbol_set_for_angle(const SweepSchedule &schedule, const AngleAzZe &angle_est,
                                          const Upa &upa);

    // Beam block whose sweep beam has the largest |a_hat^T conj(a_s)|
    int closest_beam_block(const SweepSchedule &schedule, const AngleAzZe &angle_est, const Upa &upa);

    // Y[p, q] = f^H y_{:, p, q}
    CMat extract_angle_grid(const SensingTensor &tensor, const CVec &f_zf);

    // Rectangular resource window with a validity mask
    struct TfWindow
    {
        int p0 = 0, q0 = 0;
        CMat values;                   // rows p - p0, cols q - q0
        Eigen::Matrix<char, -1, -1> used;
        size_t used_count = 0;
        size_t excluded = 0;           // REs dropped by the divisor floor
    };

    // Divide by b on the window
    TfWindow equalize_by_symbols(const CMat &y_grid, const SymbolGrid &symbols, int p0, int p_len, int q0,
                                 int q_len);

    // Divide by beta = a_hat^T f_{owner(p,q), q} b on the window, dropping REs with |beta| < floor * sqrt(1/P)
    TfWindow equalize_by_beams(const CMat &y_grid, const SymbolGrid &symbols, const ResourcePlan &plan,
                               const BeamPlan &beams, const AngleAzZe &angle_est, const Upa &upa, int p0,
                               int p_len, int q0, int q_len, double floor = 1e-12);

    struct Periodogram
    {
        RMat power; // |Per|^2, rows delay bins, cols Doppler bins
        double tau_step = 0.0;
        double fd_step = 0.0;
        double tau_at(int g) const { return g * tau_step; }
        double fd_at(int w) const; // signed, wrapped
        int fd_bins = 0;
    };

    Periodogram periodogram(const TfWindow &win, const OfdmNumerology &num, int oversample);

    // Per(tau, fD) at an arbitrary point, evaluated directly
    cplx periodogram_value(const TfWindow &win, const OfdmNumerology &num, double tau, double fd);

    struct PeakOptions
    {
        double relative_threshold = 0.1; // of the maximum |Per|^2
        double noise_factor = 20.0;      // over the mean noise level estimated as median / ln 2
        int max_peaks = 3;
        bool newton = true;
    };

    struct DelayDopplerPeak
    {
        double tau = 0.0;
        double fd = 0.0;
        cplx value;
        double power = 0.0;
    };

    std::vector<DelayDopplerPeak> pick_delay_doppler(const TfWindow &win, const Periodogram &per,
                                                     const OfdmNumerology &num, const PeakOptions &opt = {});

    // Per / (f_zf^H a_hat a_hat^T f_tx) with a transmit beam, Per / (f_zf^H a_hat) without
    cplx estimate_alpha(cplx peak_value, const CVec &f_zf, const AngleAzZe &angle_est, const CVec *f_tx,
                        const Upa &upa);

    struct DetectedTarget
    {
        AngleAzZe angle;
        double delay = 0.0;
        double doppler = 0.0;
        double range = 0.0;
        double velocity = 0.0;
        cplx alpha;
        int angle_index = 0;
    };

    struct DetectionReport
    {
        std::vector<DetectedTarget> targets;
        std::vector<AngleEstimate> angles;
        size_t excluded_res = 0;
        int zf_fallbacks = 0;
    };

    enum class SymbolRule
    {
        closest_beam, // sweep block whose beam is nearest the estimate
        sine_window   // verbatim sine-gap window; may be empty
    };

    struct ChainOptions
    {
        bool denoise = true;
        size_t keep_bins = 7;
        int smooth_i = 2, smooth_j = 2;
        AngleGrid grid;
        bool polish = true;      // Newton polish of MUSIC peaks after the grid refinement
        int oversample = 4;
        PeakOptions peaks;
        SymbolRule symbol_rule = SymbolRule::closest_beam;
        std::optional<int> k_a;  // number of AoAs; estimated from eigenvalues when empty
        double k_a_ratio = 1e-2;
    };

    struct ChainInputs
    {
        const SensingTensor *tensor = nullptr;
        const SymbolGrid *symbols = nullptr;
        const ResourcePlan *plan = nullptr;
        const BeamPlan *beams = nullptr;
        Upa upa;
        OfdmNumerology num;
        Stage stage = Stage::search;
    };

    // Intermediate spectra kept for inspection
    struct ChainTrace
    {
        RMat music; // over opt.grid
        AngleGrid grid;
        std::vector<Periodogram> periodograms;
        std::vector<int> periodogram_angle; // angle index of each periodogram
    };

    DetectionReport detect_targets(const ChainInputs &in, const ChainOptions &opt, ChainTrace *trace = nullptr);

    // Angle stage only: returns the smoothed covariance and the estimated angles
    std::vector<AngleEstimate> estimate_angles(const ChainInputs &in, const ChainOptions &opt, CMat *r_fb = nullptr,
                                               RMat *spectrum = nullptr);

    // Long-format CSV dumps: one row per grid point
    void write_music_csv(std::ostream &os, const RMat &spectrum, const AngleGrid &grid);
    void write_periodogram_csv(std::ostream &os, const Periodogram &per);
}

#endif
