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

#ifndef ISAC_FFT_HPP
#define ISAC_FFT_HPP

#include "isac/common.hpp"

#include <vector>

namespace isac
{
    namespace fft
    {
        // FFTW sign convention: forward uses exp(-j...), backward exp(+j...), both unnormalised
        inline constexpr int forward = -1;
        inline constexpr int backward = +1;

        struct Dim
        {
            int n;
            int stride;
        };

        // In-place multi-dimensional batched transform over strided data. Plans are cached per shape
        // and reused from any thread.
        void execute(cplx *data, const std::vector<Dim> &dims, const std::vector<Dim> &batch, int sign);

        // Transform every column (length rows) or every row (length cols) of a matrix
        void transform_columns(CMat &x, int sign);
        void transform_rows(CMat &x, int sign);
    }
}

#endif
