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

#include "isac/fft.hpp"

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include <fftw3.h>

namespace isac
{
    namespace fft
    {
        namespace
        {
            using Key = std::tuple<std::vector<int>, int>;

            std::mutex plan_mutex;
            std::map<Key, fftw_plan> &plan_cache()
            {
                static std::map<Key, fftw_plan> cache;
                return cache;
            }

            fftw_plan get_plan(cplx *data, const std::vector<Dim> &dims, const std::vector<Dim> &batch, int sign)
            {
                std::vector<int> k;
                for (const auto &d : dims)
                    k.insert(k.end(), {d.n, d.stride});
                k.push_back(-1);
                for (const auto &d : batch)
                    k.insert(k.end(), {d.n, d.stride});
                const Key key{k, sign};

                std::lock_guard<std::mutex> lock(plan_mutex);
                auto &cache = plan_cache();
                if (auto it = cache.find(key); it != cache.end())
                    return it->second;

                std::vector<fftw_iodim> d(dims.size()), b(batch.size());
                for (size_t i = 0; i < dims.size(); ++i)
                    d[i] = {dims[i].n, dims[i].stride, dims[i].stride};
                for (size_t i = 0; i < batch.size(); ++i)
                    b[i] = {batch[i].n, batch[i].stride, batch[i].stride};
                auto *p = reinterpret_cast<fftw_complex *>(data);
                fftw_plan plan = fftw_plan_guru_dft((int)d.size(), d.data(), (int)b.size(), b.data(), p, p, sign,
                                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
                if (!plan)
                    throw std::runtime_error("FFTW could not create a plan");
                cache.emplace(key, plan);
                return plan;
            }
        }

        void execute(cplx *data, const std::vector<Dim> &dims, const std::vector<Dim> &batch, int sign)
        {
            for (const auto &d : dims)
                if (d.n < 1)
                    throw InvalidArgument("fft: transform length must be >= 1");
            fftw_plan plan = get_plan(data, dims, batch, sign);
            auto *p = reinterpret_cast<fftw_complex *>(data);
            fftw_execute_dft(plan, p, p);
        }

        void transform_columns(CMat &x, int sign)
        {
            execute(x.data(), {{(int)x.rows(), 1}}, {{(int)x.cols(), (int)x.rows()}}, sign);
        }

        void transform_rows(CMat &x, int sign)
        {
            execute(x.data(), {{(int)x.cols(), (int)x.rows()}}, {{(int)x.rows(), 1}}, sign);
        }
    }
}
