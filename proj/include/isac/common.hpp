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

#ifndef ISAC_COMMON_HPP
#define ISAC_COMMON_HPP

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace isac
{
    using cplx = std::complex<double>;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;
    using RVec = Eigen::VectorXd;
    using RMat = Eigen::MatrixXd;

    inline constexpr double pi = std::numbers::pi;
    inline constexpr double speed_of_light = 299792458.0; // m/s

    inline constexpr double deg2rad(double deg) { return deg * pi / 180.0; }
    inline constexpr double rad2deg(double rad) { return rad * 180.0 / pi; }

    // Decibel helpers. Powers are linear milliwatts throughout the library.
    double db_to_linear(double db);
    double linear_to_db(double lin);

    // Precondition violation on an otherwise well-formed call (bad size, out-of-range index, ...)
    class InvalidArgument : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // An iterative solver could not reach its tolerance within the iteration cap
    class SolverError : public std::runtime_error
    {
    public:
        SolverError(const std::string &what, double primal_residual, double dual_residual, double gap)
            : std::runtime_error(what), primal_residual(primal_residual), dual_residual(dual_residual), gap(gap) {}
        double primal_residual;
        double dual_residual;
        double gap;
    };

    // Malformed or inconsistent experiment / scene configuration
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Deterministic 64-bit mixer used to derive independent RNG streams from (seed, index) pairs
    constexpr std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream)
    {
        return splitmix64(master ^ splitmix64(stream + 0x5851F42D4C957F2Dull));
    }
}

#endif
