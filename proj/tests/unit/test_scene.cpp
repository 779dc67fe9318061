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

#include <doctest.h>

using namespace isac;

namespace
{
    OfdmNumerology table_one() { return OfdmNumerology::make(1024, 1024, 120e3, 2.0833e-6, 28e9, -169.0); }
}

TEST_CASE("numerology derived quantities")
{
    const OfdmNumerology num = table_one();
    // frozen from an independent high-precision evaluation
    CHECK(num.t_o == doctest::Approx(1.041663333e-5).epsilon(1e-12));
    CHECK(num.sigma2_re() == doctest::Approx(1.510710494153e-12).epsilon(1e-12));
    CHECK(num.sigma2_full() == doctest::Approx(1.546967546012673e-9).epsilon(1e-12));
}

TEST_CASE("LoS channel at the grid origin is alpha times the steering vector")
{
    const Upa upa{4, 4, 0.5};
    const OfdmNumerology num = table_one();
    const PathSpec path{{0.3, -0.4}, {70.0, 100.0}, 2e-7, 1500.0};
    const CVec h = ue_channel_at({path}, upa, num, 0, 0);
    const CVec a = steering_vector(upa, path.angle);
    CHECK((h.conjugate() - path.alpha * a).norm() < 1e-12);

    for (int p : {1, 17, 900})
        for (int q : {0, 5, 1023})
            CHECK(ue_channel_at({path}, upa, num, p, q).norm() == doctest::Approx(0.5 * 4.0).epsilon(1e-12));
}

TEST_CASE("two paths half a subcarrier period apart oppose on p = 1")
{
    const Upa upa{2, 2, 0.5};
    const OfdmNumerology num = table_one();
    const PathSpec p1{1.0, {60.0, 90.0}, 0.0, 0.0};
    const PathSpec p2{1.0, {120.0, 80.0}, 1.0 / (2.0 * num.delta_f), 0.0};
    const CVec h = ue_channel_at({p1, p2}, upa, num, 1, 0);
    const CVec want = steering_vector(upa, p1.angle) - steering_vector(upa, p2.angle);
    CHECK((h.conjugate() - want).norm() < 1e-12);
}

TEST_CASE("covariance of a single LoS path is rank one")
{
    const Upa upa{8, 8, 0.5};
    const OfdmNumerology num = table_one();
    const PathSpec path{2.4e-5, {106.0, 41.0}, 0.0, 0.0};
    const ChannelStats st = channel_covariance({path}, upa, num, {{0, 0}, {3, 4}, {100, 7}});
    CHECK(st.lambda() == doctest::Approx(1.92e-4).epsilon(1e-10));
    const CVec a = steering_vector(upa, path.angle);
    CHECK(std::abs(std::abs(st.h_u.dot(a.conjugate() / 8.0)) - 1.0) < 1e-10);
    CHECK((st.r - std::norm(path.alpha) * a.conjugate() * a.transpose()).norm() < 1e-20);
}

TEST_CASE("radar equation magnitude")
{
    const OfdmNumerology num = table_one();
    CHECK(alpha_magnitude_from_rcs(20.0, 53.7, num) == doctest::Approx(8.334879090779563e-7).epsilon(1e-12));
    const double base = alpha_magnitude_from_rcs(10.0, 40.0, num);
    CHECK(alpha_magnitude_from_rcs(10.0 + 10.0 * std::log10(2.0), 40.0, num) ==
          doctest::Approx(base * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(alpha_magnitude_from_rcs(10.0, 80.0, num) == doctest::Approx(base / 4.0).epsilon(1e-12));
    CHECK_THROWS_AS(alpha_magnitude_from_rcs(10.0, 0.0, num), InvalidArgument);
}

TEST_CASE("delay and Doppler conversions")
{
    const OfdmNumerology num = table_one();
    CHECK(range_to_delay(53.7) == doctest::Approx(3.582478382428153e-7).epsilon(1e-12));
    CHECK(delay_to_range(range_to_delay(77.0)) == doctest::Approx(77.0).epsilon(1e-14));
    CHECK(doppler_to_velocity(velocity_to_doppler(-8.0, num), num) == doctest::Approx(-8.0).epsilon(1e-14));
}

TEST_CASE("target phase")
{
    const OfdmNumerology num = table_one();
    TargetSpec t;
    t.range = 53.7;
    CHECK(std::abs(target_phase(t, num, 0, 0) - 1.0) < 1e-15);
    // one full Doppler cycle over the frame
    t.range = delay_to_range(0.0);
    t.velocity = doppler_to_velocity(1.0 / (num.q_count * num.t_o), num);
    CHECK(std::abs(target_phase(t, num, 0, num.q_count) - 1.0) < 1e-9);
}
