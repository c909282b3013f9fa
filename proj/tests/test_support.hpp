// SPDX-License-Identifier: Apache-2.0
//
// doatd - joint DOA and time-delay estimation for frequency-domain array data
// Copyright (C) 2026 The doatd authors
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

// Shared fixtures for the unit and acceptance suites.

#ifndef DOATD_TESTS_TEST_SUPPORT_HPP
#define DOATD_TESTS_TEST_SUPPORT_HPP

#include "doatd/signal_model.hpp"

#include <algorithm>
#include <random>
#include <vector>

namespace doatd::testing
{
    // 802.11n-style 40 MHz layout: 128 bins, 114 active around a DC gap.
    inline SubcarrierGrid wifi_grid()
    {
        std::vector<std::size_t> bins;
        for (std::size_t i = 6; i <= 62; ++i)
            bins.push_back(i);
        for (std::size_t i = 65; i <= 121; ++i)
            bins.push_back(i);
        return {5.32e9, 312.5e3, 128, bins};
    }

    inline ArrayGeometry uca16() { return ArrayGeometry::uniform_circular(16, 1.5); }

    // theta 30/40 deg, tau 50/100 ns, beta 1 and 0.9 e^{j phi}
    inline PathSet two_path_scenario(double phi = 0.7, double tau2 = 100e-9, double theta2_deg = 40.0)
    {
        return PathSet({{deg_to_rad(30.0), 50e-9, {1.0, 0.0}}, {deg_to_rad(theta2_deg), tau2, std::polar(0.9, phi)}});
    }

    inline double relative_error(double a, double b)
    {
        return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
    }

    inline double relative_error(const MatrixXd &a, const MatrixXd &b)
    {
        return (a - b).norm() / std::max(a.norm(), b.norm());
    }

    inline double relative_error(const MatrixXcd &a, const MatrixXcd &b)
    {
        return (a - b).norm() / std::max(a.norm(), b.norm());
    }

    // Random valid grid: K_total in [K, 2K], K active bins drawn without replacement.
    inline SubcarrierGrid random_grid(std::mt19937_64 &rng, std::size_t K, double spacing = 312.5e3)
    {
        std::uniform_int_distribution<std::size_t> extra(0, K);
        const std::size_t total = K + extra(rng);
        std::vector<std::size_t> all(total);
        for (std::size_t i = 0; i < total; ++i)
            all[i] = i;
        std::shuffle(all.begin(), all.end(), rng);
        all.resize(K);
        std::sort(all.begin(), all.end());
        return {5.32e9, spacing, total, all};
    }

    inline ArrayGeometry random_uca(std::mt19937_64 &rng)
    {
        const std::size_t sizes[] = {4, 8, 16};
        std::uniform_int_distribution<int> pick(0, 2);
        std::uniform_real_distribution<double> radius(0.4, 2.0);
        return ArrayGeometry::uniform_circular(sizes[pick(rng)], radius(rng));
    }

    inline cd random_beta(std::mt19937_64 &rng)
    {
        std::uniform_real_distribution<double> mag(0.3, 1.5), ph(0.0, two_pi);
        return std::polar(mag(rng), ph(rng));
    }

    // L paths with azimuths at least min_sep apart (circularly).
    inline std::vector<double> random_angles(std::mt19937_64 &rng, std::size_t L, double min_sep)
    {
        std::uniform_real_distribution<double> u(0.0, two_pi);
        for (;;)
        {
            std::vector<double> th(L);
            for (auto &t : th)
                t = u(rng);
            bool ok = true;
            for (std::size_t i = 0; i < L && ok; ++i)
                for (std::size_t j = i + 1; j < L && ok; ++j)
                    ok = std::abs(angle_difference(th[i], th[j])) >= min_sep;
            if (ok)
                return th;
        }
    }
}

#endif
