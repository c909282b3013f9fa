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

#include "catch_amalgamated.hpp"
#include "doatd/doa_only.hpp"
#include "doatd/monte_carlo.hpp"
#include "test_support.hpp"

using namespace doatd;
using namespace doatd::testing;

TEST_CASE("DOA-only objective", "[doa_only]")
{
    const ArrayGeometry geom = uca16();
    const SubcarrierGrid grid = wifi_grid();
    const PathSet paths = two_path_scenario();
    const CsiMatrix csi = synthesize_csi(geom, grid, SignalSpectrum::ones(114), paths);
    const double energy = csi.data.squaredNorm();

    SECTION("vanishes at the true angles of noiseless data")
    {
        CHECK(doa_only_objective(csi, paths.thetas()) <= 1e-12 * energy);
    }
    SECTION("is zero when L equals M")
    {
        const ArrayGeometry small = ArrayGeometry::uniform_circular(4, 0.7);
        std::mt19937_64 rng(3);
        std::normal_distribution<double> n01;
        MatrixXcd X(4, 114);
        for (Eigen::Index i = 0; i < X.size(); ++i)
            X(i) = {n01(rng), n01(rng)};
        const std::vector<double> th{0.1, 1.4, 2.9, 4.4};
        CHECK(doa_only_objective(CsiMatrix(X, small, grid), th) <= 1e-10 * X.squaredNorm());
    }
    SECTION("does not depend on the ordering of the angles")
    {
        const std::vector<double> a{0.3, 2.0}, b{2.0, 0.3};
        CHECK(doa_only_objective(csi, a) == Catch::Approx(doa_only_objective(csi, b)).epsilon(1e-12));
    }
    SECTION("single angle reduces to the beamformer residual")
    {
        for (double th : {0.0, 0.52, 1.9, 4.0})
        {
            const VectorXcd a = steering_vector(geom, th);
            const double beam = (a.adjoint() * csi.data).squaredNorm() / a.squaredNorm();
            const std::vector<double> one{th};
            CHECK(doa_only_objective(csi, one) == Catch::Approx(energy - beam).epsilon(1e-11));
        }
    }
    SECTION("rejects too many angles")
    {
        const std::vector<double> th(17, 0.1);
        CHECK_THROWS_AS(doa_only_objective(csi, th), degenerate_error);
    }
}

TEST_CASE("DOA-only estimator", "[doa_only]")
{
    const ArrayGeometry geom = uca16();
    const SubcarrierGrid grid = wifi_grid();

    SECTION("recovers the two-path scenario from noiseless data")
    {
        const PathSet paths = two_path_scenario();
        const CsiMatrix csi = synthesize_csi(geom, grid, SignalSpectrum::ones(114), paths);
        DoaOnlyConfig cfg;
        cfg.n_paths = 2;
        const DoaOnlyResult r = doa_only_estimate(csi, cfg);
        std::vector<double> th = r.theta_hat;
        std::sort(th.begin(), th.end());
        CHECK(std::abs(rad_to_deg(th[0]) - 30.0) < 0.1);
        CHECK(std::abs(rad_to_deg(th[1]) - 40.0) < 0.1);
    }
    SECTION("objective history never increases")
    {
        std::mt19937_64 rng(12);
        for (int trial = 0; trial < 10; ++trial)
        {
            const auto th = random_angles(rng, 3, deg_to_rad(10.0));
            std::uniform_real_distribution<double> delay(0.0, 1e-6);
            PathSet paths({{th[0], delay(rng), random_beta(rng)},
                           {th[1], delay(rng), random_beta(rng)},
                           {th[2], delay(rng), random_beta(rng)}});
            const CsiMatrix csi = add_noise(synthesize_csi(geom, grid, SignalSpectrum::ones(114), paths),
                                            NoiseSpec::from_snr_db(5.0), 50 + trial);
            DoaOnlyConfig cfg;
            cfg.n_paths = 3;
            const DoaOnlyResult r = doa_only_estimate(csi, cfg);
            for (std::size_t i = 1; i < r.objective_history.size(); ++i)
                CHECK(r.objective_history[i] <= r.objective_history[i - 1]);
            CHECK(r.objective == Catch::Approx(doa_only_objective(csi, r.theta_hat)).epsilon(1e-12));
        }
    }
    SECTION("single path matches a dense correlation oracle on 20 instances")
    {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> ang(0.0, two_pi), delay(0.0, 2e-6);
        for (int trial = 0; trial < 20; ++trial)
        {
            const ArrayGeometry g = random_uca(rng);
            const SubcarrierGrid gr = random_grid(rng, 24);
            const PathSet p({{ang(rng), delay(rng), random_beta(rng)}});
            const CsiMatrix csi =
                add_noise(synthesize_csi(g, gr, SignalSpectrum::ones(24), p), NoiseSpec::from_snr_db(10.0), trial);
            DoaOnlyConfig cfg;
            const DoaOnlyResult r = doa_only_estimate(csi, cfg);

            double best = -1.0, oracle = 0.0;
            for (int i = 0; i < 36000; ++i)
            {
                const double th = deg_to_rad(0.01 * i);
                const double v = (steering_vector(g, th).adjoint() * csi.data).squaredNorm();
                if (v > best)
                {
                    best = v;
                    oracle = th;
                }
            }
            INFO("trial " << trial);
            CHECK(std::abs(rad_to_deg(angle_difference(r.theta_hat[0], oracle))) < 0.01);
        }
    }
    SECTION("configuration is validated")
    {
        const CsiMatrix csi = synthesize_csi(geom, grid, SignalSpectrum::ones(114), two_path_scenario());
        DoaOnlyConfig cfg;
        cfg.n_paths = 0;
        CHECK_THROWS_AS(doa_only_estimate(csi, cfg), config_error);
        cfg.n_paths = 17;
        CHECK_THROWS_AS(doa_only_estimate(csi, cfg), config_error);
    }
}
