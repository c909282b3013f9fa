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
#include "doatd/signal_model.hpp"
#include "test_support.hpp"

using namespace doatd;
using namespace doatd::testing;
using Catch::Approx;

TEST_CASE("steering vector on a uniform circular array", "[signal_model]")
{
    const ArrayGeometry geom = uca16();
    const VectorXcd a = steering_vector(geom, 0.0);
    // first sensor at (1.5, 0): exp(j*3*pi) = -1
    CHECK(std::abs(a(0) - cd(-1.0, 0.0)) < 1e-12);

    const ArrayGeometry origin({{0.0, 0.0}});
    for (double th : {0.0, 1.0, 4.0})
    {
        const VectorXcd one = steering_vector(origin, th);
        REQUIRE(one.size() == 1);
        CHECK(one(0) == cd(1.0, 0.0));
        CHECK(steering_derivative(origin, th)(0) == cd(0.0, 0.0));
    }
}

TEST_CASE("steering and delay vectors have unit modulus", "[signal_model][property]")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coord(-3.0, 3.0), angle(-10.0, 10.0), delay(0.0, 3e-6);
    for (int trial = 0; trial < 100; ++trial)
    {
        std::vector<Point2> pos(1 + trial % 9);
        for (auto &p : pos)
            p = {coord(rng), coord(rng)};
        const VectorXcd a = steering_vector(ArrayGeometry(pos), angle(rng));
        CHECK((a.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
        const SubcarrierGrid grid = random_grid(rng, 4 + trial % 20);
        const VectorXcd t = delay_vector(grid, delay(rng));
        CHECK((t.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("steering derivative matches central finite differences", "[signal_model][property]")
{
    const double h = 1e-6;
    auto fd = [h](const ArrayGeometry &g, double th) {
        return ((steering_vector(g, th + h) - steering_vector(g, th - h)) / (2.0 * h)).eval();
    };

    const ArrayGeometry geom = uca16();
    CHECK((steering_derivative(geom, 0.5) - fd(geom, 0.5)).cwiseAbs().maxCoeff() < 1e-6);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coord(-2.0, 2.0), angle(0.0, two_pi);
    for (int trial = 0; trial < 100; ++trial)
    {
        std::vector<Point2> pos(2 + trial % 15);
        for (auto &p : pos)
            p = {coord(rng), coord(rng)};
        const ArrayGeometry g(pos);
        const double th = angle(rng);
        INFO("trial " << trial);
        CHECK((steering_derivative(g, th) - fd(g, th)).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("steering derivative is 2*pi periodic", "[signal_model]")
{
    const ArrayGeometry geom = uca16();
    for (double th : {0.0, 0.3, 2.0, 5.5})
        CHECK((steering_derivative(geom, th) - steering_derivative(geom, th + two_pi)).norm() < 1e-11);
}

TEST_CASE("subcarrier grid uses centred baseband frequencies", "[signal_model]")
{
    const SubcarrierGrid grid(5e9, 1000.0, 4, {0, 1, 2, 3});
    const VectorXd &w = grid.omegas();
    CHECK(w(0) == Approx(two_pi * 1000.0 * -1.5));
    CHECK(w(3) == Approx(two_pi * 1000.0 * 1.5));
    CHECK(grid.tau_max() == Approx(1e-3));

    CHECK_THROWS_AS(SubcarrierGrid(5e9, 0.0, 4, {0}), config_error);
    CHECK_THROWS_AS(SubcarrierGrid(5e9, 1.0, 4, {}), config_error);
    CHECK_THROWS_AS(SubcarrierGrid(5e9, 1.0, 4, {2, 1}), config_error);
    CHECK_THROWS_AS(SubcarrierGrid(5e9, 1.0, 4, {4}), config_error);
}

TEST_CASE("delay vector basics", "[signal_model]")
{
    const SubcarrierGrid grid = wifi_grid();
    CHECK((delay_vector(grid, 0.0) - VectorXcd::Ones(114)).norm() == 0.0);

    // bins i and 127 - i sit at opposite centred frequencies
    const VectorXcd t = delay_vector(grid, 37e-9);
    const auto bins = grid.active_bins();
    for (std::size_t k = 0; k < bins.size(); ++k)
    {
        const std::size_t mirror = 127 - bins[k];
        const auto it = std::find(bins.begin(), bins.end(), mirror);
        REQUIRE(it != bins.end());
        const auto k2 = static_cast<Eigen::Index>(it - bins.begin());
        CHECK(std::abs(t(static_cast<Eigen::Index>(k)) - std::conj(t(k2))) < 1e-12);
    }
}

TEST_CASE("synthesis of the frequency-domain model", "[signal_model]")
{
    const ArrayGeometry geom = uca16();
    const SubcarrierGrid grid = wifi_grid();
    const SignalSpectrum S = SignalSpectrum::ones(grid.size());

    SECTION("single undelayed unit path gives the steering vector in every column")
    {
        const double th = deg_to_rad(75.0);
        const CsiMatrix csi = synthesize_csi(geom, grid, S, PathSet({{th, 0.0, {1.0, 0.0}}}));
        const VectorXcd a = steering_vector(geom, th);
        for (Eigen::Index k = 0; k < csi.data.cols(); ++k)
            CHECK((csi.data.col(k) - a).norm() < 1e-13);
    }

    SECTION("zero attenuations give a zero matrix")
    {
        const CsiMatrix csi = synthesize_csi(geom, grid, S, PathSet({{0.2, 1e-8, {}}, {1.2, 3e-8, {}}}));
        CHECK(csi.data.norm() == 0.0);
    }

    SECTION("two paths with the same azimuth")
    {
        const double th = 1.1;
        const cd b1{0.4, -0.3}, b2{-1.2, 0.5};
        const double t1 = 20e-9, t2 = 65e-9;
        const CsiMatrix csi = synthesize_csi(geom, grid, S, PathSet({{th, t1, b1}, {th, t2, b2}}));
        const VectorXcd a = steering_vector(geom, th);
        const VectorXd &w = grid.omegas();
        for (Eigen::Index k = 0; k < w.size(); ++k)
        {
            const cd g = b1 * std::polar(1.0, -w(k) * t1) + b2 * std::polar(1.0, -w(k) * t2);
            CHECK((csi.data.col(k) - a * g).norm() < 1e-12);
        }
    }

    SECTION("synthesis is linear in the path set")
    {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> ang(0.0, two_pi), del(0.0, 2e-6);
        for (int trial = 0; trial < 20; ++trial)
        {
            std::vector<Path> p1, p2;
            for (int l = 0; l < 2; ++l)
                p1.push_back({ang(rng), del(rng), random_beta(rng)});
            for (int l = 0; l < 3; ++l)
                p2.push_back({ang(rng), del(rng), random_beta(rng)});
            std::vector<Path> both = p1;
            both.insert(both.end(), p2.begin(), p2.end());
            const MatrixXcd lhs = synthesize_csi(geom, grid, S, PathSet(both)).data;
            const MatrixXcd rhs = synthesize_csi(geom, grid, S, PathSet(p1)).data +
                                  synthesize_csi(geom, grid, S, PathSet(p2)).data;
            CHECK(relative_error(lhs, rhs) < 1e-13);
        }
    }

    SECTION("spectrum length must match the grid")
    {
        CHECK_THROWS_AS(synthesize_csi(geom, grid, SignalSpectrum::ones(3), two_path_scenario()), config_error);
    }
}

TEST_CASE("additive noise", "[signal_model]")
{
    const ArrayGeometry geom = uca16();
    const SubcarrierGrid grid = wifi_grid();
    const CsiMatrix clean = synthesize_csi(geom, grid, SignalSpectrum::ones(grid.size()), two_path_scenario());

    CHECK(add_noise(clean, NoiseSpec::from_sigma2(0.0), 9).data == clean.data);
    CHECK(add_noise(clean, NoiseSpec::from_sigma2(0.3), 42).data == add_noise(clean, NoiseSpec::from_sigma2(0.3), 42).data);
    CHECK(add_noise(clean, NoiseSpec::from_sigma2(0.3), 42).data != add_noise(clean, NoiseSpec::from_sigma2(0.3), 43).data);

    const CsiMatrix zero(MatrixXcd::Zero(16, 114), geom, grid);
    const MatrixXcd w = add_noise(zero, NoiseSpec::from_sigma2(1.0), 2026).data;
    const double mean_sq = w.squaredNorm() / static_cast<double>(w.size());
    CHECK(std::abs(mean_sq - 1.0) < 0.05);
    // real and imaginary parts each carry half the variance
    const double re_sq = w.real().squaredNorm() / static_cast<double>(w.size());
    CHECK(std::abs(re_sq - 0.5) < 0.05);
}

TEST_CASE("SNR and noise variance convert exactly", "[signal_model]")
{
    const CsiMatrix clean =
        synthesize_csi(uca16(), wifi_grid(), SignalSpectrum::ones(114), two_path_scenario());
    const double sigma2 = NoiseSpec::from_snr_db(15.0).sigma2_for(clean);
    CHECK(sigma2 == Approx(mean_power(clean) / std::pow(10.0, 1.5)).epsilon(1e-14));
    CHECK(NoiseSpec::snr_db_for(clean, sigma2) == Approx(15.0).epsilon(1e-12));
    CHECK(NoiseSpec::from_sigma2(0.25).sigma2_for(clean) == 0.25);
    CHECK_THROWS_AS(NoiseSpec::from_sigma2(-1.0), config_error);
}

TEST_CASE("type invariants are enforced", "[signal_model]")
{
    CHECK_THROWS_AS(ArrayGeometry({}), config_error);
    CHECK_THROWS_AS(ArrayGeometry({{std::nan(""), 0.0}}), config_error);
    CHECK_THROWS_AS(PathSet(std::vector<Path>{}), config_error);
    CHECK_THROWS_AS(PathSet({{two_pi, 0.0, {1.0, 0.0}}}), config_error);
    CHECK_THROWS_AS(PathSet({{0.0, -1e-9, {1.0, 0.0}}}), config_error);
    CHECK_THROWS_AS(SignalSpectrum(VectorXcd::Zero(4)), config_error);
    CHECK_THROWS_AS(CsiMatrix(MatrixXcd::Zero(3, 114), uca16(), wifi_grid()), config_error);
    CHECK(wrap_angle(-0.5) == Approx(two_pi - 0.5));
    CHECK(wrap_angle(two_pi) == 0.0);
}
