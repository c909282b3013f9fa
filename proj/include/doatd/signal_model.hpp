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

#ifndef DOATD_SIGNAL_MODEL_HPP
#define DOATD_SIGNAL_MODEL_HPP

#include "doatd/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace doatd
{
    using cd = std::complex<double>;
    using Eigen::MatrixXcd;
    using Eigen::MatrixXd;
    using Eigen::VectorXcd;
    using Eigen::VectorXd;

    inline constexpr double two_pi = 2.0 * std::numbers::pi;
    inline constexpr cd j_unit{0.0, 1.0};

    inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
    inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

    // Maps any finite angle onto [0, 2*pi).
    inline double wrap_angle(double theta)
    {
        double w = std::fmod(theta, two_pi);
        if (w < 0.0)
            w += two_pi;
        if (w >= two_pi) // fmod of tiny negatives can round up to 2*pi
            w = 0.0;
        return w;
    }

    // Signed angular difference a - b folded onto (-pi, pi].
    inline double angle_difference(double a, double b)
    {
        double d = std::remainder(a - b, two_pi);
        if (d <= -std::numbers::pi)
            d += two_pi;
        return d;
    }

    struct Point2
    {
        double x = 0.0; // in carrier wavelengths
        double y = 0.0;
    };

    // Planar sensor layout. Positions are expressed in carrier wavelengths.
    class ArrayGeometry
    {
    public:
        explicit ArrayGeometry(std::vector<Point2> positions) : positions_(std::move(positions))
        {
            if (positions_.empty())
                throw config_error("array geometry needs at least one sensor");
            for (const auto &p : positions_)
                if (!std::isfinite(p.x) || !std::isfinite(p.y))
                    throw config_error("array geometry has a non-finite sensor coordinate");
        }

        // Sensor m (0-based) sits at angle 2*pi*m/M on a circle of the given radius.
        static ArrayGeometry uniform_circular(std::size_t sensors, double radius)
        {
            if (sensors == 0)
                throw config_error("uniform circular array needs at least one sensor");
            if (!(radius >= 0.0) || !std::isfinite(radius))
                throw config_error("uniform circular array radius must be finite and non-negative");
            std::vector<Point2> pos(sensors);
            for (std::size_t m = 0; m < sensors; ++m)
            {
                const double gamma = two_pi * static_cast<double>(m) / static_cast<double>(sensors);
                pos[m] = {radius * std::cos(gamma), radius * std::sin(gamma)};
            }
            return ArrayGeometry(std::move(pos));
        }

        // Sensors along the x axis, centred on the origin.
        static ArrayGeometry uniform_linear(std::size_t sensors, double spacing)
        {
            if (sensors == 0)
                throw config_error("uniform linear array needs at least one sensor");
            if (!(spacing > 0.0) || !std::isfinite(spacing))
                throw config_error("uniform linear array spacing must be positive");
            std::vector<Point2> pos(sensors);
            const double centre = 0.5 * static_cast<double>(sensors - 1);
            for (std::size_t m = 0; m < sensors; ++m)
                pos[m] = {spacing * (static_cast<double>(m) - centre), 0.0};
            return ArrayGeometry(std::move(pos));
        }

        std::size_t size() const { return positions_.size(); }
        std::span<const Point2> positions() const { return positions_; }

    private:
        std::vector<Point2> positions_;
    };

    // Subcarrier layout of one OFDM symbol. Active bin i has baseband angular
    // frequency 2*pi*spacing*(i - (total_bins - 1)/2).
    class SubcarrierGrid
    {
    public:
        SubcarrierGrid(double carrier_hz, double spacing_hz, std::size_t total_bins, std::vector<std::size_t> active_bins)
            : carrier_hz_(carrier_hz), spacing_hz_(spacing_hz), total_bins_(total_bins), active_(std::move(active_bins))
        {
            if (!std::isfinite(carrier_hz_))
                throw config_error("carrier frequency must be finite");
            if (!(spacing_hz_ > 0.0) || !std::isfinite(spacing_hz_))
                throw config_error("subcarrier spacing must be positive");
            if (active_.empty() || active_.size() > total_bins_)
                throw config_error("active bin count must be in [1, total_bins]");
            for (std::size_t k = 0; k < active_.size(); ++k)
            {
                if (active_[k] >= total_bins_)
                    throw config_error("active bin index " + std::to_string(active_[k]) + " out of range");
                if (k > 0 && active_[k] <= active_[k - 1])
                    throw config_error("active bin indices must be strictly increasing");
            }
            const double centre = 0.5 * (static_cast<double>(total_bins_) - 1.0);
            omega_.resize(static_cast<Eigen::Index>(active_.size()));
            for (std::size_t k = 0; k < active_.size(); ++k)
                omega_(static_cast<Eigen::Index>(k)) = two_pi * spacing_hz_ * (static_cast<double>(active_[k]) - centre);
        }

        // All bins 0..total-1 active.
        static SubcarrierGrid contiguous(double carrier_hz, double spacing_hz, std::size_t total_bins)
        {
            std::vector<std::size_t> bins(total_bins);
            for (std::size_t i = 0; i < total_bins; ++i)
                bins[i] = i;
            return {carrier_hz, spacing_hz, total_bins, std::move(bins)};
        }

        double carrier_hz() const { return carrier_hz_; }
        double spacing_hz() const { return spacing_hz_; }
        std::size_t total_bins() const { return total_bins_; }
        std::span<const std::size_t> active_bins() const { return active_; }
        std::size_t size() const { return active_.size(); }

        // Angular baseband frequencies of the active bins, rad/s.
        const VectorXd &omegas() const { return omega_; }

        // Delays are only identifiable modulo 1/spacing.
        double tau_max() const { return 1.0 / spacing_hz_; }

        bool operator==(const SubcarrierGrid &o) const
        {
            return carrier_hz_ == o.carrier_hz_ && spacing_hz_ == o.spacing_hz_ && total_bins_ == o.total_bins_ &&
                   active_ == o.active_;
        }

    private:
        double carrier_hz_;
        double spacing_hz_;
        std::size_t total_bins_;
        std::vector<std::size_t> active_;
        VectorXd omega_;
    };

    // Known transmitted spectrum S(w_k) on the active bins.
    class SignalSpectrum
    {
    public:
        explicit SignalSpectrum(VectorXcd values) : values_(std::move(values))
        {
            if (values_.size() == 0 || values_.cwiseAbs().maxCoeff() == 0.0)
                throw config_error("signal spectrum must have at least one nonzero entry");
            if (!values_.allFinite())
                throw config_error("signal spectrum has non-finite entries");
        }

        static SignalSpectrum ones(std::size_t bins)
        {
            return SignalSpectrum(VectorXcd::Ones(static_cast<Eigen::Index>(bins)));
        }

        std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
        const VectorXcd &values() const { return values_; }
        cd operator[](std::size_t k) const { return values_(static_cast<Eigen::Index>(k)); }

        // sum_k |S(w_k)|^2
        double energy() const { return values_.squaredNorm(); }

    private:
        VectorXcd values_;
    };

    struct Path
    {
        double theta = 0.0; // azimuth, rad
        double tau = 0.0;   // delay, s
        cd beta{1.0, 0.0};  // complex attenuation
    };

    class PathSet
    {
    public:
        PathSet() = default;
        explicit PathSet(std::vector<Path> paths) : paths_(std::move(paths))
        {
            if (paths_.empty())
                throw config_error("path set needs at least one path");
            for (std::size_t l = 0; l < paths_.size(); ++l)
            {
                const auto &p = paths_[l];
                if (!(p.theta >= 0.0 && p.theta < two_pi))
                    throw config_error("path " + std::to_string(l) + ": azimuth must lie in [0, 2*pi)");
                if (!(p.tau >= 0.0) || !std::isfinite(p.tau))
                    throw config_error("path " + std::to_string(l) + ": delay must be finite and non-negative");
                if (!std::isfinite(p.beta.real()) || !std::isfinite(p.beta.imag()))
                    throw config_error("path " + std::to_string(l) + ": attenuation must be finite");
            }
        }

        std::size_t size() const { return paths_.size(); }
        const Path &operator[](std::size_t l) const { return paths_[l]; }
        auto begin() const { return paths_.begin(); }
        auto end() const { return paths_.end(); }
        const std::vector<Path> &paths() const { return paths_; }

        std::vector<double> thetas() const
        {
            std::vector<double> v;
            for (const auto &p : paths_)
                v.push_back(p.theta);
            return v;
        }
        std::vector<double> taus() const
        {
            std::vector<double> v;
            for (const auto &p : paths_)
                v.push_back(p.tau);
            return v;
        }
        VectorXcd betas() const
        {
            VectorXcd b(static_cast<Eigen::Index>(paths_.size()));
            for (std::size_t l = 0; l < paths_.size(); ++l)
                b(static_cast<Eigen::Index>(l)) = paths_[l].beta;
            return b;
        }

    private:
        std::vector<Path> paths_;
    };

    // Frequency-domain array snapshot: column k is x(k) on active bin k.
    struct CsiMatrix
    {
        CsiMatrix(MatrixXcd values, ArrayGeometry geom, SubcarrierGrid sub)
            : data(std::move(values)), geometry(std::move(geom)), grid(std::move(sub))
        {
            if (static_cast<std::size_t>(data.rows()) != geometry.size() ||
                static_cast<std::size_t>(data.cols()) != grid.size())
                throw config_error("CSI matrix is " + std::to_string(data.rows()) + "x" + std::to_string(data.cols()) +
                                   " but geometry/grid require " + std::to_string(geometry.size()) + "x" +
                                   std::to_string(grid.size()));
        }

        std::size_t sensors() const { return geometry.size(); }
        std::size_t bins() const { return grid.size(); }

        MatrixXcd data;
        ArrayGeometry geometry;
        SubcarrierGrid grid;
    };

    // Mean per-element power, mean over m,k of |x_m(k)|^2.
    inline double mean_power(const CsiMatrix &csi)
    {
        return csi.data.squaredNorm() / static_cast<double>(csi.data.size());
    }

    // Noise level given either as a variance or as an SNR relative to the
    // mean per-element power of a noiseless reference.
    class NoiseSpec
    {
    public:
        static NoiseSpec from_sigma2(double sigma2)
        {
            if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
                throw config_error("noise variance must be finite and non-negative");
            return NoiseSpec(false, sigma2);
        }
        static NoiseSpec from_snr_db(double snr_db)
        {
            if (!std::isfinite(snr_db))
                throw config_error("SNR must be finite");
            return NoiseSpec(true, snr_db);
        }

        bool is_snr() const { return is_snr_; }
        double value() const { return value_; }

        double sigma2_for(const CsiMatrix &noiseless) const
        {
            if (!is_snr_)
                return value_;
            return mean_power(noiseless) / std::pow(10.0, value_ / 10.0);
        }

        static double snr_db_for(const CsiMatrix &noiseless, double sigma2)
        {
            return 10.0 * std::log10(mean_power(noiseless) / sigma2);
        }

    private:
        NoiseSpec(bool snr, double v) : is_snr_(snr), value_(v) {}
        bool is_snr_;
        double value_;
    };

    // a_m(theta) = exp(j*2*pi*(x_m cos(theta) + y_m sin(theta)))
    inline VectorXcd steering_vector(const ArrayGeometry &geom, double theta)
    {
        const auto pos = geom.positions();
        VectorXcd a(static_cast<Eigen::Index>(pos.size()));
        const double c = std::cos(theta), s = std::sin(theta);
        for (std::size_t m = 0; m < pos.size(); ++m)
            a(static_cast<Eigen::Index>(m)) = std::polar(1.0, two_pi * (pos[m].x * c + pos[m].y * s));
        return a;
    }

    inline VectorXcd steering_derivative(const ArrayGeometry &geom, double theta)
    {
        const auto pos = geom.positions();
        VectorXcd d(static_cast<Eigen::Index>(pos.size()));
        const double c = std::cos(theta), s = std::sin(theta);
        for (std::size_t m = 0; m < pos.size(); ++m)
        {
            const double phase = two_pi * (pos[m].x * c + pos[m].y * s);
            const double rate = two_pi * (-pos[m].x * s + pos[m].y * c);
            d(static_cast<Eigen::Index>(m)) = j_unit * rate * std::polar(1.0, phase);
        }
        return d;
    }

    // A(theta) = [a(theta_1), ..., a(theta_L)]
    inline MatrixXcd steering_matrix(const ArrayGeometry &geom, std::span<const double> thetas)
    {
        MatrixXcd A(static_cast<Eigen::Index>(geom.size()), static_cast<Eigen::Index>(thetas.size()));
        for (std::size_t l = 0; l < thetas.size(); ++l)
            A.col(static_cast<Eigen::Index>(l)) = steering_vector(geom, thetas[l]);
        return A;
    }

    // Psi = [da(theta_1)/dtheta_1, ...]
    inline MatrixXcd steering_derivative_matrix(const ArrayGeometry &geom, std::span<const double> thetas)
    {
        MatrixXcd P(static_cast<Eigen::Index>(geom.size()), static_cast<Eigen::Index>(thetas.size()));
        for (std::size_t l = 0; l < thetas.size(); ++l)
            P.col(static_cast<Eigen::Index>(l)) = steering_derivative(geom, thetas[l]);
        return P;
    }

    // t(tau)_k = exp(-j w_k tau)
    inline VectorXcd delay_vector(const SubcarrierGrid &grid, double tau)
    {
        const VectorXd &w = grid.omegas();
        VectorXcd t(w.size());
        for (Eigen::Index k = 0; k < w.size(); ++k)
            t(k) = std::polar(1.0, -w(k) * tau);
        return t;
    }

    // x(k) = sum_l beta_l a(theta_l) S(w_k) exp(-j w_k tau_l), noiseless.
    inline CsiMatrix synthesize_csi(const ArrayGeometry &geom, const SubcarrierGrid &grid,
                                    const SignalSpectrum &spectrum, const PathSet &paths)
    {
        if (spectrum.size() != grid.size())
            throw config_error("spectrum length " + std::to_string(spectrum.size()) + " does not match " +
                               std::to_string(grid.size()) + " active bins");
        MatrixXcd X = MatrixXcd::Zero(static_cast<Eigen::Index>(geom.size()), static_cast<Eigen::Index>(grid.size()));
        for (const auto &p : paths)
        {
            const VectorXcd a = steering_vector(geom, p.theta);
            const VectorXcd t = delay_vector(grid, p.tau);
            const VectorXcd row = (p.beta * t.array() * spectrum.values().array()).matrix();
            X.noalias() += a * row.transpose();
        }
        return {std::move(X), geom, grid};
    }

    // Adds i.i.d. circular complex Gaussian noise, variance sigma2 per element.
    // An SNR spec is resolved against the input, which must be noiseless.
    inline CsiMatrix add_noise(const CsiMatrix &csi, const NoiseSpec &spec, std::uint64_t seed)
    {
        const double sigma2 = spec.sigma2_for(csi);
        CsiMatrix out = csi;
        if (sigma2 == 0.0)
            return out;
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 * sigma2));
        for (Eigen::Index k = 0; k < out.data.cols(); ++k)
            for (Eigen::Index m = 0; m < out.data.rows(); ++m)
            {
                const double re = gauss(rng);
                const double im = gauss(rng);
                out.data(m, k) += cd(re, im);
            }
        return out;
    }
}

#endif
