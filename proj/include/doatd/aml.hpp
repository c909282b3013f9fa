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

#ifndef DOATD_AML_HPP
#define DOATD_AML_HPP

#include "doatd/error.hpp"
#include "doatd/linalg.hpp"
#include "doatd/search.hpp"
#include "doatd/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace doatd
{
    struct AmlConfig
    {
        std::size_t n_paths = 1;
        std::size_t max_iterations = 10;
        double theta_grid = deg_to_rad(1.0); // rad, coarse azimuth step over [0, 2*pi)
        double tau_grid = 1e-9;              // s, coarse delay step over [0, 1/spacing)
        double refine_tol_theta = 1e-4;      // rad
        double refine_tol_tau = 1e-11;       // s
        double converge_tol = 1e-8;          // relative change of the residual

        void validate(std::size_t sensors) const
        {
            if (n_paths == 0)
                throw config_error("number of paths must be at least 1");
            if (n_paths > sensors)
                throw config_error("number of paths (" + std::to_string(n_paths) + ") exceeds sensor count (" +
                                   std::to_string(sensors) + ")");
            if (max_iterations == 0)
                throw config_error("max_iterations must be at least 1");
            if (!(theta_grid > 0.0) || !(tau_grid > 0.0))
                throw config_error("grid steps must be positive");
            if (!(refine_tol_theta > 0.0) || !(refine_tol_tau > 0.0) || !(converge_tol > 0.0))
                throw config_error("tolerances must be positive");
        }
    };

    struct EstimationResult
    {
        std::vector<double> theta_hat; // rad
        std::vector<double> tau_hat;   // s
        std::vector<cd> beta_hat;
        double residual = 0.0;               // sum_k ||x(k) - D(k) beta||^2 at the estimate
        std::size_t iterations_used = 0;     // == max_iterations when not converged
        std::vector<double> residual_history; // one entry per accepted iteration
    };

    struct AnglePeak
    {
        double theta = 0.0;
        cd beta;
    };

    struct DelayPeak
    {
        double tau = 0.0;
        cd beta;
    };

    struct UnstructuredSignals
    {
        MatrixXcd u; // L x K, column k is u_hat(k)
        MatrixXcd v; // K x L, column l is v_hat_l with entries u_l(k) / S(w_k)
    };

    namespace detail
    {
        inline void check_dimensions(const CsiMatrix &csi, const SignalSpectrum &spectrum)
        {
            if (spectrum.size() != csi.bins())
                throw config_error("spectrum length " + std::to_string(spectrum.size()) + " does not match " +
                                   std::to_string(csi.bins()) + " CSI columns");
        }

        // rows l: beta_l * S(w_k) * exp(-j w_k tau_l)
        inline MatrixXcd delay_rows(const SubcarrierGrid &grid, const SignalSpectrum &spectrum,
                                    std::span<const double> tau, std::span<const cd> beta)
        {
            MatrixXcd R(static_cast<Eigen::Index>(tau.size()), static_cast<Eigen::Index>(grid.size()));
            for (std::size_t l = 0; l < tau.size(); ++l)
            {
                const VectorXcd t = delay_vector(grid, tau[l]);
                R.row(static_cast<Eigen::Index>(l)) =
                    (beta[l] * t.array() * spectrum.values().array()).matrix().transpose();
            }
            return R;
        }
    }

    // sum_k ||x(k) - D(k) beta||^2
    inline double concentrated_objective(const CsiMatrix &csi, const SignalSpectrum &spectrum,
                                         std::span<const double> theta, std::span<const double> tau,
                                         std::span<const cd> beta)
    {
        detail::check_dimensions(csi, spectrum);
        if (theta.size() != tau.size() || theta.size() != beta.size())
            throw config_error("theta, tau and beta must have equal length");
        const MatrixXcd A = steering_matrix(csi.geometry, theta);
        const MatrixXcd R = detail::delay_rows(csi.grid, spectrum, tau, beta);
        return (csi.data - A * R).squaredNorm();
    }

    // B_hat = [sum_k x(k) r^H(k)] [sum_k r(k) r^H(k)]^-1 with r_l(k) = exp(-j w_k tau_l) S(w_k).
    inline MatrixXcd solve_B_given_tau(const CsiMatrix &csi, const SignalSpectrum &spectrum,
                                       std::span<const double> tau_hat)
    {
        detail::check_dimensions(csi, spectrum);
        if (tau_hat.empty())
            throw config_error("need at least one delay");
        const std::vector<cd> ones(tau_hat.size(), cd{1.0, 0.0});
        const MatrixXcd R = detail::delay_rows(csi.grid, spectrum, tau_hat, ones);
        const MatrixXcd cross = csi.data * R.adjoint();
        const MatrixXcd gram = R * R.adjoint();
        return linalg::solve_hermitian(gram, cross.adjoint(), "delay Gram matrix sum_k r(k) r^H(k)").adjoint();
    }

    // theta = argmax |b^H a(theta)|^2 / ||a(theta)||^2, beta = a^H b / ||a||^2.
    inline AnglePeak solve_theta_beta_per_path(const VectorXcd &b_hat, const ArrayGeometry &geom,
                                               const AmlConfig &cfg)
    {
        if (static_cast<std::size_t>(b_hat.size()) != geom.size())
            throw config_error("steering column length does not match sensor count");
        if (b_hat.squaredNorm() == 0.0)
            throw degenerate_error("angle search received a zero steering column");
        auto score = [&](double theta) {
            const VectorXcd a = steering_vector(geom, theta);
            return std::norm(a.dot(b_hat)) / a.squaredNorm();
        };
        const std::vector<double> grid = uniform_grid(two_pi, cfg.theta_grid);
        std::vector<double> values(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            values[i] = score(grid[i]);
        const ScalarPeak peak = refine_peaks(score, grid, values, cfg.theta_grid, cfg.refine_tol_theta);
        AnglePeak out;
        out.theta = wrap_angle(peak.arg);
        const VectorXcd a = steering_vector(geom, out.theta);
        out.beta = a.dot(b_hat) / a.squaredNorm();
        return out;
    }

    // u_hat(k) = (A^H A)^-1 A^H x(k); v_hat_l(k) = u_hat_l(k) / S(w_k).
    inline UnstructuredSignals solve_u_given_theta(const CsiMatrix &csi, const SignalSpectrum &spectrum,
                                                   std::span<const double> theta_hat)
    {
        detail::check_dimensions(csi, spectrum);
        if (theta_hat.empty())
            throw config_error("need at least one angle");
        if (theta_hat.size() > csi.sensors())
            throw degenerate_error("steering matrix is rank deficient: more paths than sensors");
        for (Eigen::Index k = 0; k < spectrum.values().size(); ++k)
            if (spectrum.values()(k) == cd{0.0, 0.0})
                throw degenerate_error("signal spectrum is zero on active bin " + std::to_string(k));
        const MatrixXcd A = steering_matrix(csi.geometry, theta_hat);
        UnstructuredSignals out;
        out.u = linalg::solve_hermitian(A.adjoint() * A, A.adjoint() * csi.data,
                                        "steering Gram matrix A^H A (coincident angles)");
        out.v = out.u.transpose();
        for (Eigen::Index k = 0; k < out.v.rows(); ++k)
            out.v.row(k) /= spectrum.values()(k);
        return out;
    }

    // tau = argmax |t^H(tau) v|^2 over [0, 1/spacing), beta = t^H(tau) v / K.
    inline DelayPeak solve_tau_beta_per_path(const VectorXcd &v_hat, const SubcarrierGrid &grid, const AmlConfig &cfg,
                                             DelayScanner &scanner)
    {
        if (static_cast<std::size_t>(v_hat.size()) != grid.size())
            throw config_error("delay column length does not match active bin count");
        if (v_hat.squaredNorm() == 0.0)
            throw degenerate_error("delay search received a zero signal column");
        const std::vector<double> power = scanner.power(v_hat);
        auto score = [&](double tau) { return std::norm(delay_correlate(grid, v_hat, tau)); };
        const ScalarPeak peak = refine_peaks(score, scanner.taus(), power, scanner.step(), cfg.refine_tol_tau);
        DelayPeak out;
        out.tau = std::fmod(peak.arg, grid.tau_max());
        if (out.tau < 0.0)
            out.tau += grid.tau_max();
        out.beta = delay_correlate(grid, v_hat, out.tau) / static_cast<double>(grid.size());
        return out;
    }

    inline DelayPeak solve_tau_beta_per_path(const VectorXcd &v_hat, const SubcarrierGrid &grid, const AmlConfig &cfg)
    {
        DelayScanner scanner(grid, cfg.tau_grid);
        return solve_tau_beta_per_path(v_hat, grid, cfg, scanner);
    }

    struct InitialGuess
    {
        std::vector<double> theta;
        std::vector<double> tau;
    };

    // Successive cancellation on the coarse (theta, tau) grid: pick the
    // strongest matched-filter cell, fit amplitudes, subtract, repeat. Each
    // cell is then re-detected with the other paths' fit removed until no
    // cell moves (at most three passes).
    inline InitialGuess initialize(const CsiMatrix &csi, const SignalSpectrum &spectrum, std::size_t n_paths,
                                   const AmlConfig &cfg, DelayScanner &scanner)
    {
        detail::check_dimensions(csi, spectrum);
        if (n_paths == 0 || n_paths > csi.sensors())
            throw config_error("number of paths must be in [1, sensors]");

        const std::vector<double> thetas = uniform_grid(two_pi, cfg.theta_grid);
        const MatrixXcd A_grid = steering_matrix(csi.geometry, thetas);
        const VectorXcd s_conj = spectrum.values().conjugate();

        // strongest coarse (theta, tau) cell of the matched filter applied to r
        auto strongest_cell = [&](const MatrixXcd &r) {
            MatrixXcd beams = A_grid.adjoint() * r;
            beams.array().rowwise() *= s_conj.transpose().array();
            double best = -1.0;
            std::size_t best_i = 0, best_n = 0;
            for (std::size_t i = 0; i < thetas.size(); ++i)
            {
                const VectorXcd row = beams.row(static_cast<Eigen::Index>(i)).transpose();
                const std::vector<double> power = scanner.power(row);
                const std::size_t n = argmax(power);
                if (power[n] > best)
                {
                    best = power[n];
                    best_i = i;
                    best_n = n;
                }
            }
            return std::pair{best_i, best_n};
        };
        // M x K response of a unit-amplitude path on cell (i, n)
        auto response = [&](std::size_t i, std::size_t n) {
            const VectorXcd g = (delay_vector(csi.grid, scanner.taus()[n]).array() * spectrum.values().array()).matrix();
            return MatrixXcd(A_grid.col(static_cast<Eigen::Index>(i)) * g.transpose());
        };
        // data minus the joint least-squares fit of the listed cells
        auto remove_fit = [&](const std::vector<std::pair<std::size_t, std::size_t>> &cells) {
            if (cells.empty())
                return MatrixXcd(csi.data);
            const auto n = static_cast<Eigen::Index>(cells.size());
            MatrixXcd D(csi.data.size(), n);
            for (Eigen::Index j = 0; j < n; ++j)
            {
                const MatrixXcd r = response(cells[static_cast<std::size_t>(j)].first, cells[static_cast<std::size_t>(j)].second);
                D.col(j) = Eigen::Map<const VectorXcd>(r.data(), r.size());
            }
            const Eigen::Map<const VectorXcd> x(csi.data.data(), csi.data.size());
            const VectorXcd beta = linalg::solve_hermitian(D.adjoint() * D, D.adjoint() * x, "initial path fit");
            const VectorXcd res = x - D * beta;
            return MatrixXcd(Eigen::Map<const MatrixXcd>(res.data(), csi.data.rows(), csi.data.cols()));
        };

        // successive cancellation
        std::vector<std::pair<std::size_t, std::size_t>> cells;
        MatrixXcd residual = csi.data;
        for (std::size_t l = 0; l < n_paths; ++l)
        {
            cells.push_back(strongest_cell(residual));
            if (l + 1 < n_paths)
            {
                try
                {
                    residual = remove_fit(cells);
                }
                catch (const degenerate_error &)
                {
                    break;
                }
            }
        }
        while (cells.size() < n_paths)
            cells.push_back(cells.back());

        // cyclic re-detection of each path with the others' joint fit removed
        for (std::size_t pass = 0; pass < 3 && n_paths > 1; ++pass)
        {
            bool moved = false;
            for (std::size_t l = 0; l < n_paths; ++l)
            {
                std::vector<std::pair<std::size_t, std::size_t>> others = cells;
                others.erase(others.begin() + static_cast<std::ptrdiff_t>(l));
                try
                {
                    const auto cell = strongest_cell(remove_fit(others));
                    moved = moved || cell != cells[l];
                    cells[l] = cell;
                }
                catch (const degenerate_error &)
                {
                }
            }
            if (!moved)
                break;
        }

        InitialGuess guess;
        for (const auto &[i, n] : cells)
        {
            guess.theta.push_back(thetas[i]);
            guess.tau.push_back(scanner.taus()[n]);
        }
        return guess;
    }

    inline InitialGuess initialize(const CsiMatrix &csi, const SignalSpectrum &spectrum, std::size_t n_paths,
                                   const AmlConfig &cfg)
    {
        DelayScanner scanner(csi.grid, cfg.tau_grid);
        return initialize(csi, spectrum, n_paths, cfg, scanner);
    }

    // Alternating estimator: delays and amplitudes given the angles, then
    // angles and amplitudes given the delays, until the residual settles.
    // An iteration that would increase the residual is discarded and ends the run.
    inline EstimationResult aml_estimate(const CsiMatrix &csi, const SignalSpectrum &spectrum, const AmlConfig &cfg)
    {
        detail::check_dimensions(csi, spectrum);
        cfg.validate(csi.sensors());
        const std::size_t L = cfg.n_paths;

        DelayScanner scanner(csi.grid, cfg.tau_grid);
        const InitialGuess init = initialize(csi, spectrum, L, cfg, scanner);

        std::vector<double> theta = init.theta, tau = init.tau;
        std::vector<cd> beta(L);

        EstimationResult best;
        for (std::size_t it = 1; it <= cfg.max_iterations; ++it)
        {
            const UnstructuredSignals sig = solve_u_given_theta(csi, spectrum, theta);
            for (std::size_t l = 0; l < L; ++l)
            {
                const DelayPeak p = solve_tau_beta_per_path(sig.v.col(static_cast<Eigen::Index>(l)), csi.grid, cfg,
                                                            scanner);
                tau[l] = p.tau;
                beta[l] = p.beta;
            }
            const MatrixXcd B = solve_B_given_tau(csi, spectrum, tau);
            for (std::size_t l = 0; l < L; ++l)
            {
                const AnglePeak p = solve_theta_beta_per_path(B.col(static_cast<Eigen::Index>(l)), csi.geometry, cfg);
                theta[l] = p.theta;
                beta[l] = p.beta;
            }
            const double residual = concentrated_objective(csi, spectrum, theta, tau, beta);

            if (it > 1 && residual > best.residual)
                break;

            bool settled = false;
            if (it > 1)
            {
                const double change = best.residual - residual;
                settled = change <= cfg.converge_tol * best.residual;
                double max_dtheta = 0.0, max_dtau = 0.0;
                for (std::size_t l = 0; l < L; ++l)
                {
                    max_dtheta = std::max(max_dtheta, std::abs(angle_difference(theta[l], best.theta_hat[l])));
                    max_dtau = std::max(max_dtau, std::abs(tau[l] - best.tau_hat[l]));
                }
                settled = settled || (max_dtheta < cfg.refine_tol_theta && max_dtau < cfg.refine_tol_tau);
            }

            best.theta_hat = theta;
            best.tau_hat = tau;
            best.beta_hat = beta;
            best.residual = residual;
            best.iterations_used = it;
            best.residual_history.push_back(residual);
            if (settled)
                break;
        }
        return best;
    }
}

#endif
