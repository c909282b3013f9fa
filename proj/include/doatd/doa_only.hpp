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

#ifndef DOATD_DOA_ONLY_HPP
#define DOATD_DOA_ONLY_HPP

#include "doatd/error.hpp"
#include "doatd/linalg.hpp"
#include "doatd/search.hpp"
#include "doatd/signal_model.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace doatd
{
    struct DoaOnlyConfig
    {
        std::size_t n_paths = 1;
        double theta_grid = deg_to_rad(1.0);
        double refine_tol_theta = 1e-4;
        std::size_t max_iterations = 20;

        void validate(std::size_t sensors) const
        {
            if (n_paths == 0)
                throw config_error("number of paths must be at least 1");
            if (n_paths > sensors)
                throw config_error("number of paths (" + std::to_string(n_paths) + ") exceeds sensor count (" +
                                   std::to_string(sensors) + ")");
            if (max_iterations == 0)
                throw config_error("max_iterations must be at least 1");
            if (!(theta_grid > 0.0) || !(refine_tol_theta > 0.0))
                throw config_error("grid step and tolerance must be positive");
        }
    };

    struct DoaOnlyResult
    {
        std::vector<double> theta_hat;
        double objective = 0.0;
        std::size_t iterations_used = 0;
        std::vector<double> objective_history; // after initialisation, then one entry per sweep
    };

    // sum_k x(k)^H P_A^perp x(k)
    inline double doa_only_objective(const CsiMatrix &csi, std::span<const double> theta)
    {
        if (theta.empty())
            throw config_error("need at least one angle");
        if (theta.size() > csi.sensors())
            throw degenerate_error("steering matrix is rank deficient: more paths than sensors");
        const linalg::ColumnSpace span_a(steering_matrix(csi.geometry, theta), "steering matrix A(theta)");
        return span_a.project_out(csi.data).squaredNorm();
    }

    namespace detail
    {
        // Evaluates tr(R) - tr((A^H A)^-1 A^H R A) from the sample covariance
        // R = sum_k x(k) x^H(k); +inf where A is (numerically) rank deficient.
        class ProjectionCriterion
        {
        public:
            explicit ProjectionCriterion(const CsiMatrix &csi) : geom_(csi.geometry), cov_(csi.data * csi.data.adjoint())
            {
                trace_ = cov_.trace().real();
            }

            double operator()(std::span<const double> theta) const
            {
                const MatrixXcd A = steering_matrix(geom_, theta);
                const MatrixXcd gram = A.adjoint() * A;
                Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
                const double lmax = eig.eigenvalues().maxCoeff();
                if (!(eig.eigenvalues().minCoeff() > linalg::gram_rcond_min * lmax))
                    return std::numeric_limits<double>::infinity();
                const MatrixXcd RA = cov_ * A;
                const MatrixXcd captured = gram.llt().solve(A.adjoint() * RA);
                return trace_ - captured.trace().real();
            }

            const MatrixXcd &covariance() const { return cov_; }

        private:
            ArrayGeometry geom_;
            MatrixXcd cov_;
            double trace_ = 0.0;
        };
    }

    // Deterministic ML DOA estimate that treats the per-bin path amplitudes
    // as unstructured: successive-cancellation beamformer start, then cyclic
    // one-angle-at-a-time minimisation of the projection criterion.
    inline DoaOnlyResult doa_only_estimate(const CsiMatrix &csi, const DoaOnlyConfig &cfg)
    {
        cfg.validate(csi.sensors());
        const std::size_t L = cfg.n_paths;
        const std::vector<double> grid = uniform_grid(two_pi, cfg.theta_grid);
        const MatrixXcd A_grid = steering_matrix(csi.geometry, grid);
        const double step = cfg.theta_grid;

        // Initialisation
        std::vector<double> theta;
        MatrixXcd residual = csi.data;
        for (std::size_t l = 0; l < L; ++l)
        {
            const MatrixXcd beams = A_grid.adjoint() * residual;
            std::vector<double> power(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i)
                power[i] = beams.row(static_cast<Eigen::Index>(i)).squaredNorm();
            auto beam_power = [&](double th) {
                const VectorXcd a = steering_vector(csi.geometry, th);
                return (a.adjoint() * residual).squaredNorm() / a.squaredNorm();
            };
            for (std::size_t i = 0; i < grid.size(); ++i)
                power[i] /= A_grid.col(static_cast<Eigen::Index>(i)).squaredNorm();
            const ScalarPeak p = refine_peaks(beam_power, grid, power, step, cfg.refine_tol_theta);
            theta.push_back(wrap_angle(p.arg));
            if (l + 1 < L)
            {
                try
                {
                    const linalg::ColumnSpace span_a(steering_matrix(csi.geometry, theta), "steering matrix");
                    residual = span_a.project_out(csi.data);
                }
                catch (const degenerate_error &)
                {
                    throw degenerate_error("DOA-only initialisation produced coincident angles");
                }
            }
        }

        const detail::ProjectionCriterion criterion(csi);
        DoaOnlyResult out;
        double current = criterion(theta);
        if (!std::isfinite(current))
            throw degenerate_error("DOA-only initialisation produced a rank-deficient steering matrix");
        out.objective_history.push_back(current);

        for (std::size_t sweep = 1; sweep <= cfg.max_iterations; ++sweep)
        {
            double max_move = 0.0;
            for (std::size_t l = 0; l < L; ++l)
            {
                std::vector<double> trial = theta;
                auto neg_obj = [&](double th) {
                    trial[l] = th;
                    return -criterion(trial);
                };
                std::vector<double> values(grid.size());
                for (std::size_t i = 0; i < grid.size(); ++i)
                    values[i] = neg_obj(grid[i]);
                const ScalarPeak p = refine_peaks(neg_obj, grid, values, step, cfg.refine_tol_theta);
                trial[l] = wrap_angle(p.arg);
                const double candidate = criterion(trial);
                if (candidate <= current)
                {
                    max_move = std::max(max_move, std::abs(angle_difference(trial[l], theta[l])));
                    theta[l] = trial[l];
                    current = candidate;
                }
            }
            out.objective_history.push_back(current);
            out.iterations_used = sweep;
            if (max_move < cfg.refine_tol_theta)
                break;
        }
        out.theta_hat = theta;
        out.objective = current;
        return out;
    }
}

#endif
