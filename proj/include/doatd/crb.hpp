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

#ifndef DOATD_CRB_HPP
#define DOATD_CRB_HPP

#include "doatd/error.hpp"
#include "doatd/linalg.hpp"
#include "doatd/signal_model.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace doatd
{
    // Stacked over bins: row k*M + m holds sensor m on active bin k.
    struct StackedJacobians
    {
        MatrixXcd d;      // S(w_k) a(theta_l) exp(-j w_k tau_l)
        MatrixXcd e;      // derivative of d w.r.t. theta_l
        MatrixXcd lambda; // derivative of d w.r.t. tau_l
    };

    struct JointCrb
    {
        MatrixXd theta; // rad^2
        MatrixXd tau;   // s^2
        std::vector<std::string> warnings;
    };

    struct CrbReport
    {
        MatrixXd crb_theta_joint; // rad^2
        MatrixXd crb_tau_joint;   // s^2
        MatrixXd crb_theta_only;  // rad^2
        double sigma2 = 0.0;
        double ordering_margin = 0.0; // lambda_min(crb_theta_only - crb_theta_joint), >= 0 up to rounding
        std::vector<std::string> warnings;
    };

    namespace detail
    {
        // W_ij = conj(beta_i) beta_j
        inline MatrixXcd amplitude_outer(const VectorXcd &beta)
        {
            return beta.conjugate() * beta.transpose();
        }

        inline void check_spectrum(const SubcarrierGrid &grid, const SignalSpectrum &spectrum)
        {
            if (spectrum.size() != grid.size())
                throw config_error("spectrum length does not match active bin count");
        }

        inline linalg::RealSolve checked_inverse(const MatrixXd &G, const std::string &what,
                                                 std::vector<std::string> &warnings)
        {
            linalg::RealSolve inv = linalg::inverse_spd(G, what);
            if (inv.condition > linalg::info_cond_warn)
            {
                std::ostringstream msg;
                msg << what << " is ill-conditioned (condition number " << inv.condition << ")";
                warnings.push_back(msg.str());
            }
            return inv;
        }
    }

    inline StackedJacobians build_stacked_jacobians(const ArrayGeometry &geom, const SubcarrierGrid &grid,
                                                    const SignalSpectrum &spectrum, const PathSet &paths)
    {
        detail::check_spectrum(grid, spectrum);
        const auto M = static_cast<Eigen::Index>(geom.size());
        const auto K = static_cast<Eigen::Index>(grid.size());
        const auto L = static_cast<Eigen::Index>(paths.size());
        StackedJacobians J{MatrixXcd(M * K, L), MatrixXcd(M * K, L), MatrixXcd(M * K, L)};
        const VectorXd &w = grid.omegas();
        for (Eigen::Index l = 0; l < L; ++l)
        {
            const Path &p = paths[static_cast<std::size_t>(l)];
            const VectorXcd a = steering_vector(geom, p.theta);
            const VectorXcd da = steering_derivative(geom, p.theta);
            for (Eigen::Index k = 0; k < K; ++k)
            {
                const cd g = spectrum.values()(k) * std::polar(1.0, -w(k) * p.tau);
                J.d.block(k * M, l, M, 1) = g * a;
                J.e.block(k * M, l, M, 1) = g * da;
                J.lambda.block(k * M, l, M, 1) = (-j_unit * w(k) * g) * a;
            }
        }
        Eigen::JacobiSVD<MatrixXcd> svd(J.d);
        const auto &sv = svd.singularValues();
        if (!(sv(sv.size() - 1) > 1e-10 * sv(0)))
            throw degenerate_error("stacked response matrix D~ is rank deficient (coincident (theta, tau) pairs)");
        return J;
    }

    // Joint deterministic bound on (theta, tau) with beta as nuisance.
    inline JointCrb crb_joint(const ArrayGeometry &geom, const SubcarrierGrid &grid, const SignalSpectrum &spectrum,
                              const PathSet &paths, double sigma2)
    {
        const StackedJacobians J = build_stacked_jacobians(geom, grid, spectrum, paths);
        const linalg::ColumnSpace span_d(J.d, "stacked response matrix D~");
        const MatrixXcd pe = span_d.project_out(J.e);
        const MatrixXcd pl = span_d.project_out(J.lambda);
        const MatrixXcd W = detail::amplitude_outer(paths.betas());

        const MatrixXd g1 = (pe.adjoint() * pe).cwiseProduct(W).real();
        const MatrixXd g2 = (pe.adjoint() * pl).cwiseProduct(W).real();
        const MatrixXd g3 = (pl.adjoint() * pl).cwiseProduct(W).real();

        JointCrb out;
        const MatrixXd g3_inv = detail::checked_inverse(g3, "Gamma3 (delay information)", out.warnings).value;
        const MatrixXd g1_inv = detail::checked_inverse(g1, "Gamma1 (angle information)", out.warnings).value;
        const MatrixXd schur_theta = g1 - g2 * g3_inv * g2.transpose();
        const MatrixXd schur_tau = g3 - g2.transpose() * g1_inv * g2;
        out.theta = 0.5 * sigma2 *
                    detail::checked_inverse(schur_theta, "angle Schur complement Gamma1 - Gamma2 Gamma3^-1 Gamma2^T",
                                            out.warnings)
                        .value;
        out.tau = 0.5 * sigma2 *
                  detail::checked_inverse(schur_tau, "delay Schur complement Gamma3 - Gamma2^T Gamma1^-1 Gamma2",
                                          out.warnings)
                      .value;
        return out;
    }

    // Deterministic bound for DOA-only estimation with c(k) as unstructured
    // source signals, R_c = (1/K) sum_k c*(k) c^T(k).
    inline MatrixXd crb_doa_only(const ArrayGeometry &geom, const SubcarrierGrid &grid, const SignalSpectrum &spectrum,
                                 const PathSet &paths, double sigma2, std::vector<std::string> *warnings = nullptr)
    {
        detail::check_spectrum(grid, spectrum);
        const std::vector<double> thetas = paths.thetas();
        const MatrixXcd A = steering_matrix(geom, thetas);
        const MatrixXcd psi = steering_derivative_matrix(geom, thetas);
        const linalg::ColumnSpace span_a(A, "steering matrix A(theta)");
        const MatrixXcd ppsi = span_a.project_out(psi);

        const auto K = static_cast<Eigen::Index>(grid.size());
        const auto L = static_cast<Eigen::Index>(paths.size());
        MatrixXcd C(L, K);
        for (Eigen::Index l = 0; l < L; ++l)
        {
            const Path &p = paths[static_cast<std::size_t>(l)];
            const VectorXcd t = delay_vector(grid, p.tau);
            C.row(l) = (p.beta * t.array() * spectrum.values().array()).matrix().transpose();
        }
        const MatrixXcd Rc = C.conjugate() * C.transpose() / static_cast<double>(K);
        const MatrixXd info = (ppsi.adjoint() * ppsi).cwiseProduct(Rc).real();
        std::vector<std::string> local;
        const auto inv = detail::checked_inverse(info, "DOA-only information matrix", warnings ? *warnings : local);
        return sigma2 / (2.0 * static_cast<double>(K)) * inv.value;
    }

    // Closed form of the angle bound when all paths share one delay.
    inline MatrixXd crb_equal_delay_closed_form(const ArrayGeometry &geom, const SubcarrierGrid &grid,
                                                const SignalSpectrum &spectrum, const PathSet &paths, double sigma2)
    {
        detail::check_spectrum(grid, spectrum);
        for (const auto &p : paths)
            if (std::abs(p.tau - paths[0].tau) > 1e-15)
                throw config_error("equal-delay closed form requires all path delays to coincide");
        const std::vector<double> thetas = paths.thetas();
        const linalg::ColumnSpace span_a(steering_matrix(geom, thetas), "steering matrix A(theta)");
        const MatrixXcd ppsi = span_a.project_out(steering_derivative_matrix(geom, thetas));
        const MatrixXd info = (ppsi.adjoint() * ppsi).cwiseProduct(detail::amplitude_outer(paths.betas())).real();
        return sigma2 / (2.0 * spectrum.energy()) * linalg::inverse_spd(info, "equal-delay information matrix").value;
    }

    // Single-path delay bound from explicit bin frequencies. The double sum
    // sum_k sum_n w_k (w_k - w_n) |S_k|^2 |S_n|^2 is evaluated in its
    // equivalent weighted-variance form.
    inline double crb_single_path_td_closed_form(const VectorXd &omegas, const SignalSpectrum &spectrum, cd beta1,
                                                 double steering_norm2, double sigma2)
    {
        if (static_cast<std::size_t>(omegas.size()) != spectrum.size())
            throw config_error("spectrum length does not match frequency count");
        const VectorXd power = spectrum.values().cwiseAbs2();
        const double energy = power.sum();
        const Eigen::Index occupied = (power.array() > 0.0).count();
        const double mean = power.dot(omegas) / energy;
        const double spread = power.dot((omegas.array() - mean).square().matrix());
        const double denom = 2.0 * std::norm(beta1) * steering_norm2 * energy * spread;
        if (occupied < 2 || !(denom > 0.0))
            throw degenerate_error("single-path delay bound has a zero denominator (delay unidentifiable)");
        return sigma2 * energy / denom;
    }

    inline double crb_single_path_td_closed_form(const ArrayGeometry &geom, const SubcarrierGrid &grid,
                                                 const SignalSpectrum &spectrum, cd beta1, double theta1,
                                                 double sigma2)
    {
        return crb_single_path_td_closed_form(grid.omegas(), spectrum, beta1,
                                              steering_vector(geom, theta1).squaredNorm(), sigma2);
    }

    inline double min_eigenvalue(const MatrixXd &S)
    {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
        return eig.eigenvalues().minCoeff();
    }

    // lambda_min(CRB^O - CRB^J_theta). The joint angle bound never exceeds
    // the DOA-only one, so this is >= 0 up to rounding.
    inline double bound_ordering_margin(const ArrayGeometry &geom, const SubcarrierGrid &grid, const SignalSpectrum &spectrum,
                                 const PathSet &paths, double sigma2)
    {
        const JointCrb joint = crb_joint(geom, grid, spectrum, paths, sigma2);
        const MatrixXd only = crb_doa_only(geom, grid, spectrum, paths, sigma2);
        return min_eigenvalue(only - joint.theta);
    }

    inline CrbReport crb_report(const ArrayGeometry &geom, const SubcarrierGrid &grid, const SignalSpectrum &spectrum,
                                const PathSet &paths, double sigma2)
    {
        CrbReport r;
        JointCrb joint = crb_joint(geom, grid, spectrum, paths, sigma2);
        r.crb_theta_joint = std::move(joint.theta);
        r.crb_tau_joint = std::move(joint.tau);
        r.warnings = std::move(joint.warnings);
        r.crb_theta_only = crb_doa_only(geom, grid, spectrum, paths, sigma2, &r.warnings);
        r.sigma2 = sigma2;
        r.ordering_margin = min_eigenvalue(r.crb_theta_only - r.crb_theta_joint);
        return r;
    }
}

#endif
