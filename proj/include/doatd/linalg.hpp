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

#ifndef DOATD_LINALG_HPP
#define DOATD_LINALG_HPP

#include "doatd/error.hpp"

#include <Eigen/Dense>

#include <string>

namespace doatd::linalg
{
    // Eigenvalue ratio below which a Gram matrix is treated as singular.
    inline constexpr double gram_rcond_min = 1e-12;

    // Information matrices above this condition number are flagged.
    inline constexpr double info_cond_warn = 1e12;

    // Solves G Z = R for Hermitian positive definite G.
    inline Eigen::MatrixXcd solve_hermitian(const Eigen::MatrixXcd &G, const Eigen::MatrixXcd &R,
                                            const std::string &what)
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(G, Eigen::EigenvaluesOnly);
        const auto &ev = eig.eigenvalues();
        const double lmax = ev.maxCoeff();
        if (!(lmax > 0.0) || !(ev.minCoeff() > gram_rcond_min * lmax))
            throw degenerate_error(what + " is singular");
        Eigen::LLT<Eigen::MatrixXcd> llt(G);
        if (llt.info() != Eigen::Success)
            throw degenerate_error(what + " is not positive definite");
        return llt.solve(R);
    }

    struct RealSolve
    {
        Eigen::MatrixXd value;
        double condition = 1.0;
    };

    // Inverse of a real symmetric positive definite matrix via a solve against
    // the identity; reports the 2-norm condition number.
    inline RealSolve inverse_spd(const Eigen::MatrixXd &G, const std::string &what)
    {
        const Eigen::MatrixXd Gs = 0.5 * (G + G.transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Gs, Eigen::EigenvaluesOnly);
        const auto &ev = eig.eigenvalues();
        const double lmax = ev.maxCoeff();
        const double lmin = ev.minCoeff();
        if (!(lmax > 0.0) || !(lmin > 1e-15 * lmax))
            throw degenerate_error(what + " is singular (unidentifiable configuration)");
        Eigen::LDLT<Eigen::MatrixXd> ldlt(Gs);
        if (ldlt.info() != Eigen::Success)
            throw degenerate_error(what + " factorisation failed");
        RealSolve out;
        out.value = ldlt.solve(Eigen::MatrixXd::Identity(G.rows(), G.cols()));
        out.value = 0.5 * (out.value + out.value.transpose()).eval();
        out.condition = lmax / lmin;
        return out;
    }

    // Orthonormal basis of a full-column-rank matrix, used to apply the
    // orthogonal-complement projector I - D (D^H D)^-1 D^H without forming it.
    class ColumnSpace
    {
    public:
        ColumnSpace(const Eigen::MatrixXcd &D, const std::string &what)
        {
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(D);
            const auto &sv = svd.singularValues();
            if (sv.size() == 0 || !(sv(sv.size() - 1) > 1e-10 * sv(0)))
                throw degenerate_error(what + " is rank deficient");
            Eigen::HouseholderQR<Eigen::MatrixXcd> qr(D);
            basis_ = qr.householderQ() * Eigen::MatrixXcd::Identity(D.rows(), D.cols());
        }

        Eigen::MatrixXcd project_out(const Eigen::MatrixXcd &X) const
        {
            return X - basis_ * (basis_.adjoint() * X);
        }

        const Eigen::MatrixXcd &basis() const { return basis_; }

    private:
        Eigen::MatrixXcd basis_;
    };
}

#endif
