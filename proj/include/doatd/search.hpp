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

#ifndef DOATD_SEARCH_HPP
#define DOATD_SEARCH_HPP

#include "doatd/error.hpp"
#include "doatd/signal_model.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <vector>

namespace doatd
{
    struct ScalarPeak
    {
        double arg = 0.0;
        double value = -std::numeric_limits<double>::infinity();
    };

    // Golden-section maximisation of f on [lo, hi] until the bracket is
    // narrower than tol. Returns the best point evaluated, including the
    // incumbent, so a refinement never loses against its starting grid point.
    template <class F>
    ScalarPeak golden_maximize(F &&f, double lo, double hi, double tol, ScalarPeak incumbent)
    {
        constexpr double inv_phi = 0.6180339887498948482;
        ScalarPeak best = incumbent;
        auto consider = [&best](double x, double v) {
            if (v > best.value)
                best = {x, v};
        };
        double a = lo, b = hi;
        double c = b - inv_phi * (b - a);
        double d = a + inv_phi * (b - a);
        double fc = f(c), fd = f(d);
        consider(c, fc);
        consider(d, fd);
        while (b - a > tol)
        {
            if (fc > fd)
            {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = f(c);
                consider(c, fc);
            }
            else
            {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = f(d);
                consider(d, fd);
            }
        }
        const double mid = 0.5 * (a + b);
        consider(mid, f(mid));
        return best;
    }

    // Uniform grid i*step covering [0, span) without reaching span.
    inline std::vector<double> uniform_grid(double span, double step)
    {
        if (!(step > 0.0))
            throw config_error("grid step must be positive");
        const auto n = static_cast<std::size_t>(std::ceil(span / step - 1e-9));
        std::vector<double> g(std::max<std::size_t>(n, 1));
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] = static_cast<double>(i) * step;
        return g;
    }

    // Index of the largest element; ties go to the lowest index.
    inline std::size_t argmax(std::span<const double> v)
    {
        std::size_t best = 0;
        for (std::size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[best])
                best = i;
        return best;
    }

    // Coarse-to-fine search on a periodic grid: golden-refines the `count`
    // largest local maxima of `values` and keeps the best. A single refined
    // peak can lose to a near-equal grating lobe that sits off the grid.
    template <class F>
    ScalarPeak refine_peaks(F &&f, std::span<const double> grid, std::span<const double> values, double step,
                            double tol, std::size_t count = 3)
    {
        const std::size_t n = values.size();
        std::vector<std::size_t> peaks;
        for (std::size_t i = 0; i < n; ++i)
        {
            const double v = values[i];
            if (!std::isfinite(v))
                continue;
            const double left = values[(i + n - 1) % n], right = values[(i + 1) % n];
            if (n < 3 || (v >= left && v > right) || (v > left && v >= right))
                peaks.push_back(i);
        }
        if (peaks.empty())
            peaks.push_back(argmax(values));
        const std::size_t keep = std::min(count, peaks.size());
        std::partial_sort(peaks.begin(), peaks.begin() + static_cast<std::ptrdiff_t>(keep), peaks.end(),
                          [&](std::size_t a, std::size_t b) { return values[a] > values[b] || (values[a] == values[b] && a < b); });
        ScalarPeak best;
        for (std::size_t j = 0; j < keep; ++j)
        {
            const std::size_t i = peaks[j];
            const ScalarPeak p = golden_maximize(f, grid[i] - step, grid[i] + step, tol, {grid[i], values[i]});
            if (p.value > best.value)
                best = p;
        }
        return best;
    }

    // t^H(tau) v = sum_k v_k exp(+j w_k tau)
    inline cd delay_correlate(const SubcarrierGrid &grid, const VectorXcd &v, double tau)
    {
        const VectorXd &w = grid.omegas();
        cd acc{0.0, 0.0};
        for (Eigen::Index k = 0; k < w.size(); ++k)
            acc += v(k) * std::polar(1.0, w(k) * tau);
        return acc;
    }

    namespace detail
    {
        // FFTW planner calls are not reentrant; execution on distinct buffers is.
        inline std::mutex &fftw_planner_mutex()
        {
            static std::mutex m;
            return m;
        }
    }

    // Evaluates |t^H(tau_n) v|^2 on the delay grid tau_n = n*step over
    // [0, 1/spacing). When 1/(spacing*step) is an integer the scan is a
    // zero-padded inverse DFT of v scattered onto its bin indices; otherwise
    // it falls back to direct summation.
    class DelayScanner
    {
    public:
        DelayScanner(const SubcarrierGrid &grid, double step) : grid_(grid), step_(step)
        {
            taus_ = uniform_grid(grid.tau_max(), step);
            const double ratio = grid.tau_max() / step;
            const double rounded = std::round(ratio);
            if (rounded >= 1.0 && std::abs(ratio - rounded) <= 1e-9 * ratio)
            {
                fft_size_ = static_cast<std::size_t>(rounded);
                buffer_.reset(fftw_alloc_complex(fft_size_));
                std::lock_guard lock(detail::fftw_planner_mutex());
                plan_ = fftw_plan_dft_1d(static_cast<int>(fft_size_), buffer_.get(), buffer_.get(), FFTW_BACKWARD,
                                         FFTW_ESTIMATE);
            }
        }

        DelayScanner(const DelayScanner &) = delete;
        DelayScanner &operator=(const DelayScanner &) = delete;

        ~DelayScanner()
        {
            if (plan_)
            {
                std::lock_guard lock(detail::fftw_planner_mutex());
                fftw_destroy_plan(plan_);
            }
        }

        const std::vector<double> &taus() const { return taus_; }
        double step() const { return step_; }
        bool uses_fft() const { return plan_ != nullptr; }

        std::vector<double> power(const VectorXcd &v)
        {
            std::vector<double> out(taus_.size());
            if (plan_)
            {
                fftw_complex *buf = buffer_.get();
                for (std::size_t n = 0; n < fft_size_; ++n)
                    buf[n][0] = buf[n][1] = 0.0;
                const auto bins = grid_.active_bins();
                for (std::size_t k = 0; k < bins.size(); ++k)
                {
                    const std::size_t slot = bins[k] % fft_size_;
                    buf[slot][0] += v(static_cast<Eigen::Index>(k)).real();
                    buf[slot][1] += v(static_cast<Eigen::Index>(k)).imag();
                }
                fftw_execute(plan_);
                for (std::size_t n = 0; n < out.size(); ++n)
                    out[n] = buf[n][0] * buf[n][0] + buf[n][1] * buf[n][1];
            }
            else
            {
                for (std::size_t n = 0; n < out.size(); ++n)
                    out[n] = std::norm(delay_correlate(grid_, v, taus_[n]));
            }
            return out;
        }

    private:
        struct FftwFree
        {
            void operator()(fftw_complex *p) const { fftw_free(p); }
        };

        SubcarrierGrid grid_;
        double step_;
        std::vector<double> taus_;
        std::size_t fft_size_ = 0;
        std::unique_ptr<fftw_complex, FftwFree> buffer_;
        fftw_plan plan_ = nullptr;
    };
}

#endif
