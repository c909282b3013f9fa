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

#ifndef DOATD_MONTE_CARLO_HPP
#define DOATD_MONTE_CARLO_HPP

#include "doatd/aml.hpp"
#include "doatd/crb.hpp"
#include "doatd/doa_only.hpp"
#include "doatd/error.hpp"
#include "doatd/signal_model.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace doatd
{
    enum class EstimatorKind
    {
        aml,
        doa_only,
        both
    };

    inline bool runs_aml(EstimatorKind k) { return k != EstimatorKind::doa_only; }
    inline bool runs_doa_only(EstimatorKind k) { return k != EstimatorKind::aml; }

    // One path of a scenario. With random_phase the trial amplitude is
    // |beta| exp(j*phi), phi uniform on [0, 2*pi); the nominal one is beta.
    struct PathTemplate
    {
        double theta = 0.0;
        double tau = 0.0;
        cd beta{1.0, 0.0};
        bool random_phase = false;
    };

    struct Scenario
    {
        ArrayGeometry geometry;
        SubcarrierGrid grid;
        SignalSpectrum spectrum;
        std::vector<PathTemplate> paths;
        NoiseSpec noise = NoiseSpec::from_sigma2(0.0);
        EstimatorKind estimator = EstimatorKind::aml;
        AmlConfig aml;
        DoaOnlyConfig doa_only;
        std::size_t n_trials = 100;
        std::uint64_t master_seed = 1;

        void validate() const
        {
            if (n_trials == 0)
                throw config_error("trials must be at least 1");
            if (spectrum.size() != grid.size())
                throw config_error("spectrum length does not match active bin count");
            (void)nominal_paths();
            if (runs_aml(estimator))
                aml.validate(geometry.size());
            if (runs_doa_only(estimator))
                doa_only.validate(geometry.size());
            if (aml.n_paths != paths.size() || doa_only.n_paths != paths.size())
                throw config_error("estimator path count must equal the number of scenario paths");
        }

        PathSet nominal_paths() const
        {
            std::vector<Path> p;
            for (const auto &t : paths)
                p.push_back({t.theta, t.tau, t.beta});
            return PathSet(std::move(p));
        }
    };

    // splitmix64 finaliser
    inline std::uint64_t mix_seed(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    inline std::uint64_t child_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t sweep_index)
    {
        return mix_seed(mix_seed(mix_seed(master) ^ trial) ^ (sweep_index * 0xd1b54a32d192ed03ULL));
    }

    // Pairs estimate indices with true paths: result[l] is the estimate
    // assigned to true path l. Minimises the total absolute angle error;
    // ties are broken by total absolute delay error.
    inline std::vector<std::size_t> associate_paths(std::span<const double> true_theta,
                                                    std::span<const double> true_tau,
                                                    std::span<const double> est_theta,
                                                    std::span<const double> est_tau)
    {
        const std::size_t L = true_theta.size();
        if (est_theta.size() != L)
            throw config_error("estimate count does not match path count");
        const bool with_tau = !true_tau.empty() && !est_tau.empty();
        std::vector<std::size_t> perm(L), best(L);
        std::iota(perm.begin(), perm.end(), 0);
        double best_angle = std::numeric_limits<double>::infinity();
        double best_delay = std::numeric_limits<double>::infinity();
        do
        {
            double angle = 0.0, delay = 0.0;
            for (std::size_t l = 0; l < L; ++l)
            {
                angle += std::abs(angle_difference(est_theta[perm[l]], true_theta[l]));
                if (with_tau)
                    delay += std::abs(est_tau[perm[l]] - true_tau[l]);
            }
            const double tie = 1e-12 * std::max(1.0, best_angle);
            if (angle < best_angle - tie || (std::abs(angle - best_angle) <= tie && delay < best_delay))
            {
                best_angle = angle;
                best_delay = delay;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        return best;
    }

    struct EstimatorOutcome
    {
        bool ok = false;
        std::string failure;
        std::vector<double> theta_hat; // associated to true path order
        std::vector<double> tau_hat;   // empty for the DOA-only estimator
        std::vector<double> theta_error; // rad, wrapped
        std::vector<double> tau_error;   // s
        std::size_t iterations = 0;
    };

    struct TrialResult
    {
        PathSet truth;
        double sigma2 = 0.0;
        std::optional<EstimatorOutcome> aml;
        std::optional<EstimatorOutcome> doa_only;
    };

    struct TrialDraw
    {
        PathSet truth;
        double sigma2 = 0.0;
        CsiMatrix csi;
    };

    // Draws the trial's phases and noise from a seed derived from
    // (master_seed, trial_index, sweep_index) and synthesises the noisy CSI.
    inline TrialDraw draw_trial(const Scenario &sc, std::size_t trial_index, std::size_t sweep_index = 0)
    {
        std::mt19937_64 rng(child_seed(sc.master_seed, trial_index, sweep_index));
        std::uniform_real_distribution<double> phase(0.0, two_pi);
        std::vector<Path> p;
        for (const auto &t : sc.paths)
        {
            cd beta = t.beta;
            if (t.random_phase)
                beta = std::polar(std::abs(t.beta), phase(rng));
            p.push_back({t.theta, t.tau, beta});
        }
        PathSet truth(std::move(p));
        const CsiMatrix clean = synthesize_csi(sc.geometry, sc.grid, sc.spectrum, truth);
        const double sigma2 = sc.noise.sigma2_for(clean);
        CsiMatrix noisy = add_noise(clean, NoiseSpec::from_sigma2(sigma2), rng());
        return {std::move(truth), sigma2, std::move(noisy)};
    }

    // One Monte Carlo trial: draw, run the selected estimators, associate
    // estimates with true paths. Degenerate estimator runs mark the outcome
    // failed instead of throwing.
    inline TrialResult run_trial(const Scenario &sc, std::size_t trial_index, std::size_t sweep_index = 0)
    {
        TrialDraw draw = draw_trial(sc, trial_index, sweep_index);
        TrialResult out;
        out.truth = std::move(draw.truth);
        out.sigma2 = draw.sigma2;
        const CsiMatrix &noisy = draw.csi;

        const std::vector<double> true_theta = out.truth.thetas();
        const std::vector<double> true_tau = out.truth.taus();

        if (runs_aml(sc.estimator))
        {
            EstimatorOutcome o;
            try
            {
                const EstimationResult r = aml_estimate(noisy, sc.spectrum, sc.aml);
                const auto perm = associate_paths(true_theta, true_tau, r.theta_hat, r.tau_hat);
                for (std::size_t l = 0; l < perm.size(); ++l)
                {
                    o.theta_hat.push_back(r.theta_hat[perm[l]]);
                    o.tau_hat.push_back(r.tau_hat[perm[l]]);
                    o.theta_error.push_back(angle_difference(r.theta_hat[perm[l]], true_theta[l]));
                    o.tau_error.push_back(r.tau_hat[perm[l]] - true_tau[l]);
                }
                o.iterations = r.iterations_used;
                o.ok = true;
            }
            catch (const degenerate_error &e)
            {
                o.failure = e.what();
            }
            out.aml = std::move(o);
        }
        if (runs_doa_only(sc.estimator))
        {
            EstimatorOutcome o;
            try
            {
                const DoaOnlyResult r = doa_only_estimate(noisy, sc.doa_only);
                const auto perm = associate_paths(true_theta, {}, r.theta_hat, {});
                for (std::size_t l = 0; l < perm.size(); ++l)
                {
                    o.theta_hat.push_back(r.theta_hat[perm[l]]);
                    o.theta_error.push_back(angle_difference(r.theta_hat[perm[l]], true_theta[l]));
                }
                o.iterations = r.iterations_used;
                o.ok = true;
            }
            catch (const degenerate_error &e)
            {
                o.failure = e.what();
            }
            out.doa_only = std::move(o);
        }
        return out;
    }

    enum class SweepVariable
    {
        snr_db,      // values in dB
        delta_theta, // values in rad: theta_2 = theta_1 + value
        delta_tau    // values in s: tau_2 = tau_1 + value
    };

    struct SweepSpec
    {
        Scenario base;
        SweepVariable variable = SweepVariable::snr_db;
        std::vector<double> values;
        std::size_t workers = 0; // 0: hardware concurrency
    };

    struct SweepRow
    {
        double swept_value = 0.0; // internal units (dB, rad or s)
        std::size_t trials = 0;
        // per true path, rad and s; NaN when the estimator did not run or every trial failed
        std::vector<double> rmse_doa_aml, rmse_td_aml, rmse_doa_only;
        double pooled_doa_aml = 0.0, pooled_td_aml = 0.0, pooled_doa_only = 0.0;
        std::vector<double> sqrt_crb_doa_joint, sqrt_crb_doa_only, sqrt_crb_td_joint;
        double pooled_crb_doa_joint = 0.0, pooled_crb_doa_only = 0.0, pooled_crb_td_joint = 0.0;
        std::size_t failures_aml = 0, failures_doa_only = 0;
        std::string crb_failure;
    };

    struct SweepResult
    {
        SweepVariable variable = SweepVariable::snr_db;
        std::vector<SweepRow> rows;
    };

    inline Scenario scenario_at(const Scenario &base, SweepVariable var, double value)
    {
        Scenario sc = base;
        switch (var)
        {
        case SweepVariable::snr_db:
            sc.noise = NoiseSpec::from_snr_db(value);
            break;
        case SweepVariable::delta_theta:
            if (sc.paths.size() < 2)
                throw config_error("delta_theta sweep needs at least two paths");
            sc.paths[1].theta = wrap_angle(sc.paths[0].theta + value);
            break;
        case SweepVariable::delta_tau:
            if (sc.paths.size() < 2)
                throw config_error("delta_tau sweep needs at least two paths");
            sc.paths[1].tau = sc.paths[0].tau + value;
            break;
        }
        sc.validate();
        return sc;
    }

    struct CrbOverlay
    {
        std::vector<double> sqrt_doa_joint, sqrt_doa_only, sqrt_td_joint;
        std::string failure;
    };

    // Bounds at the nominal parameters, with sigma^2 resolved against the
    // nominal noiseless CSI.
    inline CrbOverlay crb_overlay(const Scenario &sc)
    {
        CrbOverlay o;
        const PathSet nominal = sc.nominal_paths();
        const std::size_t L = nominal.size();
        try
        {
            const CsiMatrix clean = synthesize_csi(sc.geometry, sc.grid, sc.spectrum, nominal);
            const double sigma2 = sc.noise.sigma2_for(clean);
            const CrbReport r = crb_report(sc.geometry, sc.grid, sc.spectrum, nominal, sigma2);
            for (std::size_t l = 0; l < L; ++l)
            {
                const auto i = static_cast<Eigen::Index>(l);
                o.sqrt_doa_joint.push_back(std::sqrt(r.crb_theta_joint(i, i)));
                o.sqrt_doa_only.push_back(std::sqrt(r.crb_theta_only(i, i)));
                o.sqrt_td_joint.push_back(std::sqrt(r.crb_tau_joint(i, i)));
            }
        }
        catch (const degenerate_error &e)
        {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            o.sqrt_doa_joint.assign(L, nan);
            o.sqrt_doa_only.assign(L, nan);
            o.sqrt_td_joint.assign(L, nan);
            o.failure = e.what();
        }
        return o;
    }

    namespace detail
    {
        inline double pooled_sqrt_mean_square(const std::vector<double> &per_path)
        {
            if (per_path.empty())
                return std::numeric_limits<double>::quiet_NaN();
            double acc = 0.0;
            for (double v : per_path)
                acc += v * v;
            return std::sqrt(acc / static_cast<double>(per_path.size()));
        }

        // Per-path RMSE over successful trials; NaN if none succeeded.
        inline std::vector<double> rmse(const std::vector<TrialResult> &trials, std::size_t L, bool doa_only,
                                        bool delays, std::size_t &failures)
        {
            std::vector<double> acc(L, 0.0);
            std::size_t ok = 0;
            failures = 0;
            for (const auto &t : trials)
            {
                const auto &o = doa_only ? t.doa_only : t.aml;
                if (!o)
                    continue;
                if (!o->ok)
                {
                    ++failures;
                    continue;
                }
                ++ok;
                for (std::size_t l = 0; l < L; ++l)
                {
                    const double e = delays ? o->tau_error[l] : o->theta_error[l];
                    acc[l] += e * e;
                }
            }
            for (double &a : acc)
                a = ok ? std::sqrt(a / static_cast<double>(ok)) : std::numeric_limits<double>::quiet_NaN();
            return acc;
        }
    }

    using SweepProgress = std::function<void(std::size_t done, std::size_t total)>;

    // Runs every (swept value, trial) pair, possibly on several threads. Each
    // result lands in a fixed slot and the reduction runs in slot order, so
    // the output does not depend on scheduling.
    inline SweepResult run_sweep(const SweepSpec &spec, const SweepProgress &progress = {})
    {
        if (spec.values.empty())
            throw config_error("sweep needs at least one value");
        spec.base.validate();
        std::vector<Scenario> scenarios;
        for (double v : spec.values)
            scenarios.push_back(scenario_at(spec.base, spec.variable, v));

        const std::size_t n_trials = spec.base.n_trials;
        const std::size_t total = scenarios.size() * n_trials;
        std::vector<TrialResult> results(total);

        std::atomic<std::size_t> next{0};
        std::size_t done = 0;
        std::mutex progress_mutex;
        auto worker = [&]() {
            for (std::size_t task = next++; task < total; task = next++)
            {
                const std::size_t s = task / n_trials, t = task % n_trials;
                results[task] = run_trial(scenarios[s], t, s);
                if (progress)
                {
                    std::lock_guard lock(progress_mutex);
                    progress(++done, total);
                }
            }
        };
        std::size_t workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
        workers = std::min(workers, total);
        if (workers <= 1)
            worker();
        else
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w)
                pool.emplace_back(worker);
        }

        SweepResult out;
        out.variable = spec.variable;
        const std::size_t L = spec.base.paths.size();
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t s = 0; s < scenarios.size(); ++s)
        {
            const std::vector<TrialResult> slice(results.begin() + static_cast<std::ptrdiff_t>(s * n_trials),
                                                 results.begin() + static_cast<std::ptrdiff_t>((s + 1) * n_trials));
            SweepRow row;
            row.swept_value = spec.values[s];
            row.trials = n_trials;
            if (runs_aml(scenarios[s].estimator))
            {
                row.rmse_doa_aml = detail::rmse(slice, L, false, false, row.failures_aml);
                row.rmse_td_aml = detail::rmse(slice, L, false, true, row.failures_aml);
            }
            else
            {
                row.rmse_doa_aml.assign(L, nan);
                row.rmse_td_aml.assign(L, nan);
            }
            if (runs_doa_only(scenarios[s].estimator))
                row.rmse_doa_only = detail::rmse(slice, L, true, false, row.failures_doa_only);
            else
                row.rmse_doa_only.assign(L, nan);
            row.pooled_doa_aml = detail::pooled_sqrt_mean_square(row.rmse_doa_aml);
            row.pooled_td_aml = detail::pooled_sqrt_mean_square(row.rmse_td_aml);
            row.pooled_doa_only = detail::pooled_sqrt_mean_square(row.rmse_doa_only);

            CrbOverlay crb = crb_overlay(scenarios[s]);
            row.sqrt_crb_doa_joint = std::move(crb.sqrt_doa_joint);
            row.sqrt_crb_doa_only = std::move(crb.sqrt_doa_only);
            row.sqrt_crb_td_joint = std::move(crb.sqrt_td_joint);
            row.crb_failure = std::move(crb.failure);
            row.pooled_crb_doa_joint = detail::pooled_sqrt_mean_square(row.sqrt_crb_doa_joint);
            row.pooled_crb_doa_only = detail::pooled_sqrt_mean_square(row.sqrt_crb_doa_only);
            row.pooled_crb_td_joint = detail::pooled_sqrt_mean_square(row.sqrt_crb_td_joint);
            out.rows.push_back(std::move(row));
        }
        return out;
    }

    inline double swept_value_in_cli_units(SweepVariable var, double value)
    {
        switch (var)
        {
        case SweepVariable::delta_theta:
            return rad_to_deg(value);
        case SweepVariable::delta_tau:
            return value * 1e9;
        default:
            return value;
        }
    }

    // Plot-ready CSV: angles in degrees, delays in ns, per-path values pooled
    // as sqrt(mean over paths of the squared per-path value).
    inline void write_sweep_csv(std::ostream &os, const SweepResult &result)
    {
        auto num = [](double v) {
            if (std::isnan(v))
                return std::string("nan");
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.9g", v);
            return std::string(buf);
        };
        os << "swept_value,rmse_doa_deg_aml,rmse_td_ns_aml,rmse_doa_deg_only,sqrt_crb_doa_joint_deg,"
              "sqrt_crb_doa_only_deg,sqrt_crb_td_joint_ns,failures\n";
        for (const auto &r : result.rows)
        {
            os << num(swept_value_in_cli_units(result.variable, r.swept_value)) << ',' << num(rad_to_deg(r.pooled_doa_aml))
               << ',' << num(r.pooled_td_aml * 1e9) << ',' << num(rad_to_deg(r.pooled_doa_only)) << ','
               << num(rad_to_deg(r.pooled_crb_doa_joint)) << ',' << num(rad_to_deg(r.pooled_crb_doa_only)) << ','
               << num(r.pooled_crb_td_joint * 1e9) << ',' << (r.failures_aml + r.failures_doa_only) << '\n';
        }
    }
}

#endif
