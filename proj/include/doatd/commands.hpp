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

#ifndef DOATD_COMMANDS_HPP
#define DOATD_COMMANDS_HPP

#include "doatd/aml.hpp"
#include "doatd/config.hpp"
#include "doatd/crb.hpp"
#include "doatd/csi_io.hpp"
#include "doatd/doa_only.hpp"
#include "doatd/error.hpp"
#include "doatd/monte_carlo.hpp"

#include <json.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <string>

// Implementations of the command-line subcommands. Each returns a process
// exit status and writes diagnostics to the supplied error stream.

namespace doatd::cli
{
    enum exit_code : int
    {
        exit_ok = 0,
        exit_config = 2,
        exit_io = 3,
        exit_numerical = 4
    };

    struct CommandOptions
    {
        std::string config_path;
        std::string out_path;
        std::string csi_path;
        std::optional<std::uint64_t> trials;
        std::optional<std::uint64_t> seed;
    };

    namespace detail
    {
        using json = nlohmann::json;

        template <class F>
        int guarded(std::ostream &err, F &&body)
        {
            try
            {
                return body();
            }
            catch (const config_error &e)
            {
                err << "error: " << e.what() << '\n';
                return exit_config;
            }
            catch (const io_error &e)
            {
                err << "error: " << e.what() << '\n';
                return exit_io;
            }
            catch (const degenerate_error &e)
            {
                err << "error: numerical degeneracy: " << e.what() << '\n';
                return exit_numerical;
            }
        }

        inline ProblemConfig load(const CommandOptions &opt)
        {
            if (opt.config_path.empty())
                throw config_error("--config is required");
            ProblemConfig cfg = load_config(opt.config_path);
            if (opt.trials)
            {
                if (*opt.trials == 0)
                    throw config_error("--trials must be at least 1");
                cfg.scenario.n_trials = *opt.trials;
            }
            if (opt.seed)
                cfg.scenario.master_seed = *opt.seed;
            return cfg;
        }

        inline std::ofstream open_output(const std::string &path)
        {
            if (path.empty())
                throw config_error("--out is required");
            std::ofstream out(path, std::ios::binary);
            if (!out)
                throw io_error("cannot open '" + path + "' for writing");
            return out;
        }

        inline void finish_output(std::ofstream &out, const std::string &path)
        {
            out.flush();
            if (!out)
                throw io_error("failed writing '" + path + "'");
        }

        inline json deg_list(const std::vector<double> &rad)
        {
            json a = json::array();
            for (double v : rad)
                a.push_back(rad_to_deg(v));
            return a;
        }

        inline json matrix_json(const MatrixXd &m)
        {
            json rows = json::array();
            for (Eigen::Index i = 0; i < m.rows(); ++i)
            {
                json row = json::array();
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                    row.push_back(m(i, j));
                rows.push_back(row);
            }
            return rows;
        }

        inline json sqrt_diag(const MatrixXd &m, double scale)
        {
            json a = json::array();
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                a.push_back(std::sqrt(m(i, i)) * scale);
            return a;
        }
    }

    // Synthesises one CSI realisation (trial 0 of the configured seed).
    inline int cmd_simulate(const CommandOptions &opt, std::ostream &err)
    {
        return detail::guarded(err, [&] {
            const ProblemConfig cfg = detail::load(opt);
            const TrialDraw draw = draw_trial(cfg.scenario, 0, 0);
            std::ofstream out = detail::open_output(opt.out_path);
            write_csi_csv(out, draw.csi);
            detail::finish_output(out, opt.out_path);
            return int(exit_ok);
        });
    }

    inline int cmd_estimate(const CommandOptions &opt, std::ostream &out, std::ostream &err)
    {
        return detail::guarded(err, [&] {
            const ProblemConfig cfg = detail::load(opt);
            const Scenario &sc = cfg.scenario;
            if (opt.csi_path.empty())
                throw config_error("--csi is required");
            std::ifstream in(opt.csi_path);
            if (!in)
                throw io_error("cannot open CSI file '" + opt.csi_path + "'");
            const CsiFile file = read_csi_csv(in);
            if (file.sensors != sc.geometry.size())
                throw config_error("dimension mismatch: CSI file has M=" + std::to_string(file.sensors) +
                                   " sensors but the configured array has M=" + std::to_string(sc.geometry.size()));
            if (!(file.grid == sc.grid))
                throw config_error("dimension mismatch: CSI file subcarrier grid (K_total=" +
                                   std::to_string(file.grid.total_bins()) + ", K=" + std::to_string(file.grid.size()) +
                                   ") differs from the configured grid (K_total=" +
                                   std::to_string(sc.grid.total_bins()) + ", K=" + std::to_string(sc.grid.size()) + ")");
            const CsiMatrix csi(file.data, sc.geometry, sc.grid);

            detail::json doc = detail::json::object();
            if (runs_aml(sc.estimator))
            {
                EstimationResult r;
                try
                {
                    r = aml_estimate(csi, sc.spectrum, sc.aml);
                }
                catch (const degenerate_error &e)
                {
                    throw degenerate_error(std::string("AML estimator: ") + e.what());
                }
                detail::json beta = detail::json::array();
                for (const cd &b : r.beta_hat)
                    beta.push_back({{"re", b.real()}, {"im", b.imag()}});
                detail::json tau = detail::json::array();
                for (double t : r.tau_hat)
                    tau.push_back(t * 1e9);
                doc["aml"] = {{"theta_deg", detail::deg_list(r.theta_hat)},
                              {"tau_ns", tau},
                              {"beta", beta},
                              {"residual", r.residual},
                              {"iterations", r.iterations_used}};
            }
            if (runs_doa_only(sc.estimator))
            {
                DoaOnlyResult r;
                try
                {
                    r = doa_only_estimate(csi, sc.doa_only);
                }
                catch (const degenerate_error &e)
                {
                    throw degenerate_error(std::string("DOA-only estimator: ") + e.what());
                }
                doc["doa_only"] = {{"theta_deg", detail::deg_list(r.theta_hat)},
                                   {"objective", r.objective},
                                   {"iterations", r.iterations_used}};
            }
            out << doc.dump(2) << '\n';
            return int(exit_ok);
        });
    }

    // Bounds at the configured (nominal) parameters. Random-phase paths use
    // their configured amplitude with zero phase.
    inline int cmd_crb(const CommandOptions &opt, std::ostream &out, std::ostream &err)
    {
        return detail::guarded(err, [&] {
            const ProblemConfig cfg = detail::load(opt);
            const Scenario &sc = cfg.scenario;
            const PathSet nominal = sc.nominal_paths();
            const CsiMatrix clean = synthesize_csi(sc.geometry, sc.grid, sc.spectrum, nominal);
            const double sigma2 = sc.noise.sigma2_for(clean);
            const CrbReport r = crb_report(sc.geometry, sc.grid, sc.spectrum, nominal, sigma2);
            const double deg = rad_to_deg(1.0);
            detail::json doc = {
                {"sigma2", sigma2},
                {"sqrt_crb_doa_joint_deg", detail::sqrt_diag(r.crb_theta_joint, deg)},
                {"sqrt_crb_doa_only_deg", detail::sqrt_diag(r.crb_theta_only, deg)},
                {"sqrt_crb_td_joint_ns", detail::sqrt_diag(r.crb_tau_joint, 1e9)},
                {"crb_theta_joint_rad2", detail::matrix_json(r.crb_theta_joint)},
                {"crb_tau_joint_s2", detail::matrix_json(r.crb_tau_joint)},
                {"crb_theta_only_rad2", detail::matrix_json(r.crb_theta_only)},
                {"ordering_min_eigenvalue_rad2", r.ordering_margin},
                {"warnings", r.warnings},
            };
            out << doc.dump(2) << '\n';
            return int(exit_ok);
        });
    }

    inline int cmd_sweep(const CommandOptions &opt, std::ostream &err)
    {
        return detail::guarded(err, [&] {
            const ProblemConfig cfg = detail::load(opt);
            if (!cfg.sweep_variable)
                throw config_error("config: sweep: missing required section for the sweep command");
            SweepSpec spec{cfg.scenario, *cfg.sweep_variable, cfg.sweep_values};
            std::ofstream out = detail::open_output(opt.out_path);
            std::size_t last_pct = 101;
            const SweepResult result = run_sweep(spec, [&](std::size_t done, std::size_t total) {
                const std::size_t pct = 100 * done / total;
                if (pct / 10 != last_pct / 10 || done == total)
                {
                    err << "sweep: " << done << "/" << total << " trials\n";
                    last_pct = pct;
                }
            });
            write_sweep_csv(out, result);
            detail::finish_output(out, opt.out_path);
            return int(exit_ok);
        });
    }
}

#endif
