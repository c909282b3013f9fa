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

#ifndef DOATD_CONFIG_HPP
#define DOATD_CONFIG_HPP

#include "doatd/error.hpp"
#include "doatd/monte_carlo.hpp"
#include "doatd/signal_model.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace doatd
{
    // Parsed configuration document. Angles are degrees and delays are
    // nanoseconds in the file; everything here is radians and seconds.
    struct ProblemConfig
    {
        Scenario scenario;
        std::optional<SweepVariable> sweep_variable;
        std::vector<double> sweep_values; // internal units
    };

    namespace detail
    {
        using json = nlohmann::json;

        [[noreturn]] inline void config_fail(const std::string &path, const std::string &what)
        {
            throw config_error("config: " + (path.empty() ? std::string("<root>") : path) + ": " + what);
        }

        inline std::string join_path(const std::string &parent, const std::string &key)
        {
            return parent.empty() ? key : parent + "." + key;
        }

        inline std::string index_path(const std::string &parent, std::size_t i)
        {
            return parent + "[" + std::to_string(i) + "]";
        }

        inline void require_object(const json &j, const std::string &path)
        {
            if (!j.is_object())
                config_fail(path, "expected an object");
        }

        inline void allow_keys(const json &j, const std::string &path, std::initializer_list<const char *> keys)
        {
            for (auto it = j.begin(); it != j.end(); ++it)
                if (std::none_of(keys.begin(), keys.end(), [&](const char *k) { return it.key() == k; }))
                    config_fail(join_path(path, it.key()), "unknown key");
        }

        inline double number_at(const json &j, const std::string &path)
        {
            if (!j.is_number())
                config_fail(path, "expected a number");
            const double v = j.get<double>();
            if (!std::isfinite(v))
                config_fail(path, "expected a finite number");
            return v;
        }

        inline double number(const json &obj, const std::string &path, const char *key)
        {
            if (!obj.contains(key))
                config_fail(join_path(path, key), "missing required key");
            return number_at(obj.at(key), join_path(path, key));
        }

        inline double number_or(const json &obj, const std::string &path, const char *key, double fallback)
        {
            return obj.contains(key) ? number_at(obj.at(key), join_path(path, key)) : fallback;
        }

        inline std::uint64_t count_at(const json &j, const std::string &path)
        {
            if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
                config_fail(path, "expected a non-negative integer");
            return j.get<std::uint64_t>();
        }

        inline std::uint64_t count(const json &obj, const std::string &path, const char *key)
        {
            if (!obj.contains(key))
                config_fail(join_path(path, key), "missing required key");
            return count_at(obj.at(key), join_path(path, key));
        }

        inline std::uint64_t count_or(const json &obj, const std::string &path, const char *key, std::uint64_t fallback)
        {
            return obj.contains(key) ? count_at(obj.at(key), join_path(path, key)) : fallback;
        }

        // Rewrites a type-invariant violation as a config diagnostic at path.
        template <class F>
        auto at_path(const std::string &path, F &&make)
        {
            try
            {
                return make();
            }
            catch (const config_error &e)
            {
                config_fail(path, e.what());
            }
        }

        inline constexpr std::uint64_t max_sensors = 4096;
        inline constexpr std::uint64_t max_bins = 1u << 20;

        inline std::uint64_t sensor_count(const json &j, const std::string &path)
        {
            const auto m = count(j, path, "M");
            if (m > max_sensors)
                config_fail(join_path(path, "M"), "must be at most " + std::to_string(max_sensors));
            return m;
        }

        inline ArrayGeometry parse_array(const json &j, const std::string &path)
        {
            require_object(j, path);
            allow_keys(j, path, {"kind", "M", "radius_lambda", "spacing_lambda", "positions"});
            if (!j.contains("kind") || !j.at("kind").is_string())
                config_fail(join_path(path, "kind"), "expected one of \"uca\", \"ula\", \"custom\"");
            const std::string kind = j.at("kind").get<std::string>();
            if (kind == "uca")
            {
                const auto m = sensor_count(j, path);
                const double r = number(j, path, "radius_lambda");
                return at_path(path, [&] { return ArrayGeometry::uniform_circular(m, r); });
            }
            if (kind == "ula")
            {
                const auto m = sensor_count(j, path);
                const double d = number_or(j, path, "spacing_lambda", 0.5);
                return at_path(path, [&] { return ArrayGeometry::uniform_linear(m, d); });
            }
            if (kind == "custom")
            {
                const std::string ppath = join_path(path, "positions");
                if (!j.contains("positions") || !j.at("positions").is_array())
                    config_fail(ppath, "expected an array of [x, y] pairs");
                std::vector<Point2> pos;
                const json &arr = j.at("positions");
                for (std::size_t i = 0; i < arr.size(); ++i)
                {
                    const std::string ip = index_path(ppath, i);
                    if (!arr[i].is_array() || arr[i].size() != 2)
                        config_fail(ip, "expected an [x, y] pair");
                    pos.push_back({number_at(arr[i][0], ip + "[0]"), number_at(arr[i][1], ip + "[1]")});
                }
                if (j.contains("M") && count(j, path, "M") != pos.size())
                    config_fail(join_path(path, "M"), "does not match the number of positions");
                return at_path(path, [&] { return ArrayGeometry(std::move(pos)); });
            }
            config_fail(join_path(path, "kind"), "expected one of \"uca\", \"ula\", \"custom\"");
        }

        inline SubcarrierGrid parse_grid(const json &j, const std::string &path)
        {
            require_object(j, path);
            allow_keys(j, path, {"carrier_hz", "spacing_hz", "total_bins", "active_bins"});
            const double carrier = number(j, path, "carrier_hz");
            const double spacing = number(j, path, "spacing_hz");
            const auto total = count(j, path, "total_bins");
            if (total > max_bins)
                config_fail(join_path(path, "total_bins"), "must be at most " + std::to_string(max_bins));
            std::vector<std::size_t> bins;
            if (j.contains("active_bins"))
            {
                const std::string bpath = join_path(path, "active_bins");
                const json &arr = j.at("active_bins");
                if (!arr.is_array())
                    config_fail(bpath, "expected an array of indices or [first, last] ranges");
                for (std::size_t i = 0; i < arr.size(); ++i)
                {
                    const std::string ip = index_path(bpath, i);
                    if (arr[i].is_array())
                    {
                        if (arr[i].size() != 2)
                            config_fail(ip, "a range must be [first, last]");
                        const auto lo = count_at(arr[i][0], ip + "[0]");
                        const auto hi = count_at(arr[i][1], ip + "[1]");
                        if (hi < lo)
                            config_fail(ip, "range end precedes its start");
                        if (hi >= total)
                            config_fail(ip + "[1]", "bin index must be below total_bins");
                        for (auto b = lo; b <= hi; ++b)
                            bins.push_back(b);
                    }
                    else
                        bins.push_back(count_at(arr[i], ip));
                }
            }
            else
            {
                for (std::uint64_t b = 0; b < total; ++b)
                    bins.push_back(b);
            }
            return at_path(path, [&] { return SubcarrierGrid(carrier, spacing, total, bins); });
        }

        inline SignalSpectrum parse_spectrum(const json &root, std::size_t bins)
        {
            if (!root.contains("spectrum"))
                return SignalSpectrum::ones(bins);
            const std::string path = "spectrum";
            const json &arr = root.at("spectrum");
            if (!arr.is_array())
                config_fail(path, "expected an array of [re, im] pairs, one per active bin");
            if (arr.size() != bins)
                config_fail(path, "has " + std::to_string(arr.size()) + " entries but the grid has " +
                                      std::to_string(bins) + " active bins");
            VectorXcd v(static_cast<Eigen::Index>(bins));
            for (std::size_t i = 0; i < bins; ++i)
            {
                const std::string ip = index_path(path, i);
                if (!arr[i].is_array() || arr[i].size() != 2)
                    config_fail(ip, "expected an [re, im] pair");
                v(static_cast<Eigen::Index>(i)) = {number_at(arr[i][0], ip + "[0]"), number_at(arr[i][1], ip + "[1]")};
            }
            return at_path(path, [&] { return SignalSpectrum(std::move(v)); });
        }

        inline std::vector<PathTemplate> parse_paths(const json &root)
        {
            const std::string path = "paths";
            if (!root.contains("paths"))
                config_fail(path, "missing required key");
            const json &arr = root.at("paths");
            if (!arr.is_array())
                config_fail(path, "expected an array of path objects");
            if (arr.empty())
                config_fail(path, "at least one path is required");
            std::vector<PathTemplate> out;
            for (std::size_t i = 0; i < arr.size(); ++i)
            {
                const std::string ip = index_path(path, i);
                const json &p = arr[i];
                require_object(p, ip);
                allow_keys(p, ip, {"theta_deg", "tau_ns", "beta_re", "beta_im", "beta_abs", "random_phase"});
                PathTemplate t;
                const double theta_deg = number(p, ip, "theta_deg");
                t.theta = wrap_angle(deg_to_rad(theta_deg));
                t.tau = number(p, ip, "tau_ns") * 1e-9;
                if (t.tau < 0.0)
                    config_fail(join_path(ip, "tau_ns"), "delay must be non-negative");
                const bool has_abs = p.contains("beta_abs");
                const bool has_cart = p.contains("beta_re") || p.contains("beta_im");
                if (has_abs && has_cart)
                    config_fail(join_path(ip, "beta_abs"), "cannot be combined with beta_re/beta_im");
                if (has_abs)
                {
                    const double a = number(p, ip, "beta_abs");
                    if (a < 0.0)
                        config_fail(join_path(ip, "beta_abs"), "must be non-negative");
                    t.beta = {a, 0.0};
                }
                else if (has_cart)
                    t.beta = {number_or(p, ip, "beta_re", 0.0), number_or(p, ip, "beta_im", 0.0)};
                if (p.contains("random_phase"))
                {
                    if (!p.at("random_phase").is_boolean())
                        config_fail(join_path(ip, "random_phase"), "expected true or false");
                    t.random_phase = p.at("random_phase").get<bool>();
                }
                out.push_back(t);
            }
            return out;
        }

        inline NoiseSpec parse_noise(const json &root)
        {
            if (!root.contains("noise"))
                return NoiseSpec::from_sigma2(0.0);
            const std::string path = "noise";
            const json &j = root.at("noise");
            require_object(j, path);
            allow_keys(j, path, {"snr_db", "sigma2"});
            if (j.contains("snr_db") == j.contains("sigma2"))
                config_fail(path, "give exactly one of snr_db or sigma2");
            if (j.contains("snr_db"))
                return at_path(path, [&] { return NoiseSpec::from_snr_db(number(j, path, "snr_db")); });
            return at_path(path, [&] { return NoiseSpec::from_sigma2(number(j, path, "sigma2")); });
        }

        inline EstimatorKind parse_kind(const json &j, const std::string &path)
        {
            if (j.is_string())
            {
                const std::string s = j.get<std::string>();
                if (s == "aml")
                    return EstimatorKind::aml;
                if (s == "doa_only")
                    return EstimatorKind::doa_only;
                if (s == "both")
                    return EstimatorKind::both;
            }
            config_fail(path, "expected \"aml\", \"doa_only\" or \"both\"");
        }

        inline void parse_estimator(const json &root, Scenario &sc)
        {
            if (!root.contains("estimator"))
                return;
            const std::string path = "estimator";
            const json &j = root.at("estimator");
            if (j.is_string())
            {
                sc.estimator = parse_kind(j, path);
                return;
            }
            require_object(j, path);
            allow_keys(j, path, {"kind", "aml", "doa_only"});
            if (j.contains("kind"))
                sc.estimator = parse_kind(j.at("kind"), join_path(path, "kind"));
            if (j.contains("aml"))
            {
                const std::string ap = join_path(path, "aml");
                const json &a = j.at("aml");
                require_object(a, ap);
                allow_keys(a, ap,
                           {"max_iterations", "theta_grid_deg", "tau_grid_ns", "refine_tol_theta_deg",
                            "refine_tol_tau_ns", "converge_tol"});
                AmlConfig &c = sc.aml;
                c.max_iterations = count_or(a, ap, "max_iterations", c.max_iterations);
                c.theta_grid = deg_to_rad(number_or(a, ap, "theta_grid_deg", rad_to_deg(c.theta_grid)));
                c.tau_grid = 1e-9 * number_or(a, ap, "tau_grid_ns", c.tau_grid * 1e9);
                c.refine_tol_theta = deg_to_rad(number_or(a, ap, "refine_tol_theta_deg", rad_to_deg(c.refine_tol_theta)));
                c.refine_tol_tau = 1e-9 * number_or(a, ap, "refine_tol_tau_ns", c.refine_tol_tau * 1e9);
                c.converge_tol = number_or(a, ap, "converge_tol", c.converge_tol);
            }
            if (j.contains("doa_only"))
            {
                const std::string dp = join_path(path, "doa_only");
                const json &d = j.at("doa_only");
                require_object(d, dp);
                allow_keys(d, dp, {"max_iterations", "theta_grid_deg", "refine_tol_theta_deg"});
                DoaOnlyConfig &c = sc.doa_only;
                c.max_iterations = count_or(d, dp, "max_iterations", c.max_iterations);
                c.theta_grid = deg_to_rad(number_or(d, dp, "theta_grid_deg", rad_to_deg(c.theta_grid)));
                c.refine_tol_theta = deg_to_rad(number_or(d, dp, "refine_tol_theta_deg", rad_to_deg(c.refine_tol_theta)));
            }
        }

        inline void parse_sweep(const json &root, ProblemConfig &cfg)
        {
            if (!root.contains("sweep"))
                return;
            const std::string path = "sweep";
            const json &j = root.at("sweep");
            require_object(j, path);
            allow_keys(j, path, {"variable", "values"});
            const std::string vpath = join_path(path, "variable");
            if (!j.contains("variable") || !j.at("variable").is_string())
                config_fail(vpath, "expected \"snr_db\", \"delta_theta\" or \"delta_tau\"");
            const std::string var = j.at("variable").get<std::string>();
            double scale = 1.0;
            if (var == "snr_db")
                cfg.sweep_variable = SweepVariable::snr_db;
            else if (var == "delta_theta")
            {
                cfg.sweep_variable = SweepVariable::delta_theta;
                scale = deg_to_rad(1.0);
            }
            else if (var == "delta_tau")
            {
                cfg.sweep_variable = SweepVariable::delta_tau;
                scale = 1e-9;
            }
            else
                config_fail(vpath, "expected \"snr_db\", \"delta_theta\" or \"delta_tau\"");
            const std::string valpath = join_path(path, "values");
            if (!j.contains("values") || !j.at("values").is_array() || j.at("values").empty())
                config_fail(valpath, "expected a non-empty array of numbers");
            const json &vals = j.at("values");
            for (std::size_t i = 0; i < vals.size(); ++i)
                cfg.sweep_values.push_back(scale * number_at(vals[i], index_path(valpath, i)));
            if (cfg.sweep_variable != SweepVariable::snr_db && cfg.scenario.paths.size() < 2)
                config_fail(vpath, "separation sweeps need at least two paths");
        }
    }

    inline ProblemConfig parse_config(const nlohmann::json &root)
    {
        using namespace detail;
        require_object(root, "");
        allow_keys(root, "", {"array", "grid", "spectrum", "paths", "noise", "estimator", "sweep", "trials", "seed"});
        if (!root.contains("array"))
            config_fail("array", "missing required key");
        ArrayGeometry geom = parse_array(root.at("array"), "array");
        if (!root.contains("grid"))
            config_fail("grid", "missing required key");
        SubcarrierGrid grid = parse_grid(root.at("grid"), "grid");
        SignalSpectrum spectrum = parse_spectrum(root, grid.size());
        std::vector<PathTemplate> paths = parse_paths(root);
        Scenario sc{std::move(geom), std::move(grid), std::move(spectrum), std::move(paths)};
        sc.noise = parse_noise(root);
        parse_estimator(root, sc);
        sc.aml.n_paths = sc.paths.size();
        sc.doa_only.n_paths = sc.paths.size();
        sc.n_trials = count_or(root, "", "trials", sc.n_trials);
        if (sc.n_trials == 0)
            config_fail("trials", "must be at least 1");
        sc.master_seed = count_or(root, "", "seed", sc.master_seed);
        if (sc.paths.size() > sc.geometry.size())
            config_fail("paths", "has " + std::to_string(sc.paths.size()) + " entries but the array has only " +
                                     std::to_string(sc.geometry.size()) + " sensors");
        at_path("estimator", [&] {
            sc.validate();
            return 0;
        });
        ProblemConfig cfg{std::move(sc), std::nullopt, {}};
        parse_sweep(root, cfg);
        return cfg;
    }

    inline ProblemConfig parse_config_text(const std::string &text)
    {
        nlohmann::json root;
        try
        {
            root = nlohmann::json::parse(text);
        }
        catch (const nlohmann::json::parse_error &e)
        {
            throw config_error(std::string("config: not valid JSON: ") + e.what());
        }
        return parse_config(root);
    }

    inline ProblemConfig load_config(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw io_error("cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse_config_text(ss.str());
    }
}

#endif
