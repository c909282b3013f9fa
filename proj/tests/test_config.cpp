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
#include "doatd/config.hpp"
#include "test_support.hpp"

#include <fstream>

using namespace doatd;
using namespace doatd::testing;
using nlohmann::json;

namespace
{
    json reference_doc()
    {
        return json::parse(R"({
          "array": {"kind": "uca", "M": 16, "radius_lambda": 1.5},
          "grid": {"carrier_hz": 5.32e9, "spacing_hz": 312500, "total_bins": 128,
                   "active_bins": [[6, 62], [65, 121]]},
          "paths": [{"theta_deg": 30, "tau_ns": 50, "beta_abs": 1.0, "random_phase": true},
                    {"theta_deg": 40, "tau_ns": 100, "beta_re": 0.5, "beta_im": -0.2}],
          "noise": {"snr_db": 15},
          "estimator": {"kind": "both", "aml": {"max_iterations": 7, "tau_grid_ns": 2},
                        "doa_only": {"theta_grid_deg": 0.5}},
          "sweep": {"variable": "delta_tau", "values": [5, 10]},
          "trials": 12,
          "seed": 99
        })");
    }

    std::string diagnostic(const json &doc)
    {
        try
        {
            parse_config(doc);
        }
        catch (const config_error &e)
        {
            return e.what();
        }
        return "accepted";
    }
}

TEST_CASE("full configuration is parsed into internal units", "[config]")
{
    const ProblemConfig cfg = parse_config(reference_doc());
    const Scenario &sc = cfg.scenario;
    CHECK(sc.geometry.size() == 16);
    CHECK(sc.grid == wifi_grid());
    CHECK(sc.spectrum.values() == VectorXcd::Ones(114));
    REQUIRE(sc.paths.size() == 2);
    CHECK(sc.paths[0].theta == Catch::Approx(deg_to_rad(30.0)));
    CHECK(sc.paths[1].tau == Catch::Approx(100e-9));
    CHECK(sc.paths[0].random_phase);
    CHECK(sc.paths[1].beta == cd{0.5, -0.2});
    CHECK(sc.estimator == EstimatorKind::both);
    CHECK(sc.aml.max_iterations == 7);
    CHECK(sc.aml.tau_grid == Catch::Approx(2e-9));
    CHECK(sc.aml.n_paths == 2);
    CHECK(sc.doa_only.theta_grid == Catch::Approx(deg_to_rad(0.5)));
    CHECK(sc.doa_only.max_iterations == 20);
    CHECK(sc.n_trials == 12);
    CHECK(sc.master_seed == 99);
    REQUIRE(cfg.sweep_variable);
    CHECK(*cfg.sweep_variable == SweepVariable::delta_tau);
    CHECK(cfg.sweep_values == std::vector<double>{5e-9, 10e-9});
}

TEST_CASE("defaults apply when optional sections are absent", "[config]")
{
    json doc = reference_doc();
    for (const char *k : {"noise", "estimator", "sweep", "trials", "seed"})
        doc.erase(k);
    doc["grid"].erase("active_bins");
    doc["grid"]["total_bins"] = 8;
    const ProblemConfig cfg = parse_config(doc);
    CHECK(cfg.scenario.grid.size() == 8);
    CHECK(cfg.scenario.noise.sigma2_for(synthesize_csi(cfg.scenario.geometry, cfg.scenario.grid,
                                                       cfg.scenario.spectrum, cfg.scenario.nominal_paths())) == 0.0);
    CHECK(cfg.scenario.estimator == EstimatorKind::aml);
    CHECK(cfg.scenario.aml.max_iterations == 10);
    CHECK(cfg.scenario.n_trials == 100);
    CHECK_FALSE(cfg.sweep_variable);
}

TEST_CASE("diagnostics name the offending key path", "[config]")
{
    auto with = [](auto &&edit) {
        json doc = reference_doc();
        edit(doc);
        return diagnostic(doc);
    };
    using Catch::Matchers::ContainsSubstring;
    CHECK_THAT(with([](json &d) { d["colour"] = 1; }), ContainsSubstring("config: colour: unknown key"));
    CHECK_THAT(with([](json &d) { d["paths"][1]["phase"] = 1; }), ContainsSubstring("paths[1].phase: unknown key"));
    CHECK_THAT(with([](json &d) { d["estimator"]["aml"]["tau_step"] = 1; }),
               ContainsSubstring("estimator.aml.tau_step: unknown key"));
    CHECK_THAT(with([](json &d) { d["paths"] = json::array(); }), ContainsSubstring("paths: at least one path"));
    CHECK_THAT(with([](json &d) { d.erase("array"); }), ContainsSubstring("array: missing required key"));
    CHECK_THAT(with([](json &d) { d["array"]["M"] = "sixteen"; }), ContainsSubstring("array.M"));
    CHECK_THAT(with([](json &d) { d["array"]["M"] = -3; }), ContainsSubstring("array.M"));
    CHECK_THAT(with([](json &d) { d["array"]["M"] = 1; }), ContainsSubstring("paths"));
    CHECK_THAT(with([](json &d) { d["grid"]["active_bins"][1] = json::array({65, 1000000000000}); }),
               ContainsSubstring("grid.active_bins[1][1]"));
    CHECK_THAT(with([](json &d) { d["paths"][0]["tau_ns"] = -1; }), ContainsSubstring("paths[0].tau_ns"));
    CHECK_THAT(with([](json &d) { d["paths"][0]["beta_re"] = 1; }), ContainsSubstring("paths[0].beta_abs"));
    CHECK_THAT(with([](json &d) { d["noise"]["sigma2"] = 1; }), ContainsSubstring("noise: give exactly one"));
    CHECK_THAT(with([](json &d) { d["estimator"]["kind"] = "music"; }), ContainsSubstring("estimator.kind"));
    CHECK_THAT(with([](json &d) { d["estimator"]["aml"]["tau_grid_ns"] = 0; }), ContainsSubstring("config: estimator:"));
    CHECK_THAT(with([](json &d) { d["sweep"]["values"] = json::array(); }), ContainsSubstring("sweep.values"));
    CHECK_THAT(with([](json &d) { d["sweep"]["variable"] = "snr"; }), ContainsSubstring("sweep.variable"));
    CHECK_THAT(with([](json &d) { d["trials"] = 0; }), ContainsSubstring("trials: must be at least 1"));
    CHECK_THAT(with([](json &d) { d["spectrum"] = json::array({json::array({1, 0})}); }),
               ContainsSubstring("spectrum: has 1 entries"));
    CHECK_THAT(diagnostic(json::array()), ContainsSubstring("<root>: expected an object"));
    CHECK_THROWS_AS(parse_config_text("{\"array\": "), config_error);
}

TEST_CASE("validation is total under random document mutations", "[config][property]")
{
    // every mutated document is either accepted or rejected with config_error
    const json base = reference_doc();
    std::vector<json::json_pointer> pointers;
    const json flat = base.flatten();
    for (auto it = flat.begin(); it != flat.end(); ++it)
    {
        json::json_pointer p(it.key());
        while (!p.empty())
        {
            pointers.push_back(p);
            p = p.parent_pointer();
        }
    }
    const std::vector<json> replacements{json(), json(-1), json(0), json(1e300), json("x"), json::array(),
                                         json::object(), json(true), json::array({1, 2, 3}), json(-1.5)};
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> pick_p(0, pointers.size() - 1), pick_r(0, replacements.size() - 1);
    std::size_t accepted = 0;
    for (int trial = 0; trial < 2000; ++trial)
    {
        json doc = base;
        for (int edits = 0; edits < 1 + trial % 3; ++edits)
        {
            const auto &p = pointers[pick_p(rng)];
            if (!doc.contains(p))
                continue;
            if (rng() % 4 == 0 && !p.empty())
                doc[p.parent_pointer()].is_object() ? (void)doc[p.parent_pointer()].erase(p.back())
                                                    : (void)(doc[p] = replacements[pick_r(rng)]);
            else
                doc[p] = replacements[pick_r(rng)];
        }
        try
        {
            parse_config(doc);
            ++accepted;
        }
        catch (const config_error &e)
        {
            CHECK(std::string(e.what()).rfind("config: ", 0) == 0);
        }
        catch (const std::exception &e)
        {
            FAIL("unexpected " << e.what() << " for " << doc.dump());
        }
    }
    CHECK(accepted < 2000);
}

TEST_CASE("bundled configs load", "[config]")
{
    for (const char *name : {"fig1_snr.json", "fig2_delta_theta.json", "fig3_delta_tau.json", "two_path_noiseless.json"})
    {
        INFO(name);
        const ProblemConfig cfg = load_config(std::string(DOATD_SOURCE_DIR "/configs/") + name);
        CHECK(cfg.scenario.geometry.size() == 16);
        CHECK(cfg.scenario.grid.size() == 114);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/doatd.json"), io_error);
}
