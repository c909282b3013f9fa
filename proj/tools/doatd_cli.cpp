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

#include "doatd/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv)
{
    using namespace doatd::cli;

    CLI::App app{"Joint DOA / time-delay estimation from frequency-domain array CSI"};
    app.require_subcommand(1);

    CommandOptions opt;
    std::uint64_t trials = 0, seed = 0;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("--config", opt.config_path, "JSON configuration file")->required();
        sub->add_option("--seed", seed, "Override the configured master seed");
    };

    auto *simulate = app.add_subcommand("simulate", "Synthesise one CSI realisation to a CSV file");
    add_common(simulate);
    simulate->add_option("--out", opt.out_path, "Output CSI file")->required();

    auto *estimate = app.add_subcommand(
        "estimate", "Estimate paths from a CSI file; prints JSON. Delays are identifiable modulo 1/spacing_hz.");
    add_common(estimate);
    estimate->add_option("--csi,csi", opt.csi_path, "Input CSI file")->required();

    auto *crb = app.add_subcommand("crb", "Print joint and DOA-only Cramer-Rao bounds as JSON");
    add_common(crb);

    auto *sweep = app.add_subcommand("sweep", "Run a Monte Carlo sweep and write the RMSE/CRB table as CSV");
    add_common(sweep);
    sweep->add_option("--out", opt.out_path, "Output CSV file")->required();
    sweep->add_option("--trials", trials, "Override the configured trial count");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return exit_config;
    }

    for (auto *sub : {simulate, estimate, crb, sweep})
        if (sub->count("--seed"))
            opt.seed = seed;
    if (sweep->count("--trials"))
        opt.trials = trials;

    if (*simulate)
        return cmd_simulate(opt, std::cerr);
    if (*estimate)
        return cmd_estimate(opt, std::cout, std::cerr);
    if (*crb)
        return cmd_crb(opt, std::cout, std::cerr);
    return cmd_sweep(opt, std::cerr);
}
