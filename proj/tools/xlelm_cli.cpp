// SPDX-License-Identifier: Apache-2.0
//
// xlelm: extreme learning machines realized through XL-MIMO fading channels
// Copyright (C) 2026 The xlelm authors
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

// Experiment driver.
//
//   xlelm <sweep-nr|sweep-snr|sweep-kappa|online|single> --config FILE
//         [--seed U64] [--seeds N] [--out PATH] [--baseline] [--threads N]
//         [--only-seed I] [--timing]
//
// Writes the per-trial CSV to --out, a per-grid-point summary next to it and
// a JSON manifest. Exit codes: 0 success, 1 configuration error, 2 data or
// I/O error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "xlelm/experiments/config.hpp"
#include "xlelm/experiments/report.hpp"
#include "xlelm/experiments/runner.hpp"

namespace xe = xlelm::experiments;

namespace
{

struct Options
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> seeds;
    std::optional<std::string> out;
    bool baseline = false;
    std::optional<std::size_t> threads;
    std::optional<std::uint64_t> only_seed;
    bool timing = false;
};

void add_common(CLI::App* sub, Options& o)
{
    sub->add_option("--config", o.config, "experiment configuration file")->required();
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--seeds", o.seeds, "number of seeds (trials per grid point)");
    sub->add_option("--out", o.out, "results CSV path");
    sub->add_flag("--baseline", o.baseline, "also run the digital ELM baseline");
    sub->add_option("--threads", o.threads, "worker threads");
    sub->add_option("--only-seed", o.only_seed, "run a single seed index in isolation");
    sub->add_flag("--timing", o.timing, "fill the wall_ms columns (output is then not reproducible)");
}

int run(xe::ExperimentKind kind, const Options& o)
{
    xe::ExperimentConfig cfg = xe::load_config(o.config);
    if (cfg.kind_declared && cfg.kind != kind)
        throw xlelm::ConfigError("config declares kind '" + xe::to_string(cfg.kind) + "' but subcommand is '" +
                                 xe::to_string(kind) + "'");
    cfg.kind = kind;
    if (o.seed)
        cfg.master_seed = *o.seed;
    if (o.seeds)
        cfg.seeds = *o.seeds;
    if (o.out)
        cfg.out = *o.out;
    if (o.baseline)
        cfg.baseline = true;
    if (o.threads)
        cfg.threads = *o.threads;
    cfg.validate();

    const xlelm::RawTable source = xe::load_source(cfg.dataset, cfg.master_seed);
    xe::ResultTable results;
    if (o.only_seed)
    {
        if (*o.only_seed >= cfg.seeds)
            throw xlelm::ConfigError("--only-seed must be below --seeds");
        for (double g : cfg.effective_grid())
        {
            auto rows = kind == xe::ExperimentKind::online ? xe::detail::online_trial(cfg, source, g, *o.only_seed)
                                                           : xe::detail::static_trial(cfg, source, g, *o.only_seed);
            results.insert(results.end(), rows.begin(), rows.end());
        }
    }
    else
        results = xe::run_experiment(cfg, source);

    const auto summary_path = xe::summary_path_for(cfg.out);
    const auto summary = xe::summarize(results);
    xe::emit_csv(results, cfg.out, o.timing);
    xe::emit_summary_csv(summary, summary_path, o.timing);
    xe::emit_manifest(xe::make_manifest(cfg, cfg.out, summary_path), xe::manifest_path_for(cfg.out));

    for (const auto& s : summary)
    {
        if (s.iteration && *s.iteration != 0)
            continue;
        std::cout << s.method << " grid=" << xe::format_real(s.grid_value);
        if (s.step)
            std::cout << " step=" << *s.step;
        std::cout << " trials=" << s.trials << " mean_acc=" << xe::format_real(s.mean_accuracy)
                  << " std=" << xe::format_real(s.std_accuracy);
        if (s.mean_normalized_accuracy)
            std::cout << " norm_acc=" << xe::format_real(*s.mean_normalized_accuracy);
        std::cout << '\n';
    }
    std::cout << "wrote " << cfg.out.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"XL-MIMO extreme learning machine experiments"};
    app.require_subcommand(1);
    Options opts;
    const std::pair<const char*, xe::ExperimentKind> kinds[] = {
        {"sweep-nr", xe::ExperimentKind::sweep_nr},   {"sweep-snr", xe::ExperimentKind::sweep_snr},
        {"sweep-kappa", xe::ExperimentKind::sweep_kappa}, {"online", xe::ExperimentKind::online},
        {"single", xe::ExperimentKind::single},
    };
    std::vector<std::pair<CLI::App*, xe::ExperimentKind>> subs;
    for (const auto& [name, kind] : kinds)
    {
        auto* sub = app.add_subcommand(name, "run the " + std::string(name) + " experiment");
        add_common(sub, opts);
        subs.emplace_back(sub, kind);
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return 1;
    }

    try
    {
        for (const auto& [sub, kind] : subs)
            if (sub->parsed())
                return run(kind, opts);
    }
    catch (const xlelm::ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    catch (const xlelm::Error& e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::filesystem::filesystem_error& e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
