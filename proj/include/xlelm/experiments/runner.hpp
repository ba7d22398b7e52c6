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

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "xlelm/channel.hpp"
#include "xlelm/data.hpp"
#include "xlelm/elm.hpp"
#include "xlelm/experiments/config.hpp"
#include "xlelm/rng.hpp"

namespace xlelm::experiments
{

inline constexpr const char* kXlMimoElm = "xl-mimo-elm";
inline constexpr const char* kDigitalElm = "digital-elm";

/// One CSV row. Online runs emit one row per (step, iteration); the other
/// kinds emit one row per (grid point, seed, method).
struct TrialResult
{
    std::string experiment;
    std::string method;
    std::uint64_t seed = 0;
    double grid_value = 0.0;
    std::size_t n_r = 0;
    double kappa = 0.0;
    double snr_db = std::numeric_limits<double>::infinity();
    std::optional<double> eta;
    std::optional<std::size_t> step;
    std::optional<std::size_t> iteration;
    double accuracy = 0.0;
    std::optional<double> normalized_accuracy;
    double train_residual = 0.0;
    double receive_power = 0.0;
    double wall_ms = 0.0;

    bool operator==(const TrialResult&) const = default;
};

using ResultTable = std::vector<TrialResult>;

// Stream ids: every random quantity of a trial is drawn from
// RngStream(master_seed, (seed_index << 8) | purpose). Streams do not depend
// on the grid point, so all grid points of one seed share the split, the
// channel draw and the noise sequence.
enum class Purpose : std::uint64_t
{
    prepare = 1,
    split = 2,
    channel = 3,
    noise = 4,
    digital = 5,
    online = 6,
};

inline RngStream trial_stream(std::uint64_t master_seed, std::uint64_t seed_index, Purpose purpose)
{
    return RngStream(master_seed, (seed_index << 8) | std::uint64_t(purpose));
}

/// Reads the configured source once. Seed-dependent steps happen in
/// prepare_dataset.
inline RawTable load_source(const DatasetSpec& spec, std::uint64_t master_seed)
{
    if (spec.source == "csv")
        return load_csv(spec.path, spec.csv);
    if (spec.source == "idx")
        return load_idx(spec.path, spec.labels_path);
    if (spec.source == "secom")
    {
        CsvOptions opt = spec.csv;
        opt.label_column.clear();
        opt.header = false;
        opt.delimiter = ' ';
        if (opt.missing_token == "NA")
            opt.missing_token = "NaN";
        RawTable table = load_csv(spec.path, opt);
        table.labels = load_label_file(spec.labels_path);
        if (std::ptrdiff_t(table.labels.size()) != table.rows())
            throw DataError("secom: " + std::to_string(table.rows()) + " rows but " +
                            std::to_string(table.labels.size()) + " labels");
        return table;
    }
    // Synthetic data is a fixed table per master seed.
    RngStream rng(master_seed, 0);
    return synth_two_gaussians(rng, std::ptrdiff_t(spec.synth_rows), std::ptrdiff_t(spec.synth_dim),
                               spec.synth_separation);
}

/// Per-seed subsample, transform, split and standardization.
inline Dataset prepare_dataset(const RawTable& source, const DatasetSpec& spec, std::uint64_t master_seed,
                               std::uint64_t seed_index)
{
    RngStream prep = trial_stream(master_seed, seed_index, Purpose::prepare);
    const RawTable* table = &source;
    RawTable work;
    if (spec.subsample && *spec.subsample < std::size_t(source.rows()))
    {
        work = subsample_rows(source, *spec.subsample, prep);
        table = &work;
    }
    if (spec.transform == "mnist-parity")
    {
        work = mnist_binarize(*table, spec.n_features ? spec.n_features : 100, prep);
        table = &work;
    }
    else if (spec.transform == "secom")
    {
        work = secom_prepare(*table, spec.n_features ? spec.n_features : 20, prep);
        table = &work;
    }
    RngStream split = trial_stream(master_seed, seed_index, Purpose::split);
    return split_standardize(*table, {spec.train_ratio, spec.positive_label, false}, split);
}

namespace detail
{

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point since)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Runs task(i) for i in [0, n) on `threads` workers. Results are placed by
// index, so output order never depends on scheduling.
template <class Result>
std::vector<Result> parallel_map(std::size_t n, std::size_t threads, const std::function<Result(std::size_t)>& task)
{
    std::vector<Result> out(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++)
        {
            try
            {
                out[i] = task(i);
            }
            catch (...)
            {
                std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = n;
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
    if (workers == 1)
        worker();
    else
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);
    return out;
}

struct Operating
{
    std::size_t n_r;
    double kappa;
    double snr_db;
};

inline Operating operating_point(const ExperimentConfig& cfg, double grid_value)
{
    Operating op{cfg.resolved_n_r(), cfg.kappa, cfg.snr_db};
    switch (cfg.kind)
    {
    case ExperimentKind::sweep_nr:
    case ExperimentKind::single:
        op.n_r = std::size_t(grid_value);
        break;
    case ExperimentKind::sweep_snr:
        op.snr_db = grid_value;
        break;
    case ExperimentKind::sweep_kappa:
        op.kappa = grid_value;
        break;
    case ExperimentKind::online:
        break;
    }
    return op;
}

inline ChannelMatrix draw_channel(const ExperimentConfig& cfg, const Operating& op, std::ptrdiff_t n_t,
                                  std::uint64_t seed_index)
{
    RngStream rng = trial_stream(cfg.master_seed, seed_index, Purpose::channel);
    RiceanConfig rc{op.kappa, cfg.pathloss, std::ptrdiff_t(op.n_r), n_t, cfg.los_angle_tx, cfg.los_angle_rx};
    return sample_ricean(rc, rng);
}

inline NoiseModel calibrated_noise(const ChannelMatrix& h, const Dataset& ds, double snr_db)
{
    if (std::isinf(snr_db) && snr_db > 0)
        return NoiseModel::noiseless();
    return NoiseModel::awgn(sigma2_for_snr(h.real(), augment_rows(ds.x_train), snr_db));
}

inline TrialResult base_row(const ExperimentConfig& cfg, const char* method, std::uint64_t seed, double grid_value,
                            const Operating& op)
{
    TrialResult r;
    r.experiment = to_string(cfg.kind);
    r.method = method;
    r.seed = seed;
    r.grid_value = grid_value;
    r.n_r = op.n_r;
    r.kappa = op.kappa;
    r.snr_db = op.snr_db;
    return r;
}

// Fit-and-evaluate trial shared by the sweep kinds and `single`.
inline ResultTable static_trial(const ExperimentConfig& cfg, const RawTable& source, double grid_value,
                                std::uint64_t seed)
{
    const Operating op = operating_point(cfg, grid_value);
    const Dataset ds = prepare_dataset(source, cfg.dataset, cfg.master_seed, seed);
    ResultTable rows;

    {
        const auto start = Clock::now();
        const ChannelMatrix h = draw_channel(cfg, op, ds.dim() + 1, seed);
        RngStream noise_rng = trial_stream(cfg.master_seed, seed, Purpose::noise);
        const HiddenLayer layer = channel_hidden_layer(h, cfg.rapp, calibrated_noise(h, ds, op.snr_db));
        const ElmModel model = fit(layer, ds.x_train, ds.t_train, noise_rng, cfg.pinv_rel_tol);
        TrialResult r = base_row(cfg, kXlMimoElm, seed, grid_value, op);
        r.accuracy = evaluate_accuracy(model, ds.x_test, ds.t_test, noise_rng);
        r.train_residual = model.train_residual();
        r.receive_power = model.receive_power();
        r.wall_ms = elapsed_ms(start);
        rows.push_back(r);
    }

    if (cfg.baseline)
    {
        const auto start = Clock::now();
        RngStream rng = trial_stream(cfg.master_seed, seed, Purpose::digital);
        const HiddenLayer layer = digital_elm_hidden(rng, std::ptrdiff_t(op.n_r), ds.dim());
        const ElmModel model = fit(layer, ds.x_train, ds.t_train, rng, cfg.pinv_rel_tol);
        TrialResult r = base_row(cfg, kDigitalElm, seed, grid_value, op);
        r.accuracy = evaluate_accuracy(model, ds.x_test, ds.t_test, rng);
        r.train_residual = model.train_residual();
        r.receive_power = model.receive_power();
        r.wall_ms = elapsed_ms(start);
        rows.push_back(r);
    }
    return rows;
}

// Time-varying channel trial: fit on H(0), then for every step evolve the
// channel, log the stale model, and re-train with mini-batch updates. Each
// row carries accuracy normalized by the full-data LS fit under the same H(k).
inline ResultTable online_trial(const ExperimentConfig& cfg, const RawTable& source, double eta, std::uint64_t seed)
{
    const Operating op = operating_point(cfg, eta);
    const Dataset ds = prepare_dataset(source, cfg.dataset, cfg.master_seed, seed);
    RngStream noise_rng = trial_stream(cfg.master_seed, seed, Purpose::noise);
    RngStream online_rng = trial_stream(cfg.master_seed, seed, Purpose::online);

    ChannelMatrix h = draw_channel(cfg, op, ds.dim() + 1, seed);
    const NoiseModel noise = calibrated_noise(h, ds, op.snr_db);
    auto start = Clock::now();
    ElmModel model = fit(channel_hidden_layer(h, cfg.rapp, noise), ds.x_train, ds.t_train, noise_rng,
                         cfg.pinv_rel_tol);

    ResultTable rows;
    auto emit = [&](std::size_t step, std::size_t iteration, const ElmModel& m, double reference) {
        const double ms = elapsed_ms(start);
        TrialResult r = base_row(cfg, kXlMimoElm, seed, eta, op);
        r.eta = eta;
        r.step = step;
        r.iteration = iteration;
        r.accuracy = evaluate_accuracy(m, ds.x_test, ds.t_test, noise_rng);
        if (reference > 0.0)
            r.normalized_accuracy = r.accuracy / reference;
        r.train_residual = m.train_residual();
        r.receive_power = m.receive_power();
        r.wall_ms = ms;
        rows.push_back(r);
    };
    const double initial = evaluate_accuracy(model, ds.x_test, ds.t_test, noise_rng);
    emit(0, 0, model, initial);

    OnlineConfig ocfg{cfg.gamma, cfg.batch_size, cfg.iterations, cfg.early_stop_tol, cfg.pinv_rel_tol};
    for (std::size_t step = 1; step <= cfg.steps; ++step)
    {
        h = evolve_ar(h, ArConfig{eta}, online_rng);
        const HiddenLayer layer = channel_hidden_layer(h, cfg.rapp, noise);
        const ElmModel full = fit(layer, ds.x_train, ds.t_train, noise_rng, cfg.pinv_rel_tol);
        const double reference = evaluate_accuracy(full, ds.x_test, ds.t_test, noise_rng);

        start = Clock::now();
        const ElmModel stale(layer, model.weights(), (hidden_matrix(layer, ds.x_train, noise_rng) *
                                                          model.weights() -
                                                      ds.t_train)
                                                         .norm());
        emit(step, 0, stale, reference);
        start = Clock::now();
        model = online_update(model, h.real(), ds.x_train, ds.t_train, ocfg, online_rng,
                              [&](std::size_t iter, const ElmModel& m) {
                                  emit(step, iter, m, reference);
                                  start = Clock::now();
                              });
    }
    return rows;
}

} // namespace detail

inline ResultTable run_grid(const ExperimentConfig& cfg, const RawTable& source)
{
    const auto grid = cfg.effective_grid();
    const std::size_t n = grid.size() * cfg.seeds;
    auto per_task = detail::parallel_map<ResultTable>(n, cfg.threads, [&](std::size_t i) {
        const double g = grid[i / cfg.seeds];
        const std::uint64_t seed = i % cfg.seeds;
        return cfg.kind == ExperimentKind::online ? detail::online_trial(cfg, source, g, seed)
                                                  : detail::static_trial(cfg, source, g, seed);
    });
    ResultTable out;
    for (auto& rows : per_task)
        out.insert(out.end(), std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.end()));
    return out;
}

/// Accuracy per (N_r, seed) for the XL-MIMO-ELM and, when enabled, the
/// digital ELM with N_r hidden nodes.
inline ResultTable run_sweep_nr(const ExperimentConfig& cfg, const RawTable& source)
{
    ExperimentConfig c = cfg;
    c.kind = ExperimentKind::sweep_nr;
    c.validate();
    return run_grid(c, source);
}

/// Accuracy per (SNR, seed); a noise-free +inf column is always included.
inline ResultTable run_sweep_snr(const ExperimentConfig& cfg, const RawTable& source)
{
    ExperimentConfig c = cfg;
    c.kind = ExperimentKind::sweep_snr;
    c.validate();
    return run_grid(c, source);
}

inline ResultTable run_sweep_kappa(const ExperimentConfig& cfg, const RawTable& source)
{
    ExperimentConfig c = cfg;
    c.kind = ExperimentKind::sweep_kappa;
    c.validate();
    return run_grid(c, source);
}

inline ResultTable run_online(const ExperimentConfig& cfg, const RawTable& source)
{
    ExperimentConfig c = cfg;
    c.kind = ExperimentKind::online;
    c.validate();
    return run_grid(c, source);
}

inline ResultTable run_single(const ExperimentConfig& cfg, const RawTable& source)
{
    ExperimentConfig c = cfg;
    c.kind = ExperimentKind::single;
    c.validate();
    return run_grid(c, source);
}

inline ResultTable run_experiment(const ExperimentConfig& cfg, const RawTable& source)
{
    switch (cfg.kind)
    {
    case ExperimentKind::sweep_nr:
        return run_sweep_nr(cfg, source);
    case ExperimentKind::sweep_snr:
        return run_sweep_snr(cfg, source);
    case ExperimentKind::sweep_kappa:
        return run_sweep_kappa(cfg, source);
    case ExperimentKind::online:
        return run_online(cfg, source);
    case ExperimentKind::single:
        return run_single(cfg, source);
    }
    return {};
}

/// Aggregate over seeds for one (method, grid point[, step, iteration]).
struct SummaryRow
{
    std::string experiment;
    std::string method;
    double grid_value = 0.0;
    std::optional<std::size_t> step;
    std::optional<std::size_t> iteration;
    std::size_t trials = 0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
    double min_accuracy = 0.0;
    double max_accuracy = 0.0;
    std::optional<double> mean_normalized_accuracy;
    double mean_receive_power = 0.0;
    double mean_wall_ms = 0.0;
};

/// Groups rows in order of first appearance. std is the population standard
/// deviation.
inline std::vector<SummaryRow> summarize(const ResultTable& results)
{
    if (results.empty())
        throw InputError("summarize: no results");
    std::vector<SummaryRow> out;
    std::vector<std::vector<const TrialResult*>> members;
    for (const auto& r : results)
    {
        auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) {
            return s.experiment == r.experiment && s.method == r.method && s.grid_value == r.grid_value &&
                   s.step == r.step && s.iteration == r.iteration;
        });
        if (it == out.end())
        {
            SummaryRow s;
            s.experiment = r.experiment;
            s.method = r.method;
            s.grid_value = r.grid_value;
            s.step = r.step;
            s.iteration = r.iteration;
            out.push_back(s);
            members.emplace_back();
            it = out.end() - 1;
        }
        members[std::size_t(it - out.begin())].push_back(&r);
    }
    for (std::size_t g = 0; g < out.size(); ++g)
    {
        auto& s = out[g];
        const auto& rows = members[g];
        const double n = double(rows.size());
        s.trials = rows.size();
        s.min_accuracy = std::numeric_limits<double>::infinity();
        s.max_accuracy = -std::numeric_limits<double>::infinity();
        double sum = 0, power = 0, wall = 0, norm_sum = 0;
        std::size_t norm_n = 0;
        for (const auto* r : rows)
        {
            sum += r->accuracy;
            power += r->receive_power;
            wall += r->wall_ms;
            s.min_accuracy = std::min(s.min_accuracy, r->accuracy);
            s.max_accuracy = std::max(s.max_accuracy, r->accuracy);
            if (r->normalized_accuracy)
            {
                norm_sum += *r->normalized_accuracy;
                ++norm_n;
            }
        }
        s.mean_accuracy = sum / n;
        double var = 0;
        for (const auto* r : rows)
            var += (r->accuracy - s.mean_accuracy) * (r->accuracy - s.mean_accuracy);
        s.std_accuracy = std::sqrt(var / n);
        s.mean_receive_power = power / n;
        s.mean_wall_ms = wall / n;
        if (norm_n > 0)
            s.mean_normalized_accuracy = norm_sum / double(norm_n);
    }
    return out;
}

} // namespace xlelm::experiments
