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

// Experiment configuration and its INI-style text format.
//
//   # comment
//   [section]
//   key = value
//   list_key = 1, 2, 3
//
// Sections and keys are fixed (see kSchema below); anything else is an error
// that names the offending line.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "xlelm/activation.hpp"
#include "xlelm/data.hpp"
#include "xlelm/errors.hpp"
#include "xlelm/numkernel.hpp"

namespace xlelm::experiments
{

enum class ExperimentKind
{
    sweep_nr,
    sweep_snr,
    sweep_kappa,
    online,
    single,
};

inline std::string to_string(ExperimentKind kind)
{
    switch (kind)
    {
    case ExperimentKind::sweep_nr:
        return "sweep-nr";
    case ExperimentKind::sweep_snr:
        return "sweep-snr";
    case ExperimentKind::sweep_kappa:
        return "sweep-kappa";
    case ExperimentKind::online:
        return "online";
    case ExperimentKind::single:
        return "single";
    }
    return "?";
}

inline ExperimentKind parse_kind(const std::string& s)
{
    for (auto k : {ExperimentKind::sweep_nr, ExperimentKind::sweep_snr, ExperimentKind::sweep_kappa,
                   ExperimentKind::online, ExperimentKind::single})
        if (to_string(k) == s)
            return k;
    throw ConfigError("unknown experiment kind '" + s + "'");
}

/// Where the rows come from and how they are turned into a Dataset.
struct DatasetSpec
{
    /// csv | idx | secom | synthetic
    std::string source = "synthetic";
    std::filesystem::path path;
    /// IDX label file, or the SECOM label file.
    std::filesystem::path labels_path;
    CsvOptions csv;
    std::optional<int> positive_label;
    /// none | mnist-parity | secom
    std::string transform = "none";
    /// Features kept by the transform; 0 picks 100 for mnist-parity, 20 for
    /// secom.
    std::size_t n_features = 0;
    /// Optional row subsample applied before the split (per seed).
    std::optional<std::size_t> subsample;
    double train_ratio = 0.8;
    std::size_t synth_rows = 400;
    std::size_t synth_dim = 2;
    double synth_separation = 4.0;
};

struct ExperimentConfig
{
    ExperimentKind kind = ExperimentKind::single;
    /// Set when the config file names its kind explicitly.
    bool kind_declared = false;
    std::uint64_t master_seed = 1;
    std::size_t seeds = 300;
    std::size_t threads = 1;
    bool baseline = false;

    DatasetSpec dataset;

    double kappa = 0.0;
    double pathloss = 1.0;
    double los_angle_tx = 0.0;
    double los_angle_rx = 0.0;
    /// Receive antennas for kinds that do not sweep N_r. Defaults to 1024 for
    /// online runs and 256 otherwise.
    std::optional<std::size_t> n_r;
    double snr_db = std::numeric_limits<double>::infinity();

    RappParams rapp;
    double pinv_rel_tol = kDefaultPinvTolerance;

    /// N_r, SNR (dB) or kappa values for the sweep kinds.
    std::vector<double> grid;

    std::vector<double> etas = {0.9};
    double gamma = 0.5;
    std::size_t batch_size = 32;
    std::size_t steps = 5;
    std::size_t iterations = 20;
    std::optional<double> early_stop_tol;

    std::filesystem::path out = "results.csv";
    /// Files read by this configuration; filled by load_config.
    std::vector<std::filesystem::path> inputs;

    std::size_t resolved_n_r() const { return n_r.value_or(kind == ExperimentKind::online ? 1024 : 256); }

    /// Grid actually iterated: explicit sweep values, the eta list for online
    /// runs, or the single N_r.
    std::vector<double> effective_grid() const
    {
        switch (kind)
        {
        case ExperimentKind::online:
            return etas;
        case ExperimentKind::single:
            return {double(resolved_n_r())};
        case ExperimentKind::sweep_snr: {
            auto g = grid;
            if (std::find(g.begin(), g.end(), std::numeric_limits<double>::infinity()) == g.end())
                g.push_back(std::numeric_limits<double>::infinity());
            return g;
        }
        default:
            return grid;
        }
    }

    std::vector<std::filesystem::path> dataset_files() const
    {
        std::vector<std::filesystem::path> files;
        if (dataset.source != "synthetic")
        {
            files.push_back(dataset.path);
            if (!dataset.labels_path.empty())
                files.push_back(dataset.labels_path);
        }
        return files;
    }

    void validate() const
    {
        if (seeds < 1)
            throw ConfigError("experiment.seeds must be >= 1");
        if (threads < 1)
            throw ConfigError("experiment.threads must be >= 1");
        rapp.validate();
        if (!(kappa >= 0.0))
            throw ConfigError("channel.kappa must be >= 0");
        if (!(pathloss > 0.0))
            throw ConfigError("channel.pathloss must be > 0");
        if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
            throw ConfigError("channel.snr_db must be a number or inf");
        if (!(pinv_rel_tol > 0.0 && pinv_rel_tol < 1.0))
            throw ConfigError("solver.rel_tol must lie in (0, 1)");
        if (!(dataset.train_ratio > 0.0 && dataset.train_ratio < 1.0))
            throw ConfigError("dataset.train_ratio must lie in (0, 1)");
        if (resolved_n_r() < 1)
            throw ConfigError("channel.n_r must be >= 1");

        const std::set<std::string> sources = {"csv", "idx", "secom", "synthetic"};
        if (!sources.count(dataset.source))
            throw ConfigError("dataset.source must be one of csv, idx, secom, synthetic");
        const std::set<std::string> transforms = {"none", "mnist-parity", "secom"};
        if (!transforms.count(dataset.transform))
            throw ConfigError("dataset.transform must be one of none, mnist-parity, secom");
        if (dataset.source == "synthetic" && (dataset.synth_rows < 2 || dataset.synth_dim < 1))
            throw ConfigError("dataset.synth_rows must be >= 2 and dataset.synth_dim >= 1");
        if ((dataset.source == "idx" || dataset.source == "secom") && dataset.labels_path.empty())
            throw ConfigError("dataset.labels_path is required for source " + dataset.source);
        for (const auto& f : dataset_files())
            if (!std::filesystem::exists(f))
                throw ConfigError("dataset file '" + f.string() + "' does not exist");

        switch (kind)
        {
        case ExperimentKind::sweep_nr:
            for (double v : grid)
                if (!(v >= 1.0) || std::floor(v) != v)
                    throw ConfigError("sweep.values: N_r values must be positive integers");
            break;
        case ExperimentKind::sweep_kappa:
            for (double v : grid)
                if (!(v >= 0.0))
                    throw ConfigError("sweep.values: kappa values must be >= 0");
            break;
        case ExperimentKind::sweep_snr:
            for (double v : grid)
                if (std::isnan(v) || v == -std::numeric_limits<double>::infinity())
                    throw ConfigError("sweep.values: SNR values must be numbers or inf");
            break;
        case ExperimentKind::online:
            if (etas.empty())
                throw ConfigError("online.eta must list at least one value");
            for (double e : etas)
                if (!(e > 0.0 && e <= 1.0))
                    throw ConfigError("online.eta values must lie in (0, 1]");
            if (!(gamma > 0.0 && gamma < 1.0))
                throw ConfigError("online.gamma must lie in (0, 1)");
            if (batch_size < 1 || steps < 1)
                throw ConfigError("online.batch_size and online.steps must be >= 1");
            break;
        case ExperimentKind::single:
            break;
        }
        if (kind != ExperimentKind::online && kind != ExperimentKind::single && grid.empty())
            throw ConfigError("sweep.values must list at least one grid point for " + to_string(kind));
    }
};

namespace detail
{

inline const std::map<std::string, std::set<std::string>>& schema()
{
    static const std::map<std::string, std::set<std::string>> s = {
        {"experiment", {"kind", "master_seed", "seeds", "threads", "baseline", "out"}},
        {"dataset",
         {"source", "path", "labels_path", "label_column", "delimiter", "header", "missing_token", "label_map",
          "drop_columns", "positive_label", "transform", "n_features", "subsample", "train_ratio", "synth_rows",
          "synth_dim", "synth_separation"}},
        {"channel", {"kappa", "pathloss", "los_angle_tx", "los_angle_rx", "n_r", "snr_db"}},
        {"activation", {"y_sat", "alpha"}},
        {"solver", {"rel_tol"}},
        {"sweep", {"values"}},
        {"online", {"eta", "gamma", "batch_size", "steps", "iterations", "early_stop"}},
    };
    return s;
}

inline std::string strip(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry
{
    std::string value;
    int line;
};

inline double parse_real(const Entry& e, const std::string& key)
{
    const std::string v = strip(e.value);
    if (v == "inf" || v == "+inf")
        return std::numeric_limits<double>::infinity();
    if (v == "-inf")
        return -std::numeric_limits<double>::infinity();
    if (const auto d = xlelm::detail::parse_double(v))
        return *d;
    throw ConfigError("line " + std::to_string(e.line) + ": '" + key + "' expects a number, got '" + v + "'");
}

inline std::uint64_t parse_count(const Entry& e, const std::string& key)
{
    const std::string v = strip(e.value);
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("line " + std::to_string(e.line) + ": '" + key + "' expects a non-negative integer, got '" +
                          v + "'");
    return out;
}

inline bool parse_bool(const Entry& e, const std::string& key)
{
    const std::string v = strip(e.value);
    if (v == "true" || v == "yes" || v == "on" || v == "1")
        return true;
    if (v == "false" || v == "no" || v == "off" || v == "0")
        return false;
    throw ConfigError("line " + std::to_string(e.line) + ": '" + key + "' expects true or false, got '" + v + "'");
}

inline std::vector<double> parse_list(const Entry& e, const std::string& key)
{
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_real({item, e.line}, key));
    return out;
}

} // namespace detail

/// Parses configuration text. Relative dataset paths are resolved against
/// base_dir.
inline ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {})
{
    using detail::Entry;
    std::map<std::string, std::map<std::string, Entry>> ini;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw))
    {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        line = detail::strip(line);
        if (line.empty())
            continue;
        if (line.front() == '[')
        {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            section = detail::strip(line.substr(1, line.size() - 2));
            if (!detail::schema().count(section))
                throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": key outside of a section");
        const std::string key = detail::strip(line.substr(0, eq));
        if (!detail::schema().at(section).count(key))
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "' in [" + section + "]");
        if (ini[section].count(key))
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        ini[section][key] = Entry{detail::strip(line.substr(eq + 1)), line_no};
    }

    ExperimentConfig cfg;
    auto get = [&](const std::string& sec, const std::string& key) -> const Entry* {
        const auto s = ini.find(sec);
        if (s == ini.end())
            return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    };
    auto path_of = [&](const Entry& e) {
        std::filesystem::path p = e.value;
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };

    if (auto e = get("experiment", "kind"))
    {
        cfg.kind = parse_kind(e->value);
        cfg.kind_declared = true;
    }
    if (auto e = get("experiment", "master_seed"))
        cfg.master_seed = detail::parse_count(*e, "master_seed");
    if (auto e = get("experiment", "seeds"))
        cfg.seeds = detail::parse_count(*e, "seeds");
    if (auto e = get("experiment", "threads"))
        cfg.threads = detail::parse_count(*e, "threads");
    if (auto e = get("experiment", "baseline"))
        cfg.baseline = detail::parse_bool(*e, "baseline");
    if (auto e = get("experiment", "out"))
        cfg.out = path_of(*e);

    auto& ds = cfg.dataset;
    if (auto e = get("dataset", "source"))
        ds.source = e->value;
    if (auto e = get("dataset", "path"))
        ds.path = path_of(*e);
    if (auto e = get("dataset", "labels_path"))
        ds.labels_path = path_of(*e);
    if (auto e = get("dataset", "label_column"))
        ds.csv.label_column = e->value;
    if (auto e = get("dataset", "delimiter"))
    {
        const std::string v = e->value;
        if (v == "tab" || v == "\\t")
            ds.csv.delimiter = '\t';
        else if (v == "space")
            ds.csv.delimiter = ' ';
        else if (v.size() == 1)
            ds.csv.delimiter = v[0];
        else
            throw ConfigError("line " + std::to_string(e->line) + ": delimiter must be one character, tab or space");
    }
    if (auto e = get("dataset", "header"))
        ds.csv.header = detail::parse_bool(*e, "header");
    if (auto e = get("dataset", "missing_token"))
        ds.csv.missing_token = e->value;
    if (auto e = get("dataset", "label_map"))
    {
        // label_map = M:0, B:1
        std::stringstream ss(e->value);
        std::string item;
        while (std::getline(ss, item, ','))
        {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                throw ConfigError("line " + std::to_string(e->line) + ": label_map items look like name:value");
            const auto value = detail::parse_real({item.substr(colon + 1), e->line}, "label_map");
            ds.csv.label_map[detail::strip(item.substr(0, colon))] = int(value);
        }
    }
    if (auto e = get("dataset", "drop_columns"))
    {
        std::stringstream ss(e->value);
        std::string item;
        while (std::getline(ss, item, ','))
            if (const auto name = detail::strip(item); !name.empty())
                ds.csv.drop_columns.push_back(name);
    }
    if (auto e = get("dataset", "positive_label"))
        ds.positive_label = int(detail::parse_real(*e, "positive_label"));
    if (auto e = get("dataset", "transform"))
        ds.transform = e->value;
    if (auto e = get("dataset", "n_features"))
        ds.n_features = detail::parse_count(*e, "n_features");
    if (auto e = get("dataset", "subsample"))
        ds.subsample = detail::parse_count(*e, "subsample");
    if (auto e = get("dataset", "train_ratio"))
        ds.train_ratio = detail::parse_real(*e, "train_ratio");
    if (auto e = get("dataset", "synth_rows"))
        ds.synth_rows = detail::parse_count(*e, "synth_rows");
    if (auto e = get("dataset", "synth_dim"))
        ds.synth_dim = detail::parse_count(*e, "synth_dim");
    if (auto e = get("dataset", "synth_separation"))
        ds.synth_separation = detail::parse_real(*e, "synth_separation");

    if (auto e = get("channel", "kappa"))
        cfg.kappa = detail::parse_real(*e, "kappa");
    if (auto e = get("channel", "pathloss"))
        cfg.pathloss = detail::parse_real(*e, "pathloss");
    if (auto e = get("channel", "los_angle_tx"))
        cfg.los_angle_tx = detail::parse_real(*e, "los_angle_tx");
    if (auto e = get("channel", "los_angle_rx"))
        cfg.los_angle_rx = detail::parse_real(*e, "los_angle_rx");
    if (auto e = get("channel", "n_r"))
        cfg.n_r = detail::parse_count(*e, "n_r");
    if (auto e = get("channel", "snr_db"))
        cfg.snr_db = detail::parse_real(*e, "snr_db");

    if (auto e = get("activation", "y_sat"))
        cfg.rapp.y_sat = detail::parse_real(*e, "y_sat");
    if (auto e = get("activation", "alpha"))
        cfg.rapp.alpha = int(detail::parse_count(*e, "alpha"));
    if (auto e = get("solver", "rel_tol"))
        cfg.pinv_rel_tol = detail::parse_real(*e, "rel_tol");

    if (auto e = get("sweep", "values"))
        cfg.grid = detail::parse_list(*e, "values");

    if (auto e = get("online", "eta"))
        cfg.etas = detail::parse_list(*e, "eta");
    if (auto e = get("online", "gamma"))
        cfg.gamma = detail::parse_real(*e, "gamma");
    if (auto e = get("online", "batch_size"))
        cfg.batch_size = detail::parse_count(*e, "batch_size");
    if (auto e = get("online", "steps"))
        cfg.steps = detail::parse_count(*e, "steps");
    if (auto e = get("online", "iterations"))
        cfg.iterations = detail::parse_count(*e, "iterations");
    if (auto e = get("online", "early_stop"))
        cfg.early_stop_tol = detail::parse_real(*e, "early_stop");

    cfg.inputs = cfg.dataset_files();
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

} // namespace xlelm::experiments
