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

// CSV emission and the run manifest.
//
// Result CSV columns (fixed order, one header line, '\n' line endings):
//   experiment,method,seed,grid_value,n_r,kappa,snr_db,eta,step,iteration,
//   accuracy,normalized_accuracy,train_residual,receive_power,wall_ms
// Reals use the shortest decimal form that round-trips; infinities are
// written as inf. Columns that do not apply to a row are left empty. wall_ms
// is only filled when timing output is requested, so the file is otherwise a
// pure function of the configuration and master seed.

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "xlelm/data.hpp"
#include "xlelm/errors.hpp"
#include "xlelm/experiments/config.hpp"
#include "xlelm/experiments/runner.hpp"
#include "xlelm/version.hpp"

namespace xlelm::experiments
{

inline const std::vector<std::string>& result_columns()
{
    static const std::vector<std::string> cols = {
        "experiment", "method",   "seed",     "grid_value",         "n_r",
        "kappa",      "snr_db",   "eta",      "step",               "iteration",
        "accuracy",   "normalized_accuracy",  "train_residual",     "receive_power",
        "wall_ms"};
    return cols;
}

inline const std::vector<std::string>& summary_columns()
{
    static const std::vector<std::string> cols = {
        "experiment",     "method",       "grid_value",   "step",         "iteration",
        "trials",         "mean_accuracy", "std_accuracy", "min_accuracy", "max_accuracy",
        "mean_normalized_accuracy",       "mean_receive_power",           "mean_wall_ms"};
    return cols;
}

inline std::string format_real(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

namespace detail
{

template <class T>
std::string opt_field(const std::optional<T>& v)
{
    if (!v)
        return {};
    if constexpr (std::is_floating_point_v<T>)
        return format_real(*v);
    else
        return std::to_string(*v);
}

inline void write_row(std::ostream& os, const std::vector<std::string>& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
        if (i)
            os << ',';
        os << csv_field(cells[i]);
    }
    os << '\n';
}

inline std::ofstream open_for_write(const std::filesystem::path& path)
{
    if (path.has_parent_path())
    {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot open '" + path.string() + "' for writing");
    return os;
}

inline void finish(std::ofstream& os, const std::filesystem::path& path)
{
    os.flush();
    if (!os)
        throw IoError("write to '" + path.string() + "' failed");
}

} // namespace detail

inline void write_results_csv(std::ostream& os, const ResultTable& table, bool include_timing)
{
    detail::write_row(os, result_columns());
    for (const auto& r : table)
        detail::write_row(os, {r.experiment, r.method, std::to_string(r.seed), format_real(r.grid_value),
                               std::to_string(r.n_r), format_real(r.kappa), format_real(r.snr_db),
                               detail::opt_field(r.eta), detail::opt_field(r.step), detail::opt_field(r.iteration),
                               format_real(r.accuracy), detail::opt_field(r.normalized_accuracy),
                               format_real(r.train_residual), format_real(r.receive_power),
                               include_timing ? format_real(r.wall_ms) : std::string()});
}

inline void emit_csv(const ResultTable& table, const std::filesystem::path& path, bool include_timing = false)
{
    auto os = detail::open_for_write(path);
    write_results_csv(os, table, include_timing);
    detail::finish(os, path);
}

inline void emit_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path,
                             bool include_timing = false)
{
    auto os = detail::open_for_write(path);
    detail::write_row(os, summary_columns());
    for (const auto& s : rows)
        detail::write_row(os, {s.experiment, s.method, format_real(s.grid_value), detail::opt_field(s.step),
                               detail::opt_field(s.iteration), std::to_string(s.trials),
                               format_real(s.mean_accuracy), format_real(s.std_accuracy),
                               format_real(s.min_accuracy), format_real(s.max_accuracy),
                               detail::opt_field(s.mean_normalized_accuracy), format_real(s.mean_receive_power),
                               include_timing ? format_real(s.mean_wall_ms) : std::string()});
    detail::finish(os, path);
}

namespace detail
{

inline double read_real(const std::string& s)
{
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "-inf")
        return -std::numeric_limits<double>::infinity();
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError("results csv: bad number '" + s + "'");
    return v;
}

inline std::uint64_t read_count(const std::string& s)
{
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw DataError("results csv: bad integer '" + s + "'");
    return v;
}

} // namespace detail

/// Parses a file written by emit_csv.
inline ResultTable read_results_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line))
        throw DataError("'" + path.string() + "': missing header");
    if (xlelm::detail::split_record(line, ',') != result_columns())
        throw DataError("'" + path.string() + "': unexpected header");
    ResultTable table;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        const auto c = xlelm::detail::split_record(line, ',');
        if (c.size() != result_columns().size())
            throw DataError("'" + path.string() + "': ragged row");
        TrialResult r;
        r.experiment = c[0];
        r.method = c[1];
        r.seed = detail::read_count(c[2]);
        r.grid_value = detail::read_real(c[3]);
        r.n_r = detail::read_count(c[4]);
        r.kappa = detail::read_real(c[5]);
        r.snr_db = detail::read_real(c[6]);
        if (!c[7].empty())
            r.eta = detail::read_real(c[7]);
        if (!c[8].empty())
            r.step = detail::read_count(c[8]);
        if (!c[9].empty())
            r.iteration = detail::read_count(c[9]);
        r.accuracy = detail::read_real(c[10]);
        if (!c[11].empty())
            r.normalized_accuracy = detail::read_real(c[11]);
        r.train_residual = detail::read_real(c[12]);
        r.receive_power = detail::read_real(c[13]);
        r.wall_ms = c[14].empty() ? 0.0 : detail::read_real(c[14]);
        table.push_back(std::move(r));
    }
    return table;
}

/// Lower-case hex SHA-256 of a file's bytes.
inline std::string file_sha256(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "' for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw IoError("sha256: digest initialization failed");
    std::array<char, 1 << 16> buf{};
    while (in)
    {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0)
            EVP_DigestUpdate(ctx.get(), buf.data(), std::size_t(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i)
        hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg)
{
    auto real = [](double v) -> nlohmann::ordered_json {
        if (std::isinf(v))
            return v > 0 ? "inf" : "-inf";
        return v;
    };
    nlohmann::ordered_json j;
    j["experiment"] = {{"kind", to_string(cfg.kind)},
                       {"master_seed", cfg.master_seed},
                       {"seeds", cfg.seeds},
                       {"threads", cfg.threads},
                       {"baseline", cfg.baseline},
                       {"out", cfg.out.string()}};
    const auto& ds = cfg.dataset;
    nlohmann::ordered_json label_map = nlohmann::ordered_json::object();
    for (const auto& [k, v] : ds.csv.label_map)
        label_map[k] = v;
    j["dataset"] = {{"source", ds.source},
                    {"path", ds.path.string()},
                    {"labels_path", ds.labels_path.string()},
                    {"label_column", ds.csv.label_column},
                    {"delimiter", std::string(1, ds.csv.delimiter)},
                    {"header", ds.csv.header},
                    {"missing_token", ds.csv.missing_token},
                    {"label_map", label_map},
                    {"drop_columns", ds.csv.drop_columns},
                    {"positive_label", ds.positive_label ? nlohmann::ordered_json(*ds.positive_label) : nullptr},
                    {"transform", ds.transform},
                    {"n_features", ds.n_features},
                    {"subsample", ds.subsample ? nlohmann::ordered_json(*ds.subsample) : nullptr},
                    {"train_ratio", ds.train_ratio},
                    {"synth_rows", ds.synth_rows},
                    {"synth_dim", ds.synth_dim},
                    {"synth_separation", ds.synth_separation}};
    j["channel"] = {{"kappa", real(cfg.kappa)},        {"pathloss", cfg.pathloss},
                    {"los_angle_tx", cfg.los_angle_tx}, {"los_angle_rx", cfg.los_angle_rx},
                    {"n_r", cfg.resolved_n_r()},        {"snr_db", real(cfg.snr_db)}};
    j["activation"] = {{"y_sat", cfg.rapp.y_sat}, {"alpha", cfg.rapp.alpha}};
    j["solver"] = {{"rel_tol", cfg.pinv_rel_tol}};
    nlohmann::ordered_json grid = nlohmann::ordered_json::array();
    for (double g : cfg.effective_grid())
        grid.push_back(real(g));
    j["sweep"] = {{"values", grid}};
    j["online"] = {{"eta", cfg.etas},
                   {"gamma", cfg.gamma},
                   {"batch_size", cfg.batch_size},
                   {"steps", cfg.steps},
                   {"iterations", cfg.iterations},
                   {"early_stop", cfg.early_stop_tol ? nlohmann::ordered_json(*cfg.early_stop_tol) : nullptr}};
    return j;
}

/// Sidecar describing how a result file was produced.
inline nlohmann::ordered_json make_manifest(const ExperimentConfig& cfg, const std::filesystem::path& results,
                                            const std::filesystem::path& summary)
{
    nlohmann::ordered_json m;
    m["tool"] = "xlelm";
    m["version"] = XLELM_VERSION;
    m["experiment"] = to_string(cfg.kind);
    m["master_seed"] = cfg.master_seed;
    m["seeds"] = cfg.seeds;
    m["seed_derivation"] =
        "RngStream(master_seed, (seed_index << 8) | purpose), Philox4x32-10; purposes: 1 prepare, 2 split, "
        "3 channel, 4 noise, 5 digital baseline, 6 online. Channel, split and noise vary per seed.";
    m["config"] = config_to_json(cfg);
    nlohmann::ordered_json datasets = nlohmann::ordered_json::array();
    for (const auto& f : cfg.dataset_files())
        datasets.push_back({{"path", f.string()},
                            {"bytes", std::filesystem::file_size(f)},
                            {"sha256", file_sha256(f)}});
    m["datasets"] = datasets;
    m["outputs"] = {{"results", results.string()}, {"summary", summary.string()}};
    return m;
}

inline void emit_manifest(const nlohmann::ordered_json& manifest, const std::filesystem::path& path)
{
    auto os = detail::open_for_write(path);
    os << manifest.dump(2) << '\n';
    detail::finish(os, path);
}

/// Sidecar paths derived from the results path: <stem>.summary.csv and
/// <name>.manifest.json next to it.
inline std::filesystem::path summary_path_for(const std::filesystem::path& results)
{
    auto p = results;
    p.replace_filename(results.stem().string() + ".summary.csv");
    return p;
}

inline std::filesystem::path manifest_path_for(const std::filesystem::path& results)
{
    auto p = results;
    p.replace_filename(results.filename().string() + ".manifest.json");
    return p;
}

} // namespace xlelm::experiments
