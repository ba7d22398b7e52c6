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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xlelm/errors.hpp"
#include "xlelm/numkernel.hpp"
#include "xlelm/rng.hpp"

namespace xlelm
{

using PresenceMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Feature table as loaded from disk. Missing cells hold NaN and are marked
/// false in `present`.
struct RawTable
{
    Matrix features;
    PresenceMask present;
    std::vector<int> labels;
    std::vector<std::string> feature_names;

    std::ptrdiff_t rows() const { return features.rows(); }
    std::ptrdiff_t cols() const { return features.cols(); }
    bool has_missing() const { return present.size() > 0 && !present.all(); }
};

// ---------------------------------------------------------------------------
// Delimited text

struct CsvOptions
{
    /// Column name when `header` is set, otherwise a 0-based index
    /// (negative counts from the end). Empty means no label column.
    std::string label_column;
    char delimiter = ',';
    bool header = true;
    /// Cells equal to this token are recorded as missing.
    std::string missing_token = "NA";
    /// Optional string -> label mapping (e.g. M -> 0, B -> 1). Unmapped
    /// labels are parsed as integers.
    std::map<std::string, int> label_map;
    /// Columns skipped entirely (names, or indices without a header), e.g.
    /// a free-text identifier column.
    std::vector<std::string> drop_columns;
};

namespace detail
{

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

// Splits one record. Double quotes protect delimiters; "" is a literal quote.
// A space delimiter splits on runs of blanks.
inline std::vector<std::string> split_record(std::string_view line, char delimiter)
{
    std::vector<std::string> cells;
    if (delimiter == ' ')
    {
        std::istringstream in{std::string(line)};
        std::string cell;
        while (in >> cell)
            cells.push_back(cell);
        return cells;
    }
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        const char c = line[i];
        if (quoted)
        {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
            {
                cell += '"';
                ++i;
            }
            else if (c == '"')
                quoted = false;
            else
                cell += c;
        }
        else if (c == '"')
            quoted = true;
        else if (c == delimiter)
        {
            cells.emplace_back(trim(cell));
            cell.clear();
        }
        else
            cell += c;
    }
    cells.emplace_back(trim(cell));
    return cells;
}

inline std::optional<double> parse_double(std::string_view s)
{
    s = trim(s);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

inline std::optional<int> parse_label(std::string_view s, const std::map<std::string, int>& label_map)
{
    s = trim(s);
    if (auto it = label_map.find(std::string(s)); it != label_map.end())
        return it->second;
    const auto v = parse_double(s);
    if (!v || std::floor(*v) != *v || std::abs(*v) > double(std::numeric_limits<int>::max()))
        return std::nullopt;
    return int(*v);
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open '" + path.string() + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        lines.push_back(line);
    return lines;
}

} // namespace detail

/// Parses a delimited numeric table with one integer-valued label column.
/// Errors report 1-based line numbers.
inline RawTable load_csv(const std::filesystem::path& path, const CsvOptions& opt)
{
    const auto lines = detail::read_lines(path);
    std::size_t line_no = 0;
    std::vector<std::string> names;
    std::ptrdiff_t n_cols = -1;

    auto next_record = [&]() -> std::optional<std::vector<std::string>> {
        while (line_no < lines.size())
        {
            const auto& line = lines[line_no++];
            if (detail::trim(line).empty())
                continue;
            return detail::split_record(line, opt.delimiter);
        }
        return std::nullopt;
    };

    if (opt.header)
    {
        auto rec = next_record();
        if (!rec)
            throw DataError("'" + path.string() + "': empty file");
        names = *rec;
        n_cols = std::ptrdiff_t(names.size());
    }

    std::vector<std::vector<std::string>> records;
    std::vector<std::size_t> record_lines;
    while (auto rec = next_record())
    {
        if (n_cols < 0)
            n_cols = std::ptrdiff_t(rec->size());
        if (std::ptrdiff_t(rec->size()) != n_cols)
            throw DataError("'" + path.string() + "' line " + std::to_string(line_no) + ": expected " +
                            std::to_string(n_cols) + " cells, found " + std::to_string(rec->size()));
        records.push_back(std::move(*rec));
        record_lines.push_back(line_no);
    }
    if (records.empty())
        throw DataError("'" + path.string() + "': no data rows");

    std::ptrdiff_t label_idx = -1;
    if (!opt.label_column.empty())
    {
        if (opt.header)
        {
            const auto it = std::find(names.begin(), names.end(), opt.label_column);
            if (it == names.end())
                throw DataError("'" + path.string() + "': no column named '" + opt.label_column + "'");
            label_idx = it - names.begin();
        }
        else
        {
            const auto idx = detail::parse_label(opt.label_column, {});
            if (!idx || *idx >= n_cols || *idx < -n_cols)
                throw DataError("'" + path.string() + "': label column index '" + opt.label_column +
                                "' out of range");
            label_idx = *idx < 0 ? n_cols + *idx : *idx;
        }
    }

    std::vector<bool> dropped(std::size_t(n_cols), false);
    for (const auto& col : opt.drop_columns)
    {
        std::ptrdiff_t idx = -1;
        if (opt.header)
        {
            const auto it = std::find(names.begin(), names.end(), col);
            idx = it == names.end() ? -1 : it - names.begin();
        }
        else if (const auto i = detail::parse_label(col, {}); i && *i >= 0 && *i < n_cols)
            idx = *i;
        if (idx < 0)
            throw DataError("'" + path.string() + "': cannot drop unknown column '" + col + "'");
        if (idx == label_idx)
            throw DataError("'" + path.string() + "': cannot drop the label column '" + col + "'");
        dropped[std::size_t(idx)] = true;
    }

    const std::ptrdiff_t n_features =
        n_cols - (label_idx >= 0 ? 1 : 0) - std::ptrdiff_t(std::count(dropped.begin(), dropped.end(), true));
    RawTable table;
    table.features.resize(std::ptrdiff_t(records.size()), n_features);
    table.present.resize(std::ptrdiff_t(records.size()), n_features);
    for (std::ptrdiff_t j = 0; j < n_cols; ++j)
        if (j != label_idx && !dropped[std::size_t(j)])
            table.feature_names.push_back(opt.header ? names[std::size_t(j)] : "x" + std::to_string(j));

    for (std::size_t r = 0; r < records.size(); ++r)
    {
        const auto& rec = records[r];
        const auto where = "'" + path.string() + "' line " + std::to_string(record_lines[r]);
        std::ptrdiff_t f = 0;
        for (std::ptrdiff_t j = 0; j < n_cols; ++j)
        {
            const std::string& cell = rec[std::size_t(j)];
            if (j == label_idx)
            {
                const auto label = detail::parse_label(cell, opt.label_map);
                if (!label)
                    throw DataError(where + ": unparseable label '" + cell + "'");
                table.labels.push_back(*label);
                continue;
            }
            if (dropped[std::size_t(j)])
                continue;
            const auto row = std::ptrdiff_t(r);
            if (cell == opt.missing_token)
            {
                table.features(row, f) = std::numeric_limits<double>::quiet_NaN();
                table.present(row, f) = false;
            }
            else if (const auto v = detail::parse_double(cell))
            {
                table.features(row, f) = *v;
                table.present(row, f) = true;
            }
            else
                throw DataError(where + ", column " + std::to_string(j + 1) + ": non-numeric cell '" + cell + "'");
            ++f;
        }
    }
    return table;
}

/// Reads one integer label per line from the first blank-separated token.
inline std::vector<int> load_label_file(const std::filesystem::path& path)
{
    std::vector<int> labels;
    std::size_t line_no = 0;
    for (const auto& line : detail::read_lines(path))
    {
        ++line_no;
        const auto cells = detail::split_record(line, ' ');
        if (cells.empty())
            continue;
        const auto label = detail::parse_label(cells.front(), {});
        if (!label)
            throw DataError("'" + path.string() + "' line " + std::to_string(line_no) + ": unparseable label '" +
                            cells.front() + "'");
        labels.push_back(*label);
    }
    return labels;
}

// ---------------------------------------------------------------------------
// IDX (MNIST) binary format: big-endian u32 magic 0x000008NN where NN is the
// number of dimensions, one big-endian u32 per dimension, then unsigned bytes.

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803u;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801u;

namespace detail
{

inline std::uint32_t read_be_u32(std::span<const std::uint8_t> bytes, std::size_t offset, const std::string& what)
{
    if (bytes.size() < offset + 4)
        throw DataError(what + ": truncated header");
    return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
           (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DataError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void check_payload(std::span<const std::uint8_t> bytes, std::size_t header, std::uint64_t expected,
                          const std::string& what)
{
    const std::uint64_t have = bytes.size() - header;
    if (have < expected)
        throw DataError(what + ": truncated payload, expected " + std::to_string(expected) + " bytes, found " +
                        std::to_string(have));
    if (have > expected)
        throw DataError(what + ": " + std::to_string(have - expected) + " trailing bytes after payload");
}

} // namespace detail

/// Image block of an IDX file: count x (rows * cols) pixels scaled to [0, 1].
struct IdxImages
{
    Matrix pixels;
    std::uint32_t image_rows = 0;
    std::uint32_t image_cols = 0;
};

inline IdxImages parse_idx_images(std::span<const std::uint8_t> bytes, const std::string& what = "idx images")
{
    const auto magic = detail::read_be_u32(bytes, 0, what);
    if (magic != kIdxImagesMagic)
        throw DataError(what + ": bad magic number 0x" + [&] {
            std::ostringstream s;
            s << std::hex << magic;
            return s.str();
        }() + ", expected 0x803");
    const auto count = detail::read_be_u32(bytes, 4, what);
    const auto rows = detail::read_be_u32(bytes, 8, what);
    const auto cols = detail::read_be_u32(bytes, 12, what);
    const std::uint64_t per_image = std::uint64_t(rows) * cols;
    detail::check_payload(bytes, 16, per_image * count, what);
    IdxImages out{Matrix(std::ptrdiff_t(count), std::ptrdiff_t(per_image)), rows, cols};
    std::size_t at = 16;
    for (std::ptrdiff_t i = 0; i < out.pixels.rows(); ++i)
        for (std::ptrdiff_t j = 0; j < out.pixels.cols(); ++j)
            out.pixels(i, j) = double(bytes[at++]) / 255.0;
    return out;
}

inline std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes, const std::string& what = "idx labels")
{
    const auto magic = detail::read_be_u32(bytes, 0, what);
    if (magic != kIdxLabelsMagic)
        throw DataError(what + ": bad magic number 0x" + [&] {
            std::ostringstream s;
            s << std::hex << magic;
            return s.str();
        }() + ", expected 0x801");
    const auto count = detail::read_be_u32(bytes, 4, what);
    detail::check_payload(bytes, 8, count, what);
    return {bytes.begin() + 8, bytes.end()};
}

/// Loads an IDX image file and its label file into a table with one row per
/// image (pixels row-major, scaled to [0, 1]) and the digit as label.
inline RawTable load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path)
{
    const auto image_bytes = detail::read_bytes(images_path);
    const auto label_bytes = detail::read_bytes(labels_path);
    auto images = parse_idx_images(image_bytes, "'" + images_path.string() + "'");
    auto labels = parse_idx_labels(label_bytes, "'" + labels_path.string() + "'");
    if (std::ptrdiff_t(labels.size()) != images.pixels.rows())
        throw DataError("IDX count mismatch: " + std::to_string(images.pixels.rows()) + " images but " +
                        std::to_string(labels.size()) + " labels");
    RawTable table;
    table.present = PresenceMask::Constant(images.pixels.rows(), images.pixels.cols(), true);
    table.features = std::move(images.pixels);
    table.labels = std::move(labels);
    for (std::ptrdiff_t j = 0; j < table.features.cols(); ++j)
        table.feature_names.push_back("px" + std::to_string(j));
    return table;
}

// ---------------------------------------------------------------------------
// Table transforms

/// Keeps the listed columns in the given order.
inline RawTable select_features(const RawTable& table, std::span<const std::size_t> columns)
{
    RawTable out;
    out.features.resize(table.rows(), std::ptrdiff_t(columns.size()));
    out.present.resize(table.rows(), std::ptrdiff_t(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k)
    {
        const auto c = std::ptrdiff_t(columns[k]);
        if (c >= table.cols())
            throw DimensionError("select_features: column " + std::to_string(c) + " out of range");
        out.features.col(std::ptrdiff_t(k)) = table.features.col(c);
        out.present.col(std::ptrdiff_t(k)) = table.present.col(c);
        if (std::size_t(c) < table.feature_names.size())
            out.feature_names.push_back(table.feature_names[std::size_t(c)]);
    }
    out.labels = table.labels;
    return out;
}

/// Keeps the listed rows in the given order.
inline RawTable select_rows(const RawTable& table, std::span<const std::size_t> rows)
{
    RawTable out;
    out.features.resize(std::ptrdiff_t(rows.size()), table.cols());
    out.present.resize(std::ptrdiff_t(rows.size()), table.cols());
    for (std::size_t k = 0; k < rows.size(); ++k)
    {
        const auto r = std::ptrdiff_t(rows[k]);
        if (r >= table.rows())
            throw DimensionError("select_rows: row " + std::to_string(r) + " out of range");
        out.features.row(std::ptrdiff_t(k)) = table.features.row(r);
        out.present.row(std::ptrdiff_t(k)) = table.present.row(r);
        out.labels.push_back(table.labels[std::size_t(r)]);
    }
    out.feature_names = table.feature_names;
    return out;
}

/// Uniform random subset of n rows, kept in original order.
inline RawTable subsample_rows(const RawTable& table, std::size_t n, RngStream& rng)
{
    auto rows = rng.sample_without_replacement(std::size_t(table.rows()), n);
    std::sort(rows.begin(), rows.end());
    return select_rows(table, rows);
}

/// n_pixels distinct pixel indices, sorted ascending.
inline std::vector<std::size_t> mnist_pixel_selection(std::size_t d_raw, std::size_t n_pixels, RngStream& rng)
{
    if (n_pixels > d_raw)
        throw DataError("mnist_binarize: requested " + std::to_string(n_pixels) + " pixels from images with " +
                        std::to_string(d_raw));
    auto idx = rng.sample_without_replacement(d_raw, n_pixels);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Random pixel subset as features and digit parity as label
/// (+1 even, -1 odd).
inline RawTable mnist_binarize(const RawTable& table, std::size_t n_pixels, RngStream& rng)
{
    const auto idx = mnist_pixel_selection(std::size_t(table.cols()), n_pixels, rng);
    RawTable out = select_features(table, idx);
    for (auto& label : out.labels)
        label = (label % 2 == 0) ? 1 : -1;
    return out;
}

/// Drops all-missing columns, keeps n_features of the rest at random (sorted
/// by index), fills remaining gaps with the column mean over present cells and
/// maps labels to +-1 by sign.
inline RawTable secom_prepare(const RawTable& table, std::size_t n_features, RngStream& rng)
{
    std::vector<std::size_t> usable;
    for (std::ptrdiff_t j = 0; j < table.cols(); ++j)
        if (table.present.col(j).any())
            usable.push_back(std::size_t(j));
    if (usable.size() < n_features)
        throw DataError("secom_prepare: only " + std::to_string(usable.size()) + " usable columns, " +
                        std::to_string(n_features) + " requested");
    auto pick = rng.sample_without_replacement(usable.size(), n_features);
    std::vector<std::size_t> columns;
    for (auto k : pick)
        columns.push_back(usable[k]);
    std::sort(columns.begin(), columns.end());
    RawTable out = select_features(table, columns);
    for (std::ptrdiff_t j = 0; j < out.cols(); ++j)
    {
        double sum = 0.0;
        std::ptrdiff_t n = 0;
        for (std::ptrdiff_t i = 0; i < out.rows(); ++i)
            if (out.present(i, j))
            {
                sum += out.features(i, j);
                ++n;
            }
        const double mean = sum / double(n);
        for (std::ptrdiff_t i = 0; i < out.rows(); ++i)
            if (!out.present(i, j))
            {
                out.features(i, j) = mean;
                out.present(i, j) = true;
            }
    }
    for (auto& label : out.labels)
        label = label > 0 ? 1 : -1;
    return out;
}

// ---------------------------------------------------------------------------
// Standardization and splitting

/// Per-feature mean and population standard deviation of a training block.
/// Columns whose spread is numerically zero get std = 1 and are flagged.
struct StandardizationStats
{
    Vector mean;
    Vector std;
    std::vector<bool> degenerate;

    static StandardizationStats compute(const Matrix& x)
    {
        if (x.rows() == 0)
            throw DataError("standardization: empty block");
        StandardizationStats s;
        s.mean = x.colwise().mean().transpose();
        s.std.resize(x.cols());
        s.degenerate.assign(std::size_t(x.cols()), false);
        for (std::ptrdiff_t j = 0; j < x.cols(); ++j)
        {
            const double sd = std::sqrt((x.col(j).array() - s.mean(j)).square().mean());
            if (!(sd > 1e-12 * std::max(1.0, std::abs(s.mean(j)))))
            {
                s.std(j) = 1.0;
                s.degenerate[std::size_t(j)] = true;
            }
            else
                s.std(j) = sd;
        }
        return s;
    }

    Matrix apply(const Matrix& x) const
    {
        if (x.cols() != mean.size())
            throw DimensionError("standardization: feature count mismatch");
        return (x.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
    }

    Matrix invert(const Matrix& z) const
    {
        if (z.cols() != mean.size())
            throw DimensionError("standardization: feature count mismatch");
        return (z.array().rowwise() * std.transpose().array()).matrix().rowwise() + mean.transpose();
    }
};

/// Standardized train/test split with +-1 targets.
struct Dataset
{
    Matrix x_train;
    Vector t_train;
    Matrix x_test;
    Vector t_test;
    StandardizationStats stats;
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;

    std::ptrdiff_t dim() const { return x_train.cols(); }
};

struct SplitOptions
{
    double train_ratio = 0.8;
    /// Label value mapped to +1; when unset, labels > 0 map to +1.
    std::optional<int> positive_label;
    bool allow_single_class = false;
};

inline double to_target(int label, const std::optional<int>& positive_label)
{
    if (positive_label)
        return label == *positive_label ? 1.0 : -1.0;
    return label > 0 ? 1.0 : -1.0;
}

/// Uniform random split; statistics come from the training block only and are
/// applied to both blocks.
inline Dataset split_standardize(const RawTable& table, const SplitOptions& opt, RngStream& rng)
{
    if (!(opt.train_ratio > 0.0 && opt.train_ratio < 1.0))
        throw ConfigError("split: train_ratio must lie in (0, 1)");
    const auto n = table.rows();
    if (n < 2)
        throw DataError("split: need at least 2 rows, got " + std::to_string(n));
    if (std::ptrdiff_t(table.labels.size()) != n)
        throw DataError("split: label count does not match row count");
    if (table.has_missing())
        throw DataError("split: table has missing cells; impute them first");

    std::vector<double> targets(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < targets.size(); ++i)
        targets[i] = to_target(table.labels[i], opt.positive_label);
    const bool has_pos = std::find(targets.begin(), targets.end(), 1.0) != targets.end();
    const bool has_neg = std::find(targets.begin(), targets.end(), -1.0) != targets.end();
    if (!(has_pos && has_neg) && !opt.allow_single_class)
        throw ClassBalanceError("split: table contains a single class");

    auto perm = rng.permutation(std::size_t(n));
    const auto n_train = std::clamp<std::ptrdiff_t>(std::llround(opt.train_ratio * double(n)), 1, n - 1);
    Dataset ds;
    ds.train_rows.assign(perm.begin(), perm.begin() + n_train);
    ds.test_rows.assign(perm.begin() + n_train, perm.end());
    std::sort(ds.train_rows.begin(), ds.train_rows.end());
    std::sort(ds.test_rows.begin(), ds.test_rows.end());

    auto gather = [&](const std::vector<std::size_t>& rows, Matrix& x, Vector& t) {
        x.resize(std::ptrdiff_t(rows.size()), table.cols());
        t.resize(std::ptrdiff_t(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k)
        {
            x.row(std::ptrdiff_t(k)) = table.features.row(std::ptrdiff_t(rows[k]));
            t(std::ptrdiff_t(k)) = targets[rows[k]];
        }
    };
    Matrix raw_train, raw_test;
    gather(ds.train_rows, raw_train, ds.t_train);
    gather(ds.test_rows, raw_test, ds.t_test);
    ds.stats = StandardizationStats::compute(raw_train);
    ds.x_train = ds.stats.apply(raw_train);
    ds.x_test = ds.stats.apply(raw_test);
    return ds;
}

/// Two isotropic unit-variance Gaussian classes with means
/// +-(separation / 2) * (1, ..., 1) / sqrt(d). Even rows are +1, odd rows -1.
inline RawTable synth_two_gaussians(RngStream& rng, std::ptrdiff_t n_rows, std::ptrdiff_t d, double separation)
{
    if (n_rows < 2 || d < 1)
        throw ConfigError("synth_two_gaussians: need at least 2 rows and 1 feature");
    const double offset = separation / 2.0 / std::sqrt(double(d));
    RawTable table;
    table.features.resize(n_rows, d);
    table.present = PresenceMask::Constant(n_rows, d, true);
    for (std::ptrdiff_t i = 0; i < n_rows; ++i)
    {
        const int label = (i % 2 == 0) ? 1 : -1;
        table.labels.push_back(label);
        for (std::ptrdiff_t j = 0; j < d; ++j)
            table.features(i, j) = label * offset + rng.gaussian();
    }
    for (std::ptrdiff_t j = 0; j < d; ++j)
        table.feature_names.push_back("x" + std::to_string(j));
    return table;
}

} // namespace xlelm
