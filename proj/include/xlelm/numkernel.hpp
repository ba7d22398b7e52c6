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
#include <complex>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "xlelm/errors.hpp"
#include "xlelm/rng.hpp"

namespace xlelm
{

using Matrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

/// Default relative singular-value cutoff for the pseudoinverse.
inline constexpr double kDefaultPinvTolerance = 1e-12;

template <class Derived>
void require_finite(const Eigen::DenseBase<Derived>& a, const char* what)
{
    if (!a.allFinite())
        throw InputError(std::string(what) + ": non-finite entry in input");
}

inline void require_positive_dims(std::ptrdiff_t rows, std::ptrdiff_t cols, const char* what)
{
    if (rows < 1 || cols < 1)
        throw DimensionError(std::string(what) + ": dimensions must be positive, got " + std::to_string(rows) + "x" +
                             std::to_string(cols));
}

/// i.i.d. N(mean, stddev^2) entries, drawn in row-major order.
inline Matrix sample_gaussian(RngStream& rng, std::ptrdiff_t rows, std::ptrdiff_t cols, double mean, double stddev)
{
    require_positive_dims(rows, cols, "sample_gaussian");
    if (!(stddev >= 0.0))
        throw ConfigError("sample_gaussian: stddev must be >= 0");
    Matrix out(rows, cols);
    for (std::ptrdiff_t i = 0; i < rows; ++i)
        for (std::ptrdiff_t j = 0; j < cols; ++j)
            out(i, j) = stddev == 0.0 ? mean : rng.gaussian(mean, stddev);
    return out;
}

/// i.i.d. CN(0, stddev^2) entries: real and imaginary parts independent with
/// variance stddev^2 / 2 each. Drawn row-major, real part first.
inline ComplexMatrix sample_complex_gaussian(RngStream& rng, std::ptrdiff_t rows, std::ptrdiff_t cols,
                                             double stddev = 1.0)
{
    require_positive_dims(rows, cols, "sample_complex_gaussian");
    if (!(stddev >= 0.0))
        throw ConfigError("sample_complex_gaussian: stddev must be >= 0");
    const double part = stddev * std::sqrt(0.5);
    ComplexMatrix out(rows, cols);
    for (std::ptrdiff_t i = 0; i < rows; ++i)
        for (std::ptrdiff_t j = 0; j < cols; ++j)
        {
            const double re = rng.gaussian() * part;
            const double im = rng.gaussian() * part;
            out(i, j) = {re, im};
        }
    return out;
}

/// Thin SVD: A = u * diag(s) * v^T with s descending and
/// min(rows, cols) columns in u and v.
struct Svd
{
    Matrix u;
    Vector s;
    Matrix v;
};

inline Svd svd(const Matrix& a)
{
    require_positive_dims(a.rows(), a.cols(), "svd");
    require_finite(a, "svd");
    Eigen::BDCSVD<Matrix> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success)
        throw InputError("svd: decomposition did not converge");
    return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

/// Number of singular values above rel_tol * max(rows, cols) * s_max.
inline std::ptrdiff_t numerical_rank(const Svd& dec, std::ptrdiff_t rows, std::ptrdiff_t cols, double rel_tol)
{
    if (dec.s.size() == 0 || dec.s(0) == 0.0)
        return 0;
    const double cutoff = rel_tol * double(std::max(rows, cols)) * dec.s(0);
    std::ptrdiff_t rank = 0;
    while (rank < dec.s.size() && dec.s(rank) > cutoff)
        ++rank;
    return rank;
}

inline void check_rel_tol(double rel_tol, const char* what)
{
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
        throw ConfigError(std::string(what) + ": rel_tol must lie in (0, 1)");
}

/// Moore-Penrose pseudoinverse through the SVD. Singular values at or below
/// rel_tol * max(rows, cols) * s_max are treated as zero.
inline Matrix pseudoinverse(const Matrix& a, double rel_tol = kDefaultPinvTolerance)
{
    check_rel_tol(rel_tol, "pseudoinverse");
    const Svd dec = svd(a);
    const auto rank = numerical_rank(dec, a.rows(), a.cols(), rel_tol);
    if (rank == 0)
        return Matrix::Zero(a.cols(), a.rows());
    const auto v = dec.v.leftCols(rank);
    const auto u = dec.u.leftCols(rank);
    return v * dec.s.head(rank).cwiseInverse().asDiagonal() * u.transpose();
}

/// Minimum-norm least-squares solution w = G^+ t, evaluated as
/// V_k diag(1/s_k) U_k^T t without forming G^+.
inline Vector min_norm_lstsq(const Matrix& g, const Vector& t, double rel_tol = kDefaultPinvTolerance)
{
    if (g.rows() != t.size())
        throw DimensionError("min_norm_lstsq: G has " + std::to_string(g.rows()) + " rows but t has " +
                             std::to_string(t.size()) + " entries");
    check_rel_tol(rel_tol, "min_norm_lstsq");
    require_finite(t, "min_norm_lstsq");
    const Svd dec = svd(g);
    const auto rank = numerical_rank(dec, g.rows(), g.cols(), rel_tol);
    if (rank == 0)
        return Vector::Zero(g.cols());
    const Vector projected = dec.u.leftCols(rank).transpose() * t;
    return dec.v.leftCols(rank) * projected.cwiseQuotient(dec.s.head(rank));
}

} // namespace xlelm
