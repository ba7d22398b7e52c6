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

#include <cmath>
#include <string>

#include "xlelm/errors.hpp"
#include "xlelm/numkernel.hpp"

namespace xlelm
{

/// Rapp soft-threshold parameters. alpha must be an even integer >= 2: for
/// odd alpha the denominator 1 + (y/y_sat)^alpha vanishes at y = -y_sat.
struct RappParams
{
    double y_sat = 1.5;
    int alpha = 2;

    void validate() const
    {
        if (!(y_sat > 0.0) || !std::isfinite(y_sat))
            throw ConfigError("rapp: y_sat must be a positive finite value");
        if (alpha < 2 || alpha % 2 != 0)
            throw ConfigError("rapp: alpha must be an even integer >= 2, got " + std::to_string(alpha));
    }
};

namespace detail
{
// Exponentiation by squaring. For even n the result depends only on |x|
// bit-for-bit, which keeps rapp exactly odd.
inline double int_pow(double x, int n)
{
    double result = 1.0;
    while (n > 0)
    {
        if (n & 1)
            result *= x;
        x *= x;
        n >>= 1;
    }
    return result;
}
} // namespace detail

/// y / (1 + (y / y_sat)^alpha). Overflow of the power drives the result to 0,
/// which is the limit for alpha > 1.
inline double rapp(double y, const RappParams& p)
{
    return y / (1.0 + detail::int_pow(y / p.y_sat, p.alpha));
}

/// Analytic derivative y_sat^a (y_sat^a + (1 - a) y^a) / (y_sat^a + y^a)^2,
/// written in terms of u = y / y_sat to avoid overflow.
inline double rapp_derivative(double y, const RappParams& p)
{
    const double ua = detail::int_pow(y / p.y_sat, p.alpha);
    const double denom = 1.0 + ua;
    return (1.0 + (1.0 - p.alpha) * ua) / (denom * denom);
}

template <class Derived>
Matrix rapp_vec(const Eigen::MatrixBase<Derived>& y, const RappParams& p)
{
    return y.unaryExpr([&p](double v) { return rapp(v, p); });
}

/// Location and value of the positive maximum of rapp.
struct RappPeak
{
    double y_star;
    double g_star;
};

inline RappPeak rapp_peak(const RappParams& p)
{
    p.validate();
    const double a = p.alpha;
    return {p.y_sat * std::pow(a - 1.0, -1.0 / a), p.y_sat / a * std::pow(a - 1.0, 1.0 - 1.0 / a)};
}

/// Logistic function, evaluated without overflow for large |x|.
inline double sigmoid(double x)
{
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

template <class Derived>
Matrix sigmoid_vec(const Eigen::MatrixBase<Derived>& x)
{
    return x.unaryExpr([](double v) { return sigmoid(v); });
}

} // namespace xlelm
