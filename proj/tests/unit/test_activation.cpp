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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "xlelm/activation.hpp"
#include "xlelm/rng.hpp"

using namespace xlelm;
using Catch::Approx;

TEST_CASE("rapp examples")
{
    const RappParams p;
    CHECK(rapp(0.0, p) == 0.0);
    CHECK(rapp(0.0, RappParams{3.0, 6}) == 0.0);
    CHECK(rapp(1.5, p) == 0.75);
    CHECK(rapp(-1.5, p) == -0.75);

    Matrix v(2, 1);
    v << 1.5, -1.5;
    const Matrix g = rapp_vec(v, p);
    CHECK(g(0, 0) == 0.75);
    CHECK(g(1, 0) == -0.75);
    CHECK(rapp_vec(Matrix::Zero(3, 4), p).isZero(0.0));
    CHECK(rapp_vec(Matrix::Zero(3, 4), p).rows() == 3);
}

TEST_CASE("rapp parameters are validated")
{
    CHECK_NOTHROW(RappParams{}.validate());
    CHECK_NOTHROW(RappParams{0.2, 8}.validate());
    CHECK_THROWS_AS((RappParams{1.5, 3}.validate()), ConfigError);
    CHECK_THROWS_AS((RappParams{1.5, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((RappParams{1.5, 0}.validate()), ConfigError);
    CHECK_THROWS_AS((RappParams{0.0, 2}.validate()), ConfigError);
    CHECK_THROWS_AS((RappParams{-1.5, 2}.validate()), ConfigError);
    CHECK_THROWS_AS((RappParams{std::numeric_limits<double>::infinity(), 2}.validate()), ConfigError);
    CHECK_THROWS_AS(rapp_peak(RappParams{1.5, 5}), ConfigError);
}

TEST_CASE("rapp peak closed form")
{
    const auto a = rapp_peak(RappParams{});
    CHECK(a.y_star == Approx(1.5).epsilon(1e-15));
    CHECK(a.g_star == Approx(0.75).epsilon(1e-15));
    const auto b = rapp_peak(RappParams{1.0, 2});
    CHECK(b.y_star == Approx(1.0).epsilon(1e-15));
    CHECK(b.g_star == Approx(0.5).epsilon(1e-15));

    // brute-force maximization on [0, 100] with step 1e-4
    for (const RappParams p : {RappParams{}, RappParams{1.0, 2}, RappParams{1.5, 4}, RappParams{0.7, 6}})
    {
        double best_y = 0.0, best_g = -1.0;
        for (long i = 0; i <= 1'000'000; ++i)
        {
            const double y = 1e-4 * static_cast<double>(i);
            const double g = rapp(y, p);
            if (g > best_g)
            {
                best_g = g;
                best_y = y;
            }
        }
        const auto peak = rapp_peak(p);
        CHECK(std::abs(best_y - peak.y_star) <= 1e-3);
        CHECK(std::abs(best_g - peak.g_star) <= 1e-3);
        CHECK(rapp(peak.y_star, p) == Approx(peak.g_star).epsilon(1e-14));
    }
}

TEST_CASE("rapp is bounded, odd and vanishes in the tails")
{
    RngStream rng(11, 0);
    for (const RappParams p : {RappParams{}, RappParams{1.0, 4}})
    {
        const double g_star = rapp_peak(p).g_star;
        for (int i = 0; i < 100'000; ++i)
        {
            const double y = rng.uniform(-1e6, 1e6);
            CHECK(std::abs(rapp(y, p)) <= g_star);
        }
        Matrix v = Matrix::Zero(200, 1);
        for (Eigen::Index i = 0; i < v.rows(); ++i)
            v(i, 0) = rng.uniform(-10.0, 10.0);
        CHECK(rapp_vec(v, p).cwiseAbs().maxCoeff() <= g_star);
    }

    const RappParams p;
    for (int i = 0; i < 1000; ++i)
    {
        const double y = rng.uniform(-50.0, 50.0);
        CHECK(rapp(-y, p) == -rapp(y, p));
        const double tail = (i % 2 ? 1.0 : -1.0) * rng.uniform(1e4 * (1.0 + 1e-12), 1e8);
        CHECK(std::abs(rapp(tail, p)) < 1e-3);
    }
    CHECK(rapp(2.0, p) != 2.0 * rapp(1.0, p));
}

TEST_CASE("rapp derivative matches central differences")
{
    RngStream rng(12, 0);
    const double h = 1e-6;
    for (const RappParams p : {RappParams{}, RappParams{2.0, 4}})
    {
        // published form of the derivative, kept separate from the implementation
        const double ya = std::pow(p.y_sat, p.alpha);
        const auto closed = [&](double y)
        {
            const double yp = std::pow(y, p.alpha);
            return ya * (ya + (1.0 - p.alpha) * yp) / ((ya + yp) * (ya + yp));
        };
        for (int i = 0; i < 1000; ++i)
        {
            const double y = rng.uniform(-10.0, 10.0);
            const double fd = (rapp(y + h, p) - rapp(y - h, p)) / (2.0 * h);
            const double d = rapp_derivative(y, p);
            CHECK(std::abs(fd - d) <= 1e-5 * std::abs(d));
            CHECK(d == Approx(closed(y)).epsilon(1e-12).margin(1e-15));
        }
    }
    CHECK(rapp_derivative(0.0, RappParams{}) == 1.0);
    CHECK(rapp_derivative(1.5, RappParams{}) == 0.0);
}

TEST_CASE("sigmoid")
{
    CHECK(sigmoid(0.0) == 0.5);
    for (double x : {1.0, 5.0, 20.0})
        CHECK(sigmoid(x) + sigmoid(-x) == Approx(1.0).epsilon(1e-15));
    CHECK(sigmoid(std::log(3.0)) == Approx(0.75).epsilon(1e-15));
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) >= 0.0);
    CHECK(std::isfinite(sigmoid(-800.0)));

    double previous = 0.0;
    for (double x = -30.0; x <= 30.0; x += 0.25)
    {
        const double s = sigmoid(x);
        CHECK(s > previous);
        CHECK(s < 1.0);
        previous = s;
    }

    Matrix v(1, 3);
    v << -1.0, 0.0, 1.0;
    const Matrix s = sigmoid_vec(v);
    CHECK(s(0, 1) == 0.5);
    CHECK(s(0, 0) + s(0, 2) == Approx(1.0));
}
