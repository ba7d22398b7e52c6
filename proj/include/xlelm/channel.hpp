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
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>

#include "xlelm/errors.hpp"
#include "xlelm/numkernel.hpp"
#include "xlelm/rng.hpp"

namespace xlelm
{

/// Ricean MIMO channel configuration. kappa is the LoS-to-scattered power
/// ratio (0 = Rayleigh). Steering angles are in radians; 0 is broadside.
struct RiceanConfig
{
    double kappa = 0.0;
    double pathloss = 1.0;
    std::ptrdiff_t n_r = 1;
    std::ptrdiff_t n_t = 1;
    double los_angle_tx = 0.0;
    double los_angle_rx = 0.0;

    void validate() const
    {
        if (!(kappa >= 0.0))
            throw ConfigError("channel: kappa must be >= 0");
        if (!(pathloss > 0.0) || !std::isfinite(pathloss))
            throw ConfigError("channel: pathloss must be positive and finite");
        if (n_r < 1 || n_t < 1)
            throw ConfigError("channel: n_r and n_t must be >= 1");
        if (!std::isfinite(los_angle_tx) || !std::isfinite(los_angle_rx))
            throw ConfigError("channel: steering angles must be finite");
    }
};

/// AR(1) time evolution coefficient, 0 < eta <= 1.
struct ArConfig
{
    double eta = 1.0;

    void validate() const
    {
        if (!(eta > 0.0 && eta <= 1.0))
            throw ConfigError("channel: AR coefficient eta must lie in (0, 1], got " + std::to_string(eta));
    }
};

/// Complex channel realization together with its element-wise real part,
/// which is what the learner sees.
class ChannelMatrix
{
  public:
    explicit ChannelMatrix(ComplexMatrix h) : complex_(std::move(h)), real_(complex_.real())
    {
        require_finite(real_, "ChannelMatrix");
        require_finite(complex_.imag(), "ChannelMatrix");
    }

    const ComplexMatrix& complex() const { return complex_; }
    const Matrix& real() const { return real_; }
    std::ptrdiff_t n_r() const { return complex_.rows(); }
    std::ptrdiff_t n_t() const { return complex_.cols(); }

  private:
    ComplexMatrix complex_;
    Matrix real_;
};

/// Complex AWGN variance sigma2; the real part of the noise has variance
/// sigma2 / 2. sigma2 = 0 is the noiseless channel.
class NoiseModel
{
  public:
    constexpr NoiseModel() = default;

    static constexpr NoiseModel noiseless() { return NoiseModel(); }

    static NoiseModel awgn(double sigma2)
    {
        if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
            throw ConfigError("noise: sigma2 must be finite and >= 0");
        NoiseModel n;
        n.sigma2_ = sigma2;
        return n;
    }

    double sigma2() const { return sigma2_; }
    bool is_noiseless() const { return sigma2_ == 0.0; }
    double real_stddev() const { return std::sqrt(sigma2_ / 2.0); }

  private:
    double sigma2_ = 0.0;
};

/// Uniform linear array steering vector, half-wavelength spacing:
/// element m has phase pi * m * sin(theta).
inline Eigen::VectorXcd steering_vector(std::ptrdiff_t n, double theta)
{
    Eigen::VectorXcd a(n);
    const double step = std::numbers::pi * std::sin(theta);
    for (std::ptrdiff_t m = 0; m < n; ++m)
        a(m) = std::polar(1.0, step * double(m));
    return a;
}

/// Rank-one far-field LoS matrix a_rx(theta_rx) * a_tx(theta_tx)^H.
inline ComplexMatrix los_matrix(const RiceanConfig& cfg)
{
    cfg.validate();
    return steering_vector(cfg.n_r, cfg.los_angle_rx) * steering_vector(cfg.n_t, cfg.los_angle_tx).adjoint();
}

/// Amplitude multipliers of the LoS and scattered parts, pathloss excluded.
/// Their squares sum to one.
struct RiceanWeights
{
    double los;
    double nlos;
};

inline RiceanWeights ricean_weights(double kappa)
{
    if (std::isinf(kappa))
        return {1.0, 0.0};
    return {std::sqrt(kappa / (1.0 + kappa)), std::sqrt(1.0 / (1.0 + kappa))};
}

/// H = sqrt(k/(1+k)) sqrt(PL) H_LoS + sqrt(1/(1+k)) sqrt(PL) H_NLoS with
/// H_NLoS ~ CN(0, 1) i.i.d.
inline ChannelMatrix sample_ricean(const RiceanConfig& cfg, RngStream& rng)
{
    cfg.validate();
    const auto w = ricean_weights(cfg.kappa);
    const double amplitude = std::sqrt(cfg.pathloss);
    ComplexMatrix nlos = sample_complex_gaussian(rng, cfg.n_r, cfg.n_t);
    ComplexMatrix h = (w.nlos * amplitude) * nlos;
    if (w.los != 0.0)
        h += (w.los * amplitude) * los_matrix(cfg);
    return ChannelMatrix(std::move(h));
}

/// H(k) = eta H(k-1) + (1 - eta) Theta(k), Theta ~ CN(0, I), applied to the
/// whole matrix. The update does not preserve the stationary variance for
/// eta < 1 since eta^2 + (1 - eta)^2 < 1.
inline ChannelMatrix evolve_ar(const ChannelMatrix& prev, const ArConfig& cfg, RngStream& rng)
{
    cfg.validate();
    if (cfg.eta == 1.0)
        return prev;
    ComplexMatrix innovation = sample_complex_gaussian(rng, prev.n_r(), prev.n_t());
    return ChannelMatrix(cfg.eta * prev.complex() + (1.0 - cfg.eta) * innovation);
}

/// y = H^r x + n_r for one transmitted vector.
inline Vector apply_channel(const Matrix& h_real, const Vector& x_tilde, const NoiseModel& noise, RngStream& rng)
{
    if (h_real.cols() != x_tilde.size())
        throw DimensionError("apply_channel: channel has " + std::to_string(h_real.cols()) +
                             " transmit antennas but the signal has " + std::to_string(x_tilde.size()) +
                             " entries");
    Vector y = h_real * x_tilde;
    if (!noise.is_noiseless())
    {
        const double sd = noise.real_stddev();
        for (auto& v : y)
            v += sd * rng.gaussian();
    }
    return y;
}

/// Batched apply_channel: row i of the result is the received vector for row
/// i of x_tilde_rows. Noise is drawn in the same order as calling
/// apply_channel on each row in turn.
inline Matrix apply_channel_rows(const Matrix& h_real, const Matrix& x_tilde_rows, const NoiseModel& noise,
                                 RngStream& rng)
{
    if (h_real.cols() != x_tilde_rows.cols())
        throw DimensionError("apply_channel: channel has " + std::to_string(h_real.cols()) +
                             " transmit antennas but signals have " + std::to_string(x_tilde_rows.cols()) +
                             " entries");
    Matrix y = x_tilde_rows * h_real.transpose();
    if (!noise.is_noiseless())
    {
        const double sd = noise.real_stddev();
        for (std::ptrdiff_t i = 0; i < y.rows(); ++i)
            for (std::ptrdiff_t j = 0; j < y.cols(); ++j)
                y(i, j) += sd * rng.gaussian();
    }
    return y;
}

/// Mean per-antenna received signal power, mean_i ||H^r x_i||^2 / N_r, over
/// the rows of x_tilde_rows.
inline double received_signal_power(const Matrix& h_real, const Matrix& x_tilde_rows)
{
    if (x_tilde_rows.rows() == 0)
        throw DimensionError("received_signal_power: empty signal set");
    if (h_real.cols() != x_tilde_rows.cols())
        throw DimensionError("received_signal_power: signal length does not match channel");
    const Matrix y = x_tilde_rows * h_real.transpose();
    return y.squaredNorm() / double(h_real.rows()) / double(x_tilde_rows.rows());
}

/// Noise variance that puts the receive SNR at snr_db given signal power
/// p_sig. +inf dB returns 0 (noiseless).
///
/// Every level at or above -300 dB is reached from a common anchor by
/// repeated division by 10, so sigma2_for_power(p, s + 10) equals
/// sigma2_for_power(p, s) / 10 bit-exactly. The anchor constant is the double
/// next to 1e30 whose thirtyfold division by 10 gives exactly 1.
inline double sigma2_for_power(double p_sig, double snr_db)
{
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw ConfigError("sigma2_for_snr: snr_db must be a number or +inf");
    if (!(p_sig > 0.0) || !std::isfinite(p_sig))
        throw DegenerateSignalError("sigma2_for_snr: received signal power is zero");
    if (std::isinf(snr_db))
        return 0.0;
    constexpr double anchor = 0x1.93e5939a08ce9p+99;
    const double decades = std::floor(snr_db / 10.0);
    const double rest = snr_db - 10.0 * decades;
    const double scaled = (rest == 0.0 ? p_sig : p_sig / std::pow(10.0, rest / 10.0)) * anchor;
    if (decades < -30.0 || !std::isfinite(scaled))
        return p_sig / std::pow(10.0, snr_db / 10.0);
    double sigma2 = scaled;
    for (double k = -30.0; k < decades; ++k)
        sigma2 /= 10.0;
    return sigma2;
}

inline double sigma2_for_snr(const Matrix& h_real, const Matrix& x_tilde_rows, double snr_db)
{
    return sigma2_for_power(received_signal_power(h_real, x_tilde_rows), snr_db);
}

inline double sigma2_for_snr(const Matrix& h_real, std::span<const Vector> x_tilde_set, double snr_db)
{
    if (x_tilde_set.empty())
        throw DimensionError("sigma2_for_snr: empty signal set");
    Matrix rows(std::ptrdiff_t(x_tilde_set.size()), x_tilde_set.front().size());
    for (std::size_t i = 0; i < x_tilde_set.size(); ++i)
    {
        if (x_tilde_set[i].size() != rows.cols())
            throw DimensionError("sigma2_for_snr: signals have different lengths");
        rows.row(std::ptrdiff_t(i)) = x_tilde_set[i].transpose();
    }
    return sigma2_for_snr(h_real, rows, snr_db);
}

} // namespace xlelm
