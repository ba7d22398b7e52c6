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
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "xlelm/activation.hpp"
#include "xlelm/channel.hpp"
#include "xlelm/errors.hpp"
#include "xlelm/numkernel.hpp"
#include "xlelm/rng.hpp"

namespace xlelm
{

/// Appends the constant 1 that carries the hidden-layer bias.
inline Vector augment(const Vector& x)
{
    require_finite(x, "augment");
    Vector out(x.size() + 1);
    out.head(x.size()) = x;
    out(x.size()) = 1.0;
    return out;
}

/// Row-wise augment: D x d -> D x (d + 1).
inline Matrix augment_rows(const Matrix& x)
{
    require_finite(x, "augment_rows");
    Matrix out(x.rows(), x.cols() + 1);
    out.leftCols(x.cols()) = x;
    out.col(x.cols()).setOnes();
    return out;
}

struct SigmoidActivation
{
};

using Activation = std::variant<RappParams, SigmoidActivation>;

/// Fixed random hidden layer: weights is N_hidden x (d + 1) with the bias in
/// the last column. For the over-the-air learner the weights are the real
/// channel H^r, the activation is Rapp and noise is the receiver AWGN; for the
/// digital baseline they are uniform draws with a sigmoid and no noise.
struct HiddenLayer
{
    Matrix weights;
    Activation activation = RappParams{};
    NoiseModel noise = NoiseModel::noiseless();

    std::ptrdiff_t n_hidden() const { return weights.rows(); }
    std::ptrdiff_t input_dim() const { return weights.cols() - 1; }
};

inline HiddenLayer channel_hidden_layer(const ChannelMatrix& channel, const RappParams& rapp_params,
                                        NoiseModel noise = NoiseModel::noiseless())
{
    rapp_params.validate();
    if (channel.n_t() < 1)
        throw DimensionError("channel_hidden_layer: channel needs at least the bias antenna");
    return {channel.real(), rapp_params, noise};
}

/// Conventional ELM hidden layer: i.i.d. Uniform[0, 1] weights (bias column
/// included, drawn row-major) with sigmoid activation.
inline HiddenLayer digital_elm_hidden(RngStream& rng, std::ptrdiff_t n_hidden, std::ptrdiff_t d)
{
    if (n_hidden < 1 || d < 0)
        throw ConfigError("digital_elm_hidden: need n_hidden >= 1 and d >= 0");
    Matrix weights(n_hidden, d + 1);
    for (std::ptrdiff_t i = 0; i < weights.rows(); ++i)
        for (std::ptrdiff_t j = 0; j < weights.cols(); ++j)
            weights(i, j) = rng.uniform01();
    return {std::move(weights), SigmoidActivation{}, NoiseModel::noiseless()};
}

inline Matrix activate(const Matrix& pre, const Activation& activation)
{
    return std::visit(
        [&pre](const auto& act) -> Matrix {
            if constexpr (std::is_same_v<std::decay_t<decltype(act)>, RappParams>)
                return rapp_vec(pre, act);
            else
                return sigmoid_vec(pre);
        },
        activation);
}

/// G (D x N_hidden): row i is the activated received vector for sample i.
/// With a noisy layer, fresh noise is drawn for every sample.
inline Matrix hidden_matrix(const HiddenLayer& layer, const Matrix& x, RngStream& rng)
{
    if (x.cols() != layer.input_dim())
        throw DimensionError("hidden_matrix: data has " + std::to_string(x.cols()) + " features, layer expects " +
                             std::to_string(layer.input_dim()));
    return activate(apply_channel_rows(layer.weights, augment_rows(x), layer.noise, rng), layer.activation);
}

/// Closed-form combiner fit.
struct CombinerFit
{
    Vector w;
    double train_residual;
    double receive_power;
};

/// w* = G^+ t, the minimum-norm least-squares combiner.
inline CombinerFit train(const Matrix& g, const Vector& t, double rel_tol = kDefaultPinvTolerance)
{
    require_finite(g, "train");
    Vector w = min_norm_lstsq(g, t, rel_tol);
    const double residual = (g * w - t).norm();
    const double power = w.squaredNorm();
    return {std::move(w), residual, power};
}

/// Trained analog combiner bound to the hidden layer it was fitted on.
class ElmModel
{
  public:
    ElmModel(HiddenLayer hidden, Vector w, double train_residual)
        : hidden_(std::move(hidden)), w_(std::move(w)), train_residual_(train_residual),
          receive_power_(w_.squaredNorm())
    {
        if (w_.size() != hidden_.n_hidden())
            throw DimensionError("ElmModel: combiner length does not match hidden width");
        require_finite(w_, "ElmModel");
    }

    const HiddenLayer& hidden() const { return hidden_; }
    const Vector& weights() const { return w_; }
    double train_residual() const { return train_residual_; }
    /// P_r = ||w||^2.
    double receive_power() const { return receive_power_; }

  private:
    HiddenLayer hidden_;
    Vector w_;
    double train_residual_;
    double receive_power_;
};

inline ElmModel fit(HiddenLayer layer, const Matrix& x, const Vector& t, RngStream& rng,
                    double rel_tol = kDefaultPinvTolerance)
{
    if (x.rows() != t.size())
        throw DimensionError("fit: " + std::to_string(x.rows()) + " samples but " + std::to_string(t.size()) +
                             " targets");
    const Matrix g = hidden_matrix(layer, x, rng);
    auto fitted = train(g, t, rel_tol);
    return ElmModel(std::move(layer), std::move(fitted.w), fitted.train_residual);
}

/// t_hat = G(X) w.
inline Vector predict(const ElmModel& model, const Matrix& x, RngStream& rng)
{
    return hidden_matrix(model.hidden(), x, rng) * model.weights();
}

/// +1 where t_hat >= 0, else -1.
inline Eigen::VectorXi classify(const Vector& t_hat)
{
    require_finite(t_hat, "classify");
    return t_hat.unaryExpr([](double v) { return v >= 0.0 ? 1 : -1; }).cast<int>();
}

/// Fraction of labels equal to the +-1 targets.
inline double accuracy(const Eigen::VectorXi& labels, const Vector& targets)
{
    if (labels.size() != targets.size())
        throw DimensionError("accuracy: size mismatch");
    if (labels.size() == 0)
        throw DimensionError("accuracy: empty label set");
    std::ptrdiff_t hits = 0;
    for (std::ptrdiff_t i = 0; i < labels.size(); ++i)
        hits += (double(labels(i)) == targets(i)) ? 1 : 0;
    return double(hits) / double(labels.size());
}

inline double evaluate_accuracy(const ElmModel& model, const Matrix& x, const Vector& t, RngStream& rng)
{
    return accuracy(classify(predict(model, x, rng)), t);
}

/// Mini-batch re-training after a channel change.
struct OnlineConfig
{
    double gamma = 0.5;
    std::size_t batch_size = 32;
    std::size_t n_iters = 20;
    /// Stop once ||delta w|| / ||w|| drops below this value.
    std::optional<double> early_stop_tol;
    double rel_tol = kDefaultPinvTolerance;

    void validate(std::size_t n_samples) const
    {
        if (!(gamma > 0.0 && gamma < 1.0))
            throw ConfigError("online: gamma must lie in (0, 1)");
        if (batch_size < 1)
            throw ConfigError("online: batch_size must be >= 1");
        if (batch_size > n_samples)
            throw ConfigError("online: batch_size " + std::to_string(batch_size) + " exceeds the " +
                              std::to_string(n_samples) + " available samples");
        if (early_stop_tol && !(*early_stop_tol > 0.0))
            throw ConfigError("online: early_stop_tol must be positive");
    }
};

/// Called after each update with the 1-based iteration index and the current
/// model. The model's train_residual is measured on that iteration's batch.
using OnlineObserver = std::function<void(std::size_t, const ElmModel&)>;

/// Starting from a model fitted under the previous channel, repeatedly draws
/// a batch S without replacement, solves w_S = G_S^+ t_S under the new
/// channel and applies w <- w + gamma w_S. The returned model is bound to
/// h_real_k; its train_residual is evaluated on the full training set.
inline ElmModel online_update(const ElmModel& model, const Matrix& h_real_k, const Matrix& x, const Vector& t,
                              const OnlineConfig& cfg, RngStream& rng, const OnlineObserver& observer = {})
{
    cfg.validate(std::size_t(x.rows()));
    if (x.rows() != t.size())
        throw DimensionError("online_update: sample and target counts differ");
    if (h_real_k.rows() != model.hidden().weights.rows() || h_real_k.cols() != model.hidden().weights.cols())
        throw DimensionError("online_update: new channel shape differs from the fitted one");

    HiddenLayer layer = model.hidden();
    layer.weights = h_real_k;
    Vector w = model.weights();

    Matrix x_batch(std::ptrdiff_t(cfg.batch_size), x.cols());
    Vector t_batch(std::ptrdiff_t(cfg.batch_size));
    for (std::size_t iter = 1; iter <= cfg.n_iters; ++iter)
    {
        const auto idx = rng.sample_without_replacement(std::size_t(x.rows()), cfg.batch_size);
        for (std::size_t b = 0; b < idx.size(); ++b)
        {
            x_batch.row(std::ptrdiff_t(b)) = x.row(std::ptrdiff_t(idx[b]));
            t_batch(std::ptrdiff_t(b)) = t(std::ptrdiff_t(idx[b]));
        }
        const Matrix g_batch = hidden_matrix(layer, x_batch, rng);
        const Vector step = cfg.gamma * min_norm_lstsq(g_batch, t_batch, cfg.rel_tol);
        w += step;
        if (observer)
            observer(iter, ElmModel(layer, w, (g_batch * w - t_batch).norm()));
        if (cfg.early_stop_tol && w.norm() > 0.0 && step.norm() / w.norm() < *cfg.early_stop_tol)
            break;
    }
    const double residual = (hidden_matrix(layer, x, rng) * w - t).norm();
    return ElmModel(std::move(layer), std::move(w), residual);
}

} // namespace xlelm
