// SPDX-License-Identifier: MIT

/**
 * @file gradcheck.hpp
 * @brief Analytic encoder gradients and a central finite-difference check.
 */

#pragma once

#include "qapr/errors.hpp"
#include "qapr/nn/encoder.hpp"
#include "qapr/nn/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace qapr::nn {

enum class LossKind : std::uint8_t { SumLogits, Value };

/**
 * weight * loss and its gradient with respect to every parameter tensor.
 * `grad` may be null when only the loss is needed.
 */
inline double loss_and_grad(const EncoderInput& in, const EncoderParams& p, LossKind kind, double weight,
                            EncoderParams* grad) {
    Tape t;
    EncoderGraph g(t, p);
    const auto o = g.forward(in);
    const Var raw = kind == LossKind::SumLogits ? t.sum(o.logits) : t.sum(o.value);
    const double loss = weight * t.value(raw).v[0];
    if (!std::isfinite(loss)) {
        throw NonFinite("loss is not finite");
    }
    if (grad != nullptr) {
        t.backward(raw, weight);
        *grad = p.zeros_like();
        for (std::size_t i = 0; i < p.tensors.size(); ++i) {
            grad->tensors[i] = t.grad(g.param(i));
            if (!grad->tensors[i].all_finite()) {
                throw NonFinite("gradient is not finite");
            }
        }
    }
    return loss;
}

struct GradProbe {
    std::size_t tensor = 0;
    std::size_t entry = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::vector<GradProbe> probes;
};

/// |a - n| / max(|a|, |n|, floor); the floor keeps near-zero coordinates from dominating.
[[nodiscard]] inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
    return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), floor});
}

/**
 * Generic check: `loss(params, grad_out)` returns the loss and, when grad_out is
 * non-null, fills it with one gradient tensor per parameter tensor.
 */
using LossFn = std::function<double(const std::vector<Mat>&, std::vector<Mat>*)>;

[[nodiscard]] inline GradCheckReport grad_check(const LossFn& loss, std::vector<Mat> params, std::size_t probe_count,
                                                std::uint64_t seed, double step = 1e-5, double floor = 1e-6) {
    if (params.empty()) {
        throw EmptyInput("no parameters to probe");
    }
    std::vector<Mat> grads;
    (void)loss(params, &grads);
    if (grads.size() != params.size()) {
        throw ShapeMismatch("loss returned the wrong number of gradient tensors");
    }
    std::vector<std::size_t> weights;
    for (const auto& m : params) {
        weights.push_back(m.size());
    }
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick_tensor(weights.begin(), weights.end());
    GradCheckReport rep;
    for (std::size_t k = 0; k < probe_count; ++k) {
        const std::size_t ti = pick_tensor(rng);
        const std::size_t ei = std::uniform_int_distribution<std::size_t>(0, params[ti].size() - 1)(rng);
        double& x = params[ti].v[ei];
        const double saved = x;
        x = saved + step;
        const double up = loss(params, nullptr);
        x = saved - step;
        const double down = loss(params, nullptr);
        x = saved;
        GradProbe pr{ti, ei, grads[ti].v[ei], (up - down) / (2.0 * step), 0.0};
        if (!std::isfinite(pr.numeric) || !std::isfinite(pr.analytic)) {
            throw NonFinite("gradient probe is not finite");
        }
        pr.rel_error = relative_error(pr.analytic, pr.numeric, floor);
        rep.max_rel_error = std::max(rep.max_rel_error, pr.rel_error);
        rep.probes.push_back(pr);
    }
    return rep;
}

/// Encoder check over `probe_count` random parameter coordinates.
[[nodiscard]] inline GradCheckReport grad_check(const EncoderInput& in, const EncoderParams& p, LossKind kind,
                                                std::size_t probe_count, std::uint64_t seed, double weight = 1.0,
                                                double step = 1e-5) {
    if (probe_count < 20) {
        throw ConfigError("gradient check needs at least 20 probes");
    }
    LossFn fn = [&](const std::vector<Mat>& tensors, std::vector<Mat>* grad_out) {
        EncoderParams q{p.layout, tensors};
        if (grad_out == nullptr) {
            return loss_and_grad(in, q, kind, weight, nullptr);
        }
        EncoderParams g;
        const double l = loss_and_grad(in, q, kind, weight, &g);
        *grad_out = std::move(g.tensors);
        return l;
    };
    return grad_check(fn, p.tensors, probe_count, seed, step);
}

} // namespace qapr::nn
