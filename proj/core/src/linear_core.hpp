#pragma once

// Shared evaluation kernel for the linear forecasters. The single-window forward passes,
// the batched trainer and the gradient code all go through evaluate(), so a model scores
// a window identically no matter which entry point is used.

#include <span>
#include <vector>

#include "edboard/models.hpp"

namespace edboard::models::detail {

/// Per-sample model inputs derived from raw windows:
///   NLinear centred:   a = x - x[L], offset = x[L]
///   NLinear uncentred: a = x
///   DLinear:           a = trend, b = residual
struct Inputs {
    std::size_t n = 0;
    std::size_t channels = 0;
    std::size_t lag = 0;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> offset;
};

Inputs prepare_inputs(const ModelConfig& cfg, const WindowedDataset& data);
Inputs prepare_inputs(const ModelConfig& cfg, WindowView window);

/// Model output for sample i; writes the per-channel outputs u_c when `u` is non-empty.
double evaluate(const FittedModel& m, const Inputs& in, std::size_t i, std::span<double> u = {});

/// Adds d(loss)/d(params) * scale for sample i to `grad` (flatten() order), given the
/// derivative of the loss with respect to the output.
void accumulate_gradient(const FittedModel& m, const Inputs& in, std::size_t i,
                         std::span<const double> u, double dloss_dy, std::span<double> grad);

double sample_loss(double residual, const LossSpec& loss);
double sample_loss_derivative(double residual, const LossSpec& loss);

void check_shapes(const FittedModel& m, std::size_t channels, std::size_t lag);

}  // namespace edboard::models::detail
