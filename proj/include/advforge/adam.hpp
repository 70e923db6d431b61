#pragma once

#include <map>
#include <string>

#include "advforge/param_store.hpp"

namespace advforge::nn {

/// Adam moment accumulators plus hyperparameters; one instance per network.
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step_count = 0;
    std::map<std::string, Tensor> m;  // first moments
    std::map<std::string, Tensor> v;  // second moments

    explicit AdamState(double learning_rate = 1e-3) : lr(learning_rate) {}
};

/// One Adam update over every parameter in the store. sign = -1 descends
/// (detector), sign = +1 ascends (synthesizer, score-function update).
/// Requires gradients to be present for all parameters.
void adam_step(ParamStore& params, AdamState& state, int sign);

}  // namespace advforge::nn
