#include "advforge/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace advforge::nn {

void adam_step(ParamStore& params, AdamState& state, int sign) {
    if (sign != 1 && sign != -1) throw std::invalid_argument("adam_step: sign must be +1 or -1");
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (const std::string& name : params.names()) {
        const Tensor& g = params.grad(name);  // throws when missing
        Tensor& value = params.value(name);
        if (!g.same_shape(value))
            throw std::runtime_error("adam_step: gradient shape " + g.shape_str() +
                                     " != value shape " + value.shape_str() + " for '" + name + "'");
        auto mit = state.m.find(name);
        if (mit == state.m.end()) {
            state.m.emplace(name, Tensor::zeros(value.shape));
            state.v.emplace(name, Tensor::zeros(value.shape));
        }
        Tensor& m = state.m.at(name);
        Tensor& v = state.v.at(name);
        m.data = state.beta1 * m.data + (1.0 - state.beta1) * g.data;
        v.data = state.beta2 * v.data + (1.0 - state.beta2) * g.data.square();
        const Eigen::ArrayXd m_hat = m.data / bc1;
        const Eigen::ArrayXd v_hat = v.data / bc2;
        value.data += static_cast<double>(sign) * state.lr * m_hat / (v_hat.sqrt() + state.eps);
    }
}

}  // namespace advforge::nn
