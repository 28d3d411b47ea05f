#include "mgcn/optim.hpp"

#include "mgcn/errors.hpp"

#include <cmath>
#include <string>

namespace mgcn {

void adam_step(std::span<ad::Var> params, OptimState& state) {
    if (state.first_moment.empty() && state.second_moment.empty()) {
        for (const auto& p : params) {
            state.first_moment.emplace_back(p.rows(), p.cols());
            state.second_moment.emplace_back(p.rows(), p.cols());
        }
    }
    if (state.first_moment.size() != params.size() || state.second_moment.size() != params.size()) {
        throw ContractError("adam_step: state tracks " + std::to_string(state.first_moment.size()) +
                            " parameters, got " + std::to_string(params.size()));
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (!state.first_moment[k].same_shape(params[k].value()) ||
            !state.second_moment[k].same_shape(params[k].value())) {
            throw ContractError("adam_step: moment shape " + state.first_moment[k].shape_string() +
                                " does not match parameter " + params[k].value().shape_string());
        }
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double bias1 = 1.0 - std::pow(state.beta1, t);
    const double bias2 = 1.0 - std::pow(state.beta2, t);
    const double decay = 1.0 - state.learning_rate * state.weight_decay;

    for (std::size_t k = 0; k < params.size(); ++k) {
        auto value = params[k].mutable_value().data();
        auto grad = params[k].mutable_grad().data();
        auto m = state.first_moment[k].data();
        auto v = state.second_moment[k].data();
        for (std::size_t i = 0; i < value.size(); ++i) {
            const double g = grad[i];
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
            const double m_hat = m[i] / bias1;
            const double v_hat = v[i] / bias2;
            value[i] = value[i] * decay - state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
        params[k].zero_grad();
    }
}

} // namespace mgcn
