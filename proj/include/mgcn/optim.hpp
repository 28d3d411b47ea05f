#pragma once

#include "mgcn/autodiff.hpp"
#include "mgcn/matrix.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mgcn {

/// Adaptive-moment state with decoupled weight decay for one parameter group.
struct OptimState {
    double learning_rate = 1e-3;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t step = 0;
    std::vector<Matrix> first_moment;
    std::vector<Matrix> second_moment;
};

/// One update of every parameter from its accumulated gradient, then zeroes
/// the gradients. Moments are created on the first call; afterwards their
/// shapes must match the parameters or ContractError is thrown.
void adam_step(std::span<ad::Var> params, OptimState& state);

} // namespace mgcn
