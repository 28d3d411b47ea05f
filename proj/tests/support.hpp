#pragma once

#include "mgcn/autodiff.hpp"
#include "mgcn/gradcheck.hpp"
#include "mgcn/matrix.hpp"
#include "mgcn/random.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace mgcn::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(lo, hi);
    return m;
}

using Builder = std::function<ad::Var(const std::vector<ad::Var>&)>;

// Non-scalar outputs are contracted with fixed random weights so every
// output entry contributes to the checked gradient.
inline ad::Var to_scalar(const ad::Var& out) {
    if (out.rows() == 1 && out.cols() == 1) return out;
    Rng rng(0xC0FFEE);
    return ad::sum(ad::hadamard(out, ad::constant(random_matrix(out.rows(), out.cols(), rng, 0.5, 1.5))));
}

/// Largest relative error between backward() and central differences over
/// every entry of every input.
inline double gradient_error(const Builder& f, const std::vector<Matrix>& inputs, double h = 1e-5) {
    std::vector<ad::Var> params;
    for (const auto& m : inputs) params.push_back(ad::parameter(m));
    ad::backward(to_scalar(f(params)));

    double worst = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        ScalarFn g = [&](const Matrix& at) {
            std::vector<ad::Var> args;
            for (std::size_t j = 0; j < inputs.size(); ++j) args.push_back(ad::constant(j == k ? at : inputs[j]));
            return to_scalar(f(args)).scalar();
        };
        worst = std::max(worst, max_relative_error(params[k].grad(), finite_diff_grad(g, inputs[k], h)));
    }
    return worst;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("mgcn_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace mgcn::testing
