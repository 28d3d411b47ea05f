#pragma once

#include "mgcn/matrix.hpp"

#include <functional>

namespace mgcn {

using ScalarFn = std::function<double(const Matrix&)>;

/// Central-difference gradient (f(x+h e_ij) - f(x-h e_ij)) / 2h for every entry.
Matrix finite_diff_grad(const ScalarFn& f, const Matrix& at, double h = 1e-5);

/// max_ij |a_ij - b_ij| / max(|a_ij|, |b_ij|, floor). The floor keeps entries
/// whose true gradient is zero from dividing finite-difference noise by ~0.
double max_relative_error(const Matrix& a, const Matrix& b, double floor = 1e-6);

} // namespace mgcn
