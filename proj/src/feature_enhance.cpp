#include "mgcn/feature_enhance.hpp"

#include "mgcn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace mgcn {

Matrix feature_similarity(const Matrix& f) {
    const std::size_t d = f.cols();
    std::vector<double> norms(d, 0.0);
    for (std::size_t r = 0; r < f.rows(); ++r)
        for (std::size_t c = 0; c < d; ++c) norms[c] += f(r, c) * f(r, c);
    for (double& n : norms) n = std::sqrt(n);

    Matrix unit = f;
    for (std::size_t r = 0; r < f.rows(); ++r)
        for (std::size_t c = 0; c < d; ++c) unit(r, c) = norms[c] > 0.0 ? f(r, c) / norms[c] : 0.0;

    Matrix s = matmul_tn(unit, unit);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (norms[i] == 0.0 || norms[j] == 0.0) {
                s(i, j) = 0.0;
            } else if (i == j) {
                s(i, j) = 1.0;
            } else {
                s(i, j) = std::clamp(s(i, j), -1.0, 1.0);
            }
        }
    }
    // exact symmetry regardless of summation order in the product
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) s(j, i) = s(i, j);
    return s;
}

Matrix similarity_features(const Matrix& x, const Matrix& s) {
    if (x.cols() != s.rows()) {
        throw DimensionError("similarity_features: features " + x.shape_string() + " vs similarity " +
                             s.shape_string());
    }
    return matmul(x, s);
}

Matrix mixed_pool(const Matrix& x, const Matrix& xs, double beta) {
    require_same_shape(x, xs, "mixed_pool");
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw ConfigError("mixed_pool: beta must be in [0, 1], got " + std::to_string(beta));
    }
    Matrix out(x.rows(), x.cols());
    auto o = out.data();
    auto a = x.data();
    auto b = xs.data();
    for (std::size_t k = 0; k < o.size(); ++k) {
        // mean + beta * (max - mean) is exact when x == xs
        const double mean = 0.5 * (a[k] + b[k]);
        o[k] = mean + beta * (std::max(a[k], b[k]) - mean);
    }
    return out;
}

Matrix enhance_features(const Matrix& x, double beta) {
    return mixed_pool(x, similarity_features(x, feature_similarity(x)), beta);
}

} // namespace mgcn
