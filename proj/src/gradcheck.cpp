#include "mgcn/gradcheck.hpp"

#include "mgcn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mgcn {

Matrix finite_diff_grad(const ScalarFn& f, const Matrix& at, double h) {
    if (!(h > 0.0)) throw ConfigError("finite_diff_grad: step must be positive");
    Matrix grad(at.rows(), at.cols());
    Matrix probe = at;
    auto p = probe.data();
    auto g = grad.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double original = p[i];
        p[i] = original + h;
        const double up = f(probe);
        p[i] = original - h;
        const double down = f(probe);
        p[i] = original;
        g[i] = (up - down) / (2.0 * h);
    }
    return grad;
}

double max_relative_error(const Matrix& a, const Matrix& b, double floor) {
    require_same_shape(a, b, "max_relative_error");
    double worst = 0.0;
    auto ad = a.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < ad.size(); ++i) {
        const double scale = std::max({std::abs(ad[i]), std::abs(bd[i]), floor});
        worst = std::max(worst, std::abs(ad[i] - bd[i]) / scale);
    }
    return worst;
}

} // namespace mgcn
