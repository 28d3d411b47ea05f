#include "mgcn/topology.hpp"

#include "mgcn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mgcn {

Matrix intra_adjacency(const GBPartition& p) {
    Matrix a(p.n, p.n);
    for (const auto& ball : p.balls)
        for (std::size_t i : ball.members)
            for (std::size_t j : ball.members)
                if (i != j) a(i, j) = 1.0;
    return a;
}

Matrix inter_adjacency(const GBPartition& p, const Matrix& x) {
    Matrix a(p.n, p.n);
    const std::size_t m = p.balls.size();
    if (m < 2) return a;
    for (std::size_t I = 0; I < m; ++I) {
        auto rep_i = x.row_span(p.balls[I].representative);
        std::size_t nearest = I;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t J = 0; J < m; ++J) {
            if (J == I) continue;
            const double d = squared_distance(rep_i, x.row_span(p.balls[J].representative));
            if (d < best) {
                best = d;
                nearest = J;
            }
        }
        for (std::size_t i : p.balls[I].members) {
            for (std::size_t j : p.balls[nearest].members) {
                a(i, j) = 1.0;
                a(j, i) = 1.0;
            }
        }
    }
    return a;
}

Matrix fuse_view(double alpha, const Matrix& inter, const Matrix& intra) {
    require_same_shape(inter, intra, "fuse_view");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("fuse_view: alpha must be in [0, 1]");
    Matrix out(inter.rows(), inter.cols());
    auto o = out.data();
    auto a = inter.data();
    auto b = intra.data();
    for (std::size_t k = 0; k < o.size(); ++k) o[k] = alpha * a[k] + (1.0 - alpha) * b[k];
    return out;
}

ad::Var fuse_view(const ad::Var& alpha, const ad::Var& inter, const ad::Var& intra) {
    require_same_shape(inter.value(), intra.value(), "fuse_view");
    return ad::add(ad::scalar_mul(alpha, inter), ad::scalar_mul(ad::affine(alpha, -1.0, 1.0), intra));
}

TopologyParams TopologyParams::uniform(std::size_t views, double alpha, bool learnable) {
    TopologyParams p;
    p.alpha_logit = logit(alpha);
    p.pi_logits.assign(views, 0.0);
    p.learnable = learnable;
    return p;
}

double TopologyParams::alpha() const { return logistic(alpha_logit); }

std::vector<double> TopologyParams::pi() const { return softmax(pi_logits); }

double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("logit: probability must be in (0, 1)");
    return std::log(p / (1.0 - p));
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) return {};
    const double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return out;
}

Matrix fuse_views(const TopologyParams& params, std::span<const Matrix> per_view) {
    if (per_view.empty()) throw ContractError("fuse_views: no views");
    if (params.pi_logits.size() != per_view.size()) {
        throw DimensionError("fuse_views: " + std::to_string(params.pi_logits.size()) + " logits for " +
                             std::to_string(per_view.size()) + " views");
    }
    const auto weights = params.pi();
    Matrix out(per_view[0].rows(), per_view[0].cols());
    for (std::size_t v = 0; v < per_view.size(); ++v) {
        require_same_shape(out, per_view[v], "fuse_views");
        auto o = out.data();
        auto a = per_view[v].data();
        for (std::size_t k = 0; k < o.size(); ++k) o[k] += weights[v] * a[k];
    }
    return out;
}

ad::Var fuse_views(const ad::Var& pi_logits, std::span<const ad::Var> per_view) {
    if (per_view.empty()) throw ContractError("fuse_views: no views");
    for (const auto& a : per_view) require_same_shape(per_view[0].value(), a.value(), "fuse_views");
    return ad::weighted_sum(ad::softmax_rows(pi_logits), per_view);
}

Matrix normalize_adjacency(const Matrix& a) {
    return ad::sym_normalize(ad::constant(a)).value();
}

double homophily_ratio(const Matrix& a, std::span<const int> labels) {
    if (a.rows() != a.cols() || a.rows() != labels.size()) {
        throw DimensionError("homophily_ratio: adjacency " + a.shape_string() + " with " +
                             std::to_string(labels.size()) + " labels");
    }
    std::size_t edges = 0;
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            if (a(i, j) > 0.0) {
                ++edges;
                same += labels[i] == labels[j] ? 1 : 0;
            }
        }
    }
    if (edges == 0) throw ContractError("homophily_ratio: graph has no edges");
    return static_cast<double>(same) / static_cast<double>(edges);
}

std::size_t edge_count(const Matrix& a) {
    std::size_t edges = 0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) edges += a(i, j) > 0.0 ? 1 : 0;
    return edges;
}

Matrix knn_adjacency(const Matrix& x, std::size_t k) {
    const std::size_t n = x.rows();
    if (k < 1 || k + 1 > n) {
        throw ConfigError("knn_adjacency: k must be in [1, " + std::to_string(n == 0 ? 0 : n - 1) + "], got " +
                          std::to_string(k));
    }
    Matrix a(n, n);
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        order.clear();
        for (std::size_t j = 0; j < n; ++j) {
            dist[j] = squared_distance(x.row_span(i), x.row_span(j));
            if (j != i) order.push_back(j);
        }
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                          [&](std::size_t p, std::size_t q) { return dist[p] < dist[q] || (dist[p] == dist[q] && p < q); });
        for (std::size_t r = 0; r < k; ++r) {
            a(i, order[r]) = 1.0;
            a(order[r], i) = 1.0;
        }
    }
    return a;
}

Matrix elementwise_max(std::span<const Matrix> ms) {
    if (ms.empty()) throw ContractError("elementwise_max: no matrices");
    Matrix out = ms[0];
    for (std::size_t k = 1; k < ms.size(); ++k) {
        require_same_shape(out, ms[k], "elementwise_max");
        auto o = out.data();
        auto b = ms[k].data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::max(o[i], b[i]);
    }
    return out;
}

} // namespace mgcn
