#include "mgcn/autodiff.hpp"

#include "mgcn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace mgcn::ad {

namespace {

Var make_node(Matrix value, std::vector<Var> parents, BackwardFn fn, const char* op) {
    auto node = std::make_shared<DiffNode>();
    node->value = std::move(value);
    node->op = op;
    node->requires_grad =
        std::any_of(parents.begin(), parents.end(), [](const Var& p) { return p.requires_grad(); });
    if (node->requires_grad) {
        node->parents.reserve(parents.size());
        for (auto& p : parents) node->parents.push_back(p.node());
        node->backward_fn = std::move(fn);
    }
    return Var(std::move(node));
}

const Matrix& parent_value(const DiffNode& self, std::size_t i) { return self.parents[i]->value; }

void add_into(Matrix* dst, const Matrix& src) {
    if (dst) *dst += src;
}

} // namespace

const Matrix& Var::grad() const {
    if (node_->grad.empty()) node_->grad = Matrix(rows(), cols());
    return node_->grad;
}

Matrix& Var::mutable_grad() {
    if (node_->grad.empty()) node_->grad = Matrix(rows(), cols());
    return node_->grad;
}

void Var::zero_grad() {
    if (!node_->grad.empty()) node_->grad.fill(0.0);
}

double Var::scalar() const {
    if (rows() != 1 || cols() != 1) {
        throw ContractError("scalar(): node is " + value().shape_string() + ", not 1x1");
    }
    return value()(0, 0);
}

Var constant(Matrix value) {
    auto node = std::make_shared<DiffNode>();
    node->value = std::move(value);
    node->op = "constant";
    return Var(std::move(node));
}

Var parameter(Matrix value) {
    auto node = std::make_shared<DiffNode>();
    node->grad = Matrix(value.rows(), value.cols());
    node->value = std::move(value);
    node->requires_grad = true;
    node->op = "parameter";
    return Var(std::move(node));
}

void backward(const Var& root) {
    if (root.rows() != 1 || root.cols() != 1) {
        throw ContractError("backward: root must be 1x1, got " + root.value().shape_string());
    }
    if (!root.requires_grad()) return;

    // Iterative post-order DFS gives a topological order (parents before children).
    std::vector<DiffNode*> order;
    std::unordered_set<DiffNode*> visited;
    std::vector<std::pair<DiffNode*, std::size_t>> stack;
    stack.emplace_back(root.node().get(), 0);
    visited.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, next_parent] = stack.back();
        if (next_parent < node->parents.size()) {
            DiffNode* p = node->parents[next_parent++].get();
            if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    // Gradients of this pass live in scratch buffers and are added to the
    // persistent grads at the end, so repeated passes accumulate exactly.
    std::unordered_map<DiffNode*, Matrix> scratch;
    scratch.emplace(root.node().get(), Matrix(1, 1, 1.0));
    std::vector<Matrix*> parent_bufs;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        DiffNode* node = *it;
        auto found = scratch.find(node);
        if (found == scratch.end()) continue;
        if (node->backward_fn) {
            parent_bufs.assign(node->parents.size(), nullptr);
            for (std::size_t i = 0; i < node->parents.size(); ++i) {
                DiffNode* p = node->parents[i].get();
                if (!p->requires_grad) continue;
                auto [slot, inserted] = scratch.try_emplace(p);
                if (inserted) slot->second = Matrix(p->value.rows(), p->value.cols());
                parent_bufs[i] = &slot->second;
            }
            node->backward_fn(*node, found->second, parent_bufs);
            // interior gradients are dead once propagated; only the root keeps one
            if (node != root.node().get()) scratch.erase(found);
        }
    }
    for (auto& [node, g] : scratch) {
        if (node->grad.empty()) {
            node->grad = std::move(g);
        } else {
            node->grad += g;
        }
    }
}

Var matmul(const Var& a, const Var& b) {
    Matrix out = mgcn::matmul(a.value(), b.value());
    return make_node(std::move(out), {a, b},
                     [](const DiffNode& self, const Matrix& g, std::span<Matrix*> pg) {
                         if (pg[0]) add_matmul_nt(*pg[0], g, parent_value(self, 1));
                         if (pg[1]) add_matmul_tn(*pg[1], parent_value(self, 0), g);
                     },
                     "matmul");
}

Var add(const Var& a, const Var& b) {
    require_same_shape(a.value(), b.value(), "add");
    return make_node(a.value() + b.value(), {a, b},
                     [](const DiffNode&, const Matrix& g, std::span<Matrix*> pg) {
                         add_into(pg[0], g);
                         add_into(pg[1], g);
                     },
                     "add");
}

Var sub(const Var& a, const Var& b) {
    require_same_shape(a.value(), b.value(), "sub");
    return make_node(a.value() - b.value(), {a, b},
                     [](const DiffNode&, const Matrix& g, std::span<Matrix*> pg) {
                         add_into(pg[0], g);
                         if (pg[1]) *pg[1] -= g;
                     },
                     "sub");
}

Var hadamard(const Var& a, const Var& b) {
    return make_node(mgcn::hadamard(a.value(), b.value()), {a, b},
                     [](const DiffNode& self, const Matrix& g, std::span<Matrix*> pg) {
                         if (pg[0]) *pg[0] += mgcn::hadamard(g, parent_value(self, 1));
                         if (pg[1]) *pg[1] += mgcn::hadamard(g, parent_value(self, 0));
                     },
                     "hadamard");
}

Var affine(const Var& a, double scale, double shift) {
    Matrix out = a.value();
    for (double& v : out.data()) v = scale * v + shift;
    return make_node(std::move(out), {a},
                     [scale](const DiffNode&, const Matrix& g, std::span<Matrix*> pg) {
                         if (pg[0]) *pg[0] += g * scale;
                     },
                     "affine");
}

Var scalar_mul(const Var& s, const Var& a) {
    const double k = s.scalar();
    return make_node(a.value() * k, {s, a},
                     [](const DiffNode& self, const Matrix& g, std::span<Matrix*> pg) {
                         const Matrix& av = parent_value(self, 1);
                         if (pg[0]) {
                             double acc = 0.0;
                             auto gd = g.data();
                             auto ad = av.data();
                             for (std::size_t i = 0; i < gd.size(); ++i) acc += gd[i] * ad[i];
                             (*pg[0])(0, 0) += acc;
                         }
                         if (pg[1]) *pg[1] += g * parent_value(self, 0)(0, 0);
                     },
                     "scalar_mul");
}

Var add_row(const Var& a, const Var& bias) {
    if (bias.rows() != 1 || bias.cols() != a.cols()) {
        throw DimensionError("add_row: bias " + bias.value().shape_string() +
                             " does not broadcast over " + a.value().shape_string());
    }
    Matrix out = a.value();
    const Matrix& b = bias.value();
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += b(0, c);
    return make_node(std::move(out), {a, bias},
                     [](const DiffNode&, const Matrix& g, std::span<Matrix*> pg) {
                         add_into(pg[0], g);
                         if (pg[1]) {
                             Matrix& gb = *pg[1];
                             for (std::size_t r = 0; r < g.rows(); ++r)
                                 for (std::size_t c = 0; c < g.cols(); ++c) gb(0, c) += g(r, c);
                         }
                     },
                     "add_row");
}

Var mul_row(const Var& a, const Var& w) {
    if (w.rows() != 1 || w.cols() != a.cols()) {
        throw DimensionError("mul_row: weights " + w.value().shape_string() +
                             " do not broadcast over " + a.value().shape_string());
    }
    Matrix out = a.value();
    const Matrix& wv = w.value();
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) *= wv(0, c);
    return make_node(std::move(out), {a, w},
                     [](const DiffNode& self, const Matrix& g, std::span<Matrix*> pg) {
                         const Matrix& av = parent_value(self, 0);
                         const Matrix& wv = parent_value(self, 1);
                         for (std::size_t r = 0; r < g.rows(); ++r) {
                             for (std::size_t c = 0; c < g.cols(); ++c) {
                                 if (pg[0]) (*pg[0])(r, c) += g(r, c) * wv(0, c);
                                 if (pg[1]) (*pg[1])(0, c) += g(r, c) * av(r, c);
                             }
                         }
                     },
                     "mul_row");
}

Var relu(const Var& a) {
    Matrix out = a.value();
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return make_node(std::move(out), {a},
                     [](const DiffNode& self, const Matrix& g, std::span<Matrix*> pg) {
                         if (!pg[0]) return;
                         auto x = parent_value(self, 0).data();
                         auto gd = g.data();
                         auto dst = pg[0]->data();
                         for (std::size_t i = 0; i < gd.size(); ++i) dst[i] += x[i] > 0.0 ? gd[i] : 0.0;
                     },
                     "relu");
}

Var sigmoid(const Var& a) {
    Matrix out = a.value();
    for (double& v : out.data()) {
        v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
    }
    return make_node(std::move(out), {a},
                     [](const DiffNode& self, const Matrix& g, std::span<Matrix*> pg) {
                         if (!pg[0]) return;
                         auto y = self.value.data();
                         auto gd = g.data();
                         auto dst = pg[0]->data();
                         for (std::size_t i = 0; i < gd.size(); ++i)
                             dst[i] += gd[i] * y[i] * (1.0 - y[i]);
                     },
                     "sigmoid");
}

Var log(const Var& a) {
    Matrix out = a.value();
    for (double& v : out.data()) {
        if (!(v > 0.0)) throw ContractError("log: non-positive input");
        v = std::log(v);
    }
    return make_node(std::move(out), {a},
                     [](const DiffNode& self, const Matrix& g, std::span<Matrix*> pg) {
                         if (!pg[0]) return;
                         auto x = parent_value(self, 0).data();
                         auto gd = g.data();
                         auto dst = pg[0]->data();
                         for (std::size_t i = 0; i < gd.size(); ++i) dst[i] += gd[i] / x[i];
                     },
                     "log");
}

Var clamp(const Var& a, double lo, double hi) {
    Matrix out = a.value();
    for (double& v : out.data()) v = std::clamp(v, lo, hi);
    return make_node(std::move(out), {a},
                     [lo, hi](const DiffNode& self, const Matrix& g, std::span<Matrix*> pg) {
                         if (!pg[0]) return;
                         auto x = parent_value(self, 0).data();
                         auto gd = g.data();
                         auto dst = pg[0]->data();
                         for (std::size_t i = 0; i < gd.size(); ++i)
                             if (x[i] > lo && x[i] < hi) dst[i] += gd[i];
                     },
                     "clamp");
}

Var softmax_rows(const Var& a) {
    Matrix out = a.value();
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row_span(r);
        const double m = *std::max_element(row.begin(), row.end());
        double z = 0.0;
        for (double& v : row) {
            v = std::exp(v - m);
            z += v;
        }
        for (double& v : row) v /= z;
    }
    return make_node(std::move(out), {a},
                     [](const DiffNode& self, const Matrix& g, std::span<Matrix*> pg) {
                         if (!pg[0]) return;
                         const Matrix& y = self.value;
                         for (std::size_t r = 0; r < y.rows(); ++r) {
                             double dot = 0.0;
                             for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
                             for (std::size_t c = 0; c < y.cols(); ++c)
                                 (*pg[0])(r, c) += y(r, c) * (g(r, c) - dot);
                         }
                     },
                     "softmax_rows");
}

Var sum(const Var& a) {
    return make_node(Matrix(1, 1, mgcn::sum(a.value())), {a},
                     [](const DiffNode&, const Matrix& g, std::span<Matrix*> pg) {
                         if (!pg[0]) return;
                         const double s = g(0, 0);
                         for (double& v : pg[0]->data()) v += s;
                     },
                     "sum");
}

Var mean_rows(const Var& a) {
    const Matrix& x = a.value();
    Matrix out(1, x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r)
        for (std::size_t c = 0; c < x.cols(); ++c) out(0, c) += x(r, c);
    out *= 1.0 / static_cast<double>(x.rows());
    return make_node(std::move(out), {a},
                     [](const DiffNode&, const Matrix& g, std::span<Matrix*> pg) {
                         if (!pg[0]) return;
                         Matrix& dst = *pg[0];
                         const double inv = 1.0 / static_cast<double>(dst.rows());
                         for (std::size_t r = 0; r < dst.rows(); ++r)
                             for (std::size_t c = 0; c < dst.cols(); ++c) dst(r, c) += g(0, c) * inv;
                     },
                     "mean_rows");
}

Var element(const Var& a, std::size_t r, std::size_t c) {
    if (r >= a.rows() || c >= a.cols()) {
        throw DimensionError("element: index (" + std::to_string(r) + "," + std::to_string(c) +
                             ") outside " + a.value().shape_string());
    }
    return make_node(Matrix(1, 1, a.value()(r, c)), {a},
                     [r, c](const DiffNode&, const Matrix& g, std::span<Matrix*> pg) {
                         if (pg[0]) (*pg[0])(r, c) += g(0, 0);
                     },
                     "element");
}

Var weighted_sum(const Var& weights, std::span<const Var> terms) {
    if (terms.empty()) throw ContractError("weighted_sum: no terms");
    if (weights.rows() != 1 || weights.cols() != terms.size()) {
        throw DimensionError("weighted_sum: weights " + weights.value().shape_string() + " for " +
                             std::to_string(terms.size()) + " terms");
    }
    Var acc = scalar_mul(element(weights, 0, 0), terms[0]);
    for (std::size_t k = 1; k < terms.size(); ++k) {
        acc = add(acc, scalar_mul(element(weights, 0, k), terms[k]));
    }
    return acc;
}

Var sum_all(std::span<const Var> terms) {
    if (terms.empty()) throw ContractError("sum_all: no terms");
    Var acc = terms[0];
    for (std::size_t k = 1; k < terms.size(); ++k) acc = add(acc, terms[k]);
    return acc;
}

Var sym_normalize(const Var& a) {
    const Matrix& x = a.value();
    if (x.rows() != x.cols()) {
        throw DimensionError("sym_normalize: adjacency must be square, got " + x.shape_string());
    }
    const std::size_t n = x.rows();
    std::vector<double> inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 1.0;
        for (std::size_t j = 0; j < n; ++j) d += x(i, j);
        if (!(d > 0.0)) throw ContractError("sym_normalize: non-positive degree (negative entries?)");
        inv_sqrt[i] = 1.0 / std::sqrt(d);
    }
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out(i, j) = (x(i, j) + (i == j ? 1.0 : 0.0)) * inv_sqrt[i] * inv_sqrt[j];
    return make_node(std::move(out), {a},
                     [inv_sqrt = std::move(inv_sqrt)](const DiffNode& self, const Matrix& g,
                                                       std::span<Matrix*> pg) {
                         if (!pg[0]) return;
                         const Matrix& x = parent_value(self, 0);
                         const std::size_t n = x.rows();
                         auto tilde = [&](std::size_t i, std::size_t j) {
                             return x(i, j) + (i == j ? 1.0 : 0.0);
                         };
                         // d out_ij / d s_i and / d s_j, then chain through s = d^{-1/2}.
                         std::vector<double> grad_deg(n, 0.0);
                         for (std::size_t i = 0; i < n; ++i) {
                             double gs = 0.0;
                             for (std::size_t j = 0; j < n; ++j) {
                                 gs += g(i, j) * tilde(i, j) * inv_sqrt[j];
                                 gs += g(j, i) * tilde(j, i) * inv_sqrt[j];
                             }
                             const double s = inv_sqrt[i];
                             grad_deg[i] = gs * (-0.5) * s * s * s;
                         }
                         Matrix& dst = *pg[0];
                         for (std::size_t k = 0; k < n; ++k)
                             for (std::size_t l = 0; l < n; ++l)
                                 dst(k, l) += g(k, l) * inv_sqrt[k] * inv_sqrt[l] + grad_deg[k];
                     },
                     "sym_normalize");
}

Var dropout(const Var& a, double rate, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) {
        throw ConfigError("dropout: rate must be in [0, 1), got " + std::to_string(rate));
    }
    if (rate == 0.0) return a;
    const double keep_scale = 1.0 / (1.0 - rate);
    Matrix mask(a.rows(), a.cols());
    for (double& m : mask.data()) m = rng.uniform() < rate ? 0.0 : keep_scale;
    Matrix out = mgcn::hadamard(a.value(), mask);
    return make_node(std::move(out), {a},
                     [mask = std::move(mask)](const DiffNode&, const Matrix& g, std::span<Matrix*> pg) {
                         if (pg[0]) *pg[0] += mgcn::hadamard(g, mask);
                     },
                     "dropout");
}

Var masked_nll(const Var& probs, std::span<const int> labels, std::span<const std::size_t> rows,
               double floor) {
    if (rows.empty()) throw ContractError("masked_nll: empty mask");
    const Matrix& p = probs.value();
    if (labels.size() != p.rows()) {
        throw DimensionError("masked_nll: " + std::to_string(labels.size()) + " labels for " +
                             p.shape_string() + " predictions");
    }
    double loss = 0.0;
    for (std::size_t r : rows) {
        if (r >= p.rows()) throw ContractError("masked_nll: mask index out of range");
        const int y = labels[r];
        if (y < 0 || static_cast<std::size_t>(y) >= p.cols()) {
            throw ContractError("masked_nll: label out of range");
        }
        loss -= std::log(std::max(p(r, static_cast<std::size_t>(y)), floor));
    }
    std::vector<std::size_t> idx(rows.begin(), rows.end());
    std::vector<int> ys;
    ys.reserve(idx.size());
    for (std::size_t r : idx) ys.push_back(labels[r]);
    return make_node(Matrix(1, 1, loss), {probs},
                     [idx = std::move(idx), ys = std::move(ys), floor](
                         const DiffNode& self, const Matrix& g, std::span<Matrix*> pg) {
                         if (!pg[0]) return;
                         const Matrix& p = parent_value(self, 0);
                         for (std::size_t k = 0; k < idx.size(); ++k) {
                             const auto c = static_cast<std::size_t>(ys[k]);
                             const double v = p(idx[k], c);
                             if (v > floor) (*pg[0])(idx[k], c) -= g(0, 0) / v;
                         }
                     },
                     "masked_nll");
}

Var kl_sparsity(const Var& rho_hat, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("kl_sparsity: rho must be in (0, 1)");
    double total = 0.0;
    for (double q : rho_hat.value().data()) {
        if (!(q > 0.0 && q < 1.0)) throw ContractError("kl_sparsity: rho_hat outside (0, 1)");
        total += rho * std::log(rho / q) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - q));
    }
    return make_node(Matrix(1, 1, total), {rho_hat},
                     [rho](const DiffNode& self, const Matrix& g, std::span<Matrix*> pg) {
                         if (!pg[0]) return;
                         auto q = parent_value(self, 0).data();
                         auto dst = pg[0]->data();
                         for (std::size_t i = 0; i < q.size(); ++i)
                             dst[i] += g(0, 0) * (-rho / q[i] + (1.0 - rho) / (1.0 - q[i]));
                     },
                     "kl_sparsity");
}

} // namespace mgcn::ad
