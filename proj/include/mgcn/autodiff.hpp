#pragma once

#include "mgcn/matrix.hpp"
#include "mgcn/random.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace mgcn::ad {

struct DiffNode;

/// Local derivative rule: receives the node, the gradient flowing into its
/// output, and one accumulation buffer per parent (nullptr for parents that
/// do not require gradients).
using BackwardFn =
    std::function<void(const DiffNode& self, const Matrix& upstream, std::span<Matrix*> parent_grads)>;

/// One value in a computation graph. Parents are owned, children are not, so
/// a graph is freed as soon as its root handle goes away.
struct DiffNode {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<DiffNode>> parents;
    BackwardFn backward_fn;
    const char* op = "leaf";
};

/// Shared handle to a DiffNode.
class Var {
public:
    Var() = default;
    explicit Var(std::shared_ptr<DiffNode> node) : node_(std::move(node)) {}

    const Matrix& value() const { return node_->value; }
    /// Direct write access to a leaf's value (optimizer updates, checkpoint loads).
    Matrix& mutable_value() { return node_->value; }
    /// Accumulated gradient; zero-filled with the value's shape on first access.
    const Matrix& grad() const;
    Matrix& mutable_grad();
    void zero_grad();

    bool requires_grad() const { return node_->requires_grad; }
    std::size_t rows() const { return node_->value.rows(); }
    std::size_t cols() const { return node_->value.cols(); }
    const std::shared_ptr<DiffNode>& node() const { return node_; }
    explicit operator bool() const { return static_cast<bool>(node_); }

    /// Value of a 1x1 node.
    double scalar() const;

private:
    std::shared_ptr<DiffNode> node_;
};

Var constant(Matrix value);
Var parameter(Matrix value);

/// Accumulates d(root)/d(leaf) into every leaf that requires gradients, and
/// d(root)/d(root) = 1 into the root. Interior nodes keep no gradient. Root
/// must be 1x1. Repeated calls add to existing gradients.
void backward(const Var& root);

// Arithmetic
Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
/// scale * a + shift, elementwise.
Var affine(const Var& a, double scale, double shift = 0.0);
/// s * a where s is 1x1.
Var scalar_mul(const Var& s, const Var& a);
/// a + bias with bias 1 x a.cols broadcast over rows.
Var add_row(const Var& a, const Var& bias);
/// a ⊙ w with w 1 x a.cols broadcast over rows.
Var mul_row(const Var& a, const Var& w);

// Elementwise nonlinearities
/// Rectifier; subgradient at 0 is 0.
Var relu(const Var& a);
Var sigmoid(const Var& a);
Var log(const Var& a);
/// Clamp to [lo, hi]; gradient passes only where the input is strictly inside.
Var clamp(const Var& a, double lo, double hi);

// Reductions and structure
/// Row-wise softmax with per-row max subtraction.
Var softmax_rows(const Var& a);
Var sum(const Var& a);
/// Mean over rows: 1 x a.cols.
Var mean_rows(const Var& a);
/// 1x1 node holding a(r, c).
Var element(const Var& a, std::size_t r, std::size_t c);
/// Sum_k weights(0,k) * terms[k] with weights a 1 x K row.
Var weighted_sum(const Var& weights, std::span<const Var> terms);
Var sum_all(std::span<const Var> terms);

/// D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I. A must be
/// square with nonnegative entries.
Var sym_normalize(const Var& a);

/// Inverted dropout: zeroes each entry with probability `rate` and scales
/// survivors by 1/(1-rate). rate == 0 returns `a` unchanged.
Var dropout(const Var& a, double rate, Rng& rng);

/// -sum_{i in rows} log(max(p(i, labels[i]), floor)).
Var masked_nll(const Var& probs, std::span<const int> labels, std::span<const std::size_t> rows,
               double floor = 1e-12);

/// sum_j [rho ln(rho/rho_hat_j) + (1-rho) ln((1-rho)/(1-rho_hat_j))].
Var kl_sparsity(const Var& rho_hat, double rho);

} // namespace mgcn::ad
