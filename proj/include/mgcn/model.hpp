#pragma once

#include "mgcn/autodiff.hpp"
#include "mgcn/random.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mgcn {

enum class Activation { relu, identity };

ad::Var activate(const ad::Var& x, Activation act);

/// Uniform Glorot initialization in [-a, a], a = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

struct SaeLayer {
    ad::Var weight;  // d_{l-1} x d_l
    ad::Var bias;    // 1 x d_l
};

/// Mirrored encoder/decoder: d -> hidden[0] -> ... -> hidden.back() -> ... -> d.
struct SAEParams {
    std::vector<SaeLayer> layers;
    Activation hidden_activation = Activation::relu;
    /// The reconstruction layer is linear so that signed features can be reproduced.
    Activation output_activation = Activation::identity;

    std::size_t encoder_depth() const { return layers.size() / 2; }
    std::size_t input_dim() const { return layers.front().weight.rows(); }
    std::size_t code_dim() const { return layers[encoder_depth() - 1].weight.cols(); }
    std::vector<ad::Var> trainables() const;
};

SAEParams make_sae(std::size_t input_dim, std::span<const std::size_t> hidden, Rng& rng);

struct SaeOutput {
    ad::Var encoding;        // N x code_dim
    ad::Var reconstruction;  // N x input_dim (empty when decoding was skipped)
    ad::Var rho_hat;         // 1 x code_dim mean squashed bottleneck activation
};

/// Runs the autoencoder. rho_hat is the column mean of the logistic of the
/// bottleneck pre-activations, clamped to [1e-6, 1 - 1e-6].
SaeOutput sae_forward(const ad::Var& x, const SAEParams& p, bool decode = true);

/// 0.5 * ||reconstruction - x||_F^2 + gamma * KL(rho || rho_hat).
ad::Var sae_loss(const ad::Var& reconstruction, const ad::Var& x, const ad::Var& rho_hat, double rho, double gamma);

/// C^v = sum_{v' != v} H^v ⊙ H^{v'}. A single view yields a zero matrix.
std::vector<ad::Var> interact(std::span<const ad::Var> encodings);

struct FusionParams {
    ad::Var weight;  // N x d (per node) or 1 x d (broadcast)
    ad::Var bias;
    Activation activation = Activation::relu;

    bool per_node() const { return weight.rows() != 1 || bias.rows() != 1; }
    std::vector<ad::Var> trainables() const { return {weight, bias}; }
};

/// Weights start at one and biases at zero, so the initial fusion is act(sum C^v).
/// `per_node = false` gives the broadcast 1 x d variant.
FusionParams make_fusion(std::size_t n, std::size_t d, bool per_node = true);

/// H = sum_v act(C^v ⊙ W + b).
ad::Var shared_fuse(std::span<const ad::Var> interactions, const FusionParams& p);

struct GCNParams {
    ad::Var w1;  // d x h
    ad::Var w2;  // h x C
    double dropout = 0.5;
    Activation hidden_activation = Activation::relu;

    std::vector<ad::Var> trainables() const { return {w1, w2}; }
};

GCNParams make_gcn(std::size_t in_dim, std::size_t hidden, std::size_t classes, double dropout, Rng& rng);

struct GcnOutput {
    ad::Var hidden;  // act(Â H W1), N x h
    ad::Var logits;  // Â hidden W2, N x C
    ad::Var probs;   // row softmax of logits
};

/// Two propagation layers. Dropout (on the input and on the hidden layer)
/// is only applied when `training`.
GcnOutput gcn_forward(const ad::Var& a_hat, const ad::Var& h, const GCNParams& p, bool training, Rng& rng);

/// Sum over masked nodes of -log p(true class), probabilities floored at 1e-12.
ad::Var ce_loss(const ad::Var& probs, std::span<const int> labels, std::span<const std::size_t> mask);

} // namespace mgcn
