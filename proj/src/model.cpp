#include "mgcn/model.hpp"

#include "mgcn/errors.hpp"

#include <cmath>
#include <string>

namespace mgcn {

ad::Var activate(const ad::Var& x, Activation act) {
    return act == Activation::relu ? ad::relu(x) : x;
}

Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (double& v : w.data()) v = rng.uniform(-limit, limit);
    return w;
}

std::vector<ad::Var> SAEParams::trainables() const {
    std::vector<ad::Var> out;
    for (const auto& layer : layers) {
        out.push_back(layer.weight);
        out.push_back(layer.bias);
    }
    return out;
}

SAEParams make_sae(std::size_t input_dim, std::span<const std::size_t> hidden, Rng& rng) {
    if (hidden.empty()) throw ConfigError("make_sae: at least one hidden width required");
    std::vector<std::size_t> widths{input_dim};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    for (std::size_t k = hidden.size() - 1; k-- > 0;) widths.push_back(hidden[k]);
    widths.push_back(input_dim);

    SAEParams p;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        p.layers.push_back({ad::parameter(glorot_uniform(widths[l], widths[l + 1], rng)),
                            ad::parameter(Matrix(1, widths[l + 1]))});
    }
    return p;
}

SaeOutput sae_forward(const ad::Var& x, const SAEParams& p, bool decode) {
    if (p.layers.empty() || p.layers.size() % 2 != 0) throw ContractError("sae_forward: malformed layer stack");
    if (x.cols() != p.input_dim()) {
        throw DimensionError("sae_forward: input width " + std::to_string(x.cols()) + " but autoencoder expects " +
                             std::to_string(p.input_dim()));
    }
    SaeOutput out;
    ad::Var h = x;
    const std::size_t depth = decode ? p.layers.size() : p.encoder_depth();
    for (std::size_t l = 0; l < depth; ++l) {
        const auto& layer = p.layers[l];
        ad::Var pre = ad::add_row(ad::matmul(h, layer.weight), layer.bias);
        const bool last = l + 1 == p.layers.size();
        h = activate(pre, last ? p.output_activation : p.hidden_activation);
        if (l + 1 == p.encoder_depth()) {
            out.encoding = h;
            out.rho_hat = ad::clamp(ad::mean_rows(ad::sigmoid(pre)), 1e-6, 1.0 - 1e-6);
        }
    }
    if (decode) out.reconstruction = h;
    return out;
}

ad::Var sae_loss(const ad::Var& reconstruction, const ad::Var& x, const ad::Var& rho_hat, double rho, double gamma) {
    ad::Var residual = ad::sub(reconstruction, x);
    ad::Var loss = ad::affine(ad::sum(ad::hadamard(residual, residual)), 0.5);
    if (gamma != 0.0) loss = ad::add(loss, ad::affine(ad::kl_sparsity(rho_hat, rho), gamma));
    return loss;
}

std::vector<ad::Var> interact(std::span<const ad::Var> encodings) {
    if (encodings.empty()) throw ContractError("interact: no views");
    const std::size_t views = encodings.size();
    for (const auto& h : encodings) require_same_shape(encodings[0].value(), h.value(), "interact");
    if (views == 1) return {ad::constant(Matrix(encodings[0].rows(), encodings[0].cols()))};

    // c^(v,v') = c^(v',v); each product is built once and shared.
    std::vector<std::vector<ad::Var>> pair(views, std::vector<ad::Var>(views));
    for (std::size_t v = 0; v < views; ++v) {
        for (std::size_t w = v + 1; w < views; ++w) {
            pair[v][w] = ad::hadamard(encodings[v], encodings[w]);
            pair[w][v] = pair[v][w];
        }
    }
    std::vector<ad::Var> out;
    for (std::size_t v = 0; v < views; ++v) {
        std::vector<ad::Var> terms;
        for (std::size_t w = 0; w < views; ++w)
            if (w != v) terms.push_back(pair[v][w]);
        out.push_back(ad::sum_all(terms));
    }
    return out;
}

FusionParams make_fusion(std::size_t n, std::size_t d, bool per_node) {
    const std::size_t rows = per_node ? n : 1;
    return {ad::parameter(Matrix(rows, d, 1.0)), ad::parameter(Matrix(rows, d)), Activation::relu};
}

ad::Var shared_fuse(std::span<const ad::Var> interactions, const FusionParams& p) {
    if (interactions.empty()) throw ContractError("shared_fuse: no views");
    std::vector<ad::Var> terms;
    for (const auto& c : interactions) {
        ad::Var z;
        if (p.per_node()) {
            if (!c.value().same_shape(p.weight.value()) || !c.value().same_shape(p.bias.value())) {
                throw ContractError("shared_fuse: interaction " + c.value().shape_string() +
                                    " does not match shared weights " + p.weight.value().shape_string() +
                                    " (parameters belong to a different node set)");
            }
            z = ad::add(ad::hadamard(c, p.weight), p.bias);
        } else {
            z = ad::add_row(ad::mul_row(c, p.weight), p.bias);
        }
        terms.push_back(activate(z, p.activation));
    }
    return ad::sum_all(terms);
}

GCNParams make_gcn(std::size_t in_dim, std::size_t hidden, std::size_t classes, double dropout, Rng& rng) {
    if (hidden < 1) throw ConfigError("make_gcn: hidden width must be >= 1");
    return {ad::parameter(glorot_uniform(in_dim, hidden, rng)), ad::parameter(glorot_uniform(hidden, classes, rng)),
            dropout, Activation::relu};
}

GcnOutput gcn_forward(const ad::Var& a_hat, const ad::Var& h, const GCNParams& p, bool training, Rng& rng) {
    if (a_hat.rows() != a_hat.cols() || a_hat.rows() != h.rows()) {
        throw DimensionError("gcn_forward: adjacency " + a_hat.value().shape_string() + " with features " +
                             h.value().shape_string());
    }
    const double rate = training ? p.dropout : 0.0;
    GcnOutput out;
    ad::Var x = ad::dropout(h, rate, rng);
    out.hidden = activate(ad::matmul(a_hat, ad::matmul(x, p.w1)), p.hidden_activation);
    ad::Var hidden = ad::dropout(out.hidden, rate, rng);
    out.logits = ad::matmul(a_hat, ad::matmul(hidden, p.w2));
    out.probs = ad::softmax_rows(out.logits);
    return out;
}

ad::Var ce_loss(const ad::Var& probs, std::span<const int> labels, std::span<const std::size_t> mask) {
    if (mask.empty()) throw ContractError("ce_loss: empty mask");
    return ad::masked_nll(probs, labels, mask, 1e-12);
}

} // namespace mgcn
