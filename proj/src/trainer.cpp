#include "mgcn/trainer.hpp"

#include "mgcn/errors.hpp"
#include "mgcn/feature_enhance.hpp"
#include "mgcn/optim.hpp"
#include "mgcn/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace mgcn {

namespace {

RepresentativeStrategy strategy_for(Variant v) {
    switch (v) {
    case Variant::rep_center: return RepresentativeStrategy::center;
    case Variant::rep_density_peak: return RepresentativeStrategy::density_peak;
    default: return RepresentativeStrategy::medoid;
    }
}

bool uses_view_logits(Variant v) { return v == Variant::if_weighted_sum || v == Variant::view_attention; }

} // namespace

PreparedData prepare(const MultiViewDataset& ds, const TrainConfig& cfg) {
    ds.validate();
    PreparedData out;
    std::vector<Matrix> supports;
    for (const Matrix& view : ds.views) {
        const Matrix raw = cfg.standardize ? standardize_columns(view) : view;
        out.features.push_back(ad::constant(cfg.variant == Variant::fe_off ? raw : enhance_features(raw, cfg.beta)));
        if (cfg.variant == Variant::tc_knn) {
            Matrix knn = knn_adjacency(raw, cfg.knn_k);
            supports.push_back(knn);
            out.knn.push_back(ad::constant(std::move(knn)));
        } else {
            GBPartition p = generate_gbs(raw, strategy_for(cfg.variant));
            Matrix inter = inter_adjacency(p, raw);
            Matrix intra = intra_adjacency(p);
            supports.push_back(elementwise_max(std::vector<Matrix>{inter, intra}));
            out.inter.push_back(ad::constant(std::move(inter)));
            out.intra.push_back(ad::constant(std::move(intra)));
            out.partitions.push_back(std::move(p));
        }
    }
    out.support = elementwise_max(supports);
    return out;
}

Network::Network(std::size_t n, std::span<const std::size_t> view_dims, int class_count, const TrainConfig& cfg,
                 Rng& rng)
    : cfg_(cfg), n_(n), class_count_(class_count), view_dims_(view_dims.begin(), view_dims.end()) {
    cfg_.validate();
    if (view_dims_.empty()) throw ContractError("Network: no views");
    if (class_count < 2) throw ContractError("Network: need at least two classes");
    for (std::size_t d : view_dims_) sae_.push_back(make_sae(d, cfg_.sae_hidden, rng));
    const std::size_t code = cfg_.sae_hidden.back();
    gcn_ = make_gcn(code, cfg_.gcn_hidden, static_cast<std::size_t>(class_count), cfg_.dropout, rng);
    if (cfg_.variant != Variant::if_weighted_sum) fusion_ = make_fusion(n, code, cfg_.per_node_fusion);

    const bool learn_alpha = cfg_.learn_topology && cfg_.variant != Variant::tc_knn;
    Matrix alpha(1, 1, logit(cfg_.alpha));
    alpha_logit_ = learn_alpha ? ad::parameter(alpha) : ad::constant(alpha);
    Matrix pi(1, view_dims_.size());
    pi_logits_ = cfg_.learn_topology ? ad::parameter(pi) : ad::constant(pi);
    if (uses_view_logits(cfg_.variant)) view_logits_ = ad::parameter(Matrix(1, view_dims_.size()));
}

Network Network::from_checkpoint(const Checkpoint& ck) {
    Rng unused(0);
    Network net(ck.n, ck.view_dims, ck.class_count, ck.config, unused);
    const auto named = net.named_tensors();
    if (named.size() != ck.tensors.size()) {
        throw ContractError("checkpoint holds " + std::to_string(ck.tensors.size()) + " tensors, model expects " +
                            std::to_string(named.size()));
    }
    for (auto [name, var] : named) {
        const Matrix& m = ck.tensor(name);
        if (!m.same_shape(var.value())) {
            throw ContractError("checkpoint tensor '" + name + "' is " + m.shape_string() + ", model expects " +
                                var.value().shape_string());
        }
        var.mutable_value() = m;
    }
    return net;
}

ad::Var Network::autoencoder_loss(const PreparedData& data) const {
    std::vector<ad::Var> losses;
    for (std::size_t v = 0; v < sae_.size(); ++v) {
        SaeOutput out = sae_forward(data.features[v], sae_[v]);
        losses.push_back(sae_loss(out.reconstruction, data.features[v], out.rho_hat, cfg_.rho, cfg_.gamma));
    }
    return ad::sum_all(losses);
}

ad::Var Network::adjacency(const PreparedData& data) const {
    if (cfg_.variant == Variant::tc_knn) return fuse_views(pi_logits_, data.knn);
    const ad::Var alpha = ad::sigmoid(alpha_logit_);
    std::vector<ad::Var> per_view;
    for (std::size_t v = 0; v < data.inter.size(); ++v) per_view.push_back(fuse_view(alpha, data.inter[v], data.intra[v]));
    return fuse_views(pi_logits_, per_view);
}

Network::Pass Network::forward(const PreparedData& data, bool training, Rng& rng) const {
    if (data.features.size() != sae_.size()) {
        throw DimensionError("Network: " + std::to_string(data.features.size()) + " views for a model with " +
                             std::to_string(sae_.size()));
    }
    Pass pass;
    pass.a_hat = ad::sym_normalize(adjacency(data));

    std::vector<ad::Var> encodings;
    std::vector<ad::Var> sae_losses;
    for (std::size_t v = 0; v < sae_.size(); ++v) {
        SaeOutput out = sae_forward(data.features[v], sae_[v], training);
        encodings.push_back(out.encoding);
        if (training) sae_losses.push_back(sae_loss(out.reconstruction, data.features[v], out.rho_hat, cfg_.rho, cfg_.gamma));
    }
    if (training) pass.sae_loss = ad::sum_all(sae_losses);

    switch (cfg_.variant) {
    case Variant::if_weighted_sum:
        pass.fused = ad::weighted_sum(ad::softmax_rows(view_logits_), encodings);
        break;
    case Variant::view_attention: {
        const ad::Var weights = ad::softmax_rows(view_logits_);
        std::vector<ad::Var> scaled;
        for (std::size_t v = 0; v < encodings.size(); ++v)
            scaled.push_back(ad::scalar_mul(ad::element(weights, 0, v), encodings[v]));
        pass.fused = shared_fuse(scaled, *fusion_);
        break;
    }
    default: {
        const auto interactions = interact(encodings);
        pass.fused = shared_fuse(interactions, *fusion_);
    }
    }
    pass.gcn = gcn_forward(pass.a_hat, pass.fused, gcn_, training, rng);
    return pass;
}

std::vector<ad::Var> Network::gcn_group() const {
    std::vector<ad::Var> out = gcn_.trainables();
    if (fusion_) {
        out.push_back(fusion_->weight);
        out.push_back(fusion_->bias);
    }
    if (alpha_logit_.requires_grad()) out.push_back(alpha_logit_);
    if (pi_logits_.requires_grad()) out.push_back(pi_logits_);
    if (view_logits_) out.push_back(view_logits_);
    return out;
}

std::vector<ad::Var> Network::sae_group() const {
    std::vector<ad::Var> out;
    for (const auto& p : sae_) {
        auto t = p.trainables();
        out.insert(out.end(), t.begin(), t.end());
    }
    return out;
}

std::vector<std::pair<std::string, ad::Var>> Network::named_tensors() const {
    std::vector<std::pair<std::string, ad::Var>> out;
    for (std::size_t v = 0; v < sae_.size(); ++v) {
        for (std::size_t l = 0; l < sae_[v].layers.size(); ++l) {
            const std::string prefix = "sae." + std::to_string(v) + ".";
            out.emplace_back(prefix + "w" + std::to_string(l), sae_[v].layers[l].weight);
            out.emplace_back(prefix + "b" + std::to_string(l), sae_[v].layers[l].bias);
        }
    }
    if (fusion_) {
        out.emplace_back("fusion.w", fusion_->weight);
        out.emplace_back("fusion.b", fusion_->bias);
    }
    out.emplace_back("gcn.w1", gcn_.w1);
    out.emplace_back("gcn.w2", gcn_.w2);
    out.emplace_back("topology.alpha_logit", alpha_logit_);
    out.emplace_back("topology.pi_logits", pi_logits_);
    if (view_logits_) out.emplace_back("attention.logits", view_logits_);
    return out;
}

Checkpoint Network::snapshot() const {
    Checkpoint ck;
    ck.config = cfg_;
    ck.n = n_;
    ck.class_count = class_count_;
    ck.view_dims = view_dims_;
    for (const auto& [name, var] : named_tensors()) ck.tensors.emplace_back(name, var.value());
    return ck;
}

double Network::alpha() const { return logistic(alpha_logit_.value()(0, 0)); }

std::vector<double> Network::pi() const { return softmax(pi_logits_.value().data()); }

std::vector<int> predict_labels(const Matrix& probs) {
    std::vector<int> out(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs.cols(); ++c)
            if (probs(i, c) > probs(i, best)) best = c;
        out[i] = static_cast<int>(best);
    }
    return out;
}

Classification classification_metrics(std::span<const int> predicted, std::span<const int> labels,
                                       std::span<const std::size_t> mask, int class_count) {
    if (predicted.size() != labels.size()) throw DimensionError("classification_metrics: prediction/label count mismatch");
    if (mask.empty()) throw ContractError("classification_metrics: empty mask");
    if (class_count < 1) throw ContractError("classification_metrics: class_count must be >= 1");
    std::vector<std::size_t> tp(class_count, 0), fp(class_count, 0), fn(class_count, 0);
    std::size_t correct = 0;
    for (std::size_t i : mask) {
        if (i >= labels.size()) throw ContractError("classification_metrics: mask index out of range");
        const int p = predicted[i];
        const int y = labels[i];
        if (p < 0 || p >= class_count || y < 0 || y >= class_count)
            throw ContractError("classification_metrics: class index out of range");
        if (p == y) {
            ++correct;
            ++tp[y];
        } else {
            ++fp[p];
            ++fn[y];
        }
    }
    double f1_sum = 0.0;
    for (int c = 0; c < class_count; ++c) {
        const double denom = 2.0 * static_cast<double>(tp[c]) + static_cast<double>(fp[c] + fn[c]);
        f1_sum += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
    }
    return {static_cast<double>(correct) / static_cast<double>(mask.size()), f1_sum / class_count};
}

Evaluation evaluate_full(const Checkpoint& ck, const MultiViewDataset& ds, std::span<const std::size_t> mask) {
    if (ds.n() != ck.n || ds.view_dims() != ck.view_dims || ds.class_count != ck.class_count) {
        std::string dims;
        for (std::size_t d : ck.view_dims) dims += (dims.empty() ? "" : ",") + std::to_string(d);
        throw DimensionError("checkpoint expects N=" + std::to_string(ck.n) + ", view dims [" + dims +
                             "], C=" + std::to_string(ck.class_count) + "; dataset '" + ds.name + "' does not match");
    }
    const PreparedData data = prepare(ds, ck.config);
    const Network net = Network::from_checkpoint(ck);
    Rng unused(0);
    const auto pass = net.forward(data, false, unused);

    Evaluation ev;
    ev.probs = pass.gcn.probs.value();
    ev.embedding = pass.gcn.hidden.value();
    const auto cls = classification_metrics(predict_labels(ev.probs), ds.labels, mask, ds.class_count);
    ev.metrics.accuracy = cls.accuracy;
    ev.metrics.macro_f1 = cls.macro_f1;
    ev.metrics.homophily = edge_count(data.support) ? homophily_ratio(data.support, ds.labels) : 0.0;
    return ev;
}

Metrics evaluate(const Checkpoint& ck, const MultiViewDataset& ds, std::span<const std::size_t> mask) {
    return evaluate_full(ck, ds, mask).metrics;
}

TrainResult train(const MultiViewDataset& ds, const TrainConfig& cfg) {
    cfg.validate();
    ds.validate();
    TrainResult result;
    result.splits = make_splits(ds, cfg.splits, cfg.seed);
    const SplitMask& splits = result.splits;
    if (splits.valid.empty()) throw ConfigError("validation split is empty; raise valid_ratio");
    if (splits.test.empty()) throw ConfigError("test split is empty; raise test_ratio");

    const PreparedData data = prepare(ds, cfg);
    Rng init_rng(derive_seed(cfg.seed, 1));
    Rng dropout_rng(derive_seed(cfg.seed, 2));
    Network net(ds.n(), ds.view_dims(), ds.class_count, cfg, init_rng);

    auto gcn_params = net.gcn_group();
    auto sae_params = net.sae_group();
    OptimState gcn_state;
    gcn_state.learning_rate = cfg.gcn_lr;
    OptimState sae_state;
    sae_state.learning_rate = cfg.sae_lr;
    sae_state.weight_decay = cfg.sae_weight_decay;

    if (cfg.sae_pretrain_epochs > 0) {
        OptimState pre_state = sae_state;
        for (std::size_t e = 0; e < cfg.sae_pretrain_epochs; ++e) {
            const ad::Var loss = net.autoencoder_loss(data);
            if (!std::isfinite(loss.scalar()))
                throw NumericalError("non-finite autoencoder loss at pretraining epoch " + std::to_string(e));
            ad::backward(loss);
            adam_step(sae_params, pre_state);
        }
    }

    Metrics& m = result.metrics;
    std::vector<Matrix> best_values;
    double best_acc = -1.0;
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto pass = net.forward(data, true, dropout_rng);
        ad::Var total = ce_loss(pass.gcn.probs, ds.labels, splits.train);
        if (cfg.lambda_sae != 0.0) total = ad::add(total, ad::affine(pass.sae_loss, cfg.lambda_sae));
        const double loss = total.scalar();
        if (!std::isfinite(loss)) throw NumericalError("non-finite loss at epoch " + std::to_string(epoch));
        ad::backward(total);
        adam_step(gcn_params, gcn_state);
        adam_step(sae_params, sae_state);

        const auto eval = net.forward(data, false, dropout_rng);
        const double valid_loss = ce_loss(eval.gcn.probs, ds.labels, splits.valid).scalar();
        const auto cls =
            classification_metrics(predict_labels(eval.gcn.probs.value()), ds.labels, splits.valid, ds.class_count);

        m.loss_curve.push_back(loss);
        m.acc_curve.push_back(cls.accuracy);
        m.f1_curve.push_back(cls.macro_f1);
        m.alpha_curve.push_back(net.alpha());
        m.pi_curve.push_back(net.pi());
        m.epochs_run = epoch + 1;

        if (cls.accuracy > best_acc || (cls.accuracy == best_acc && valid_loss < best_loss)) {
            best_acc = cls.accuracy;
            best_loss = valid_loss;
            m.epoch_of_best = epoch;
            best_values.clear();
            for (const auto& [name, var] : net.named_tensors()) best_values.push_back(var.value());
            since_best = 0;
        } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
            break;
        }
    }

    auto named = net.named_tensors();
    for (std::size_t k = 0; k < named.size(); ++k) named[k].second.mutable_value() = best_values[k];
    m.best_valid_accuracy = best_acc;
    m.best_valid_loss = best_loss;

    result.checkpoint = net.snapshot();
    Evaluation ev = evaluate_full(result.checkpoint, ds, splits.test);
    m.accuracy = ev.metrics.accuracy;
    m.macro_f1 = ev.metrics.macro_f1;
    m.homophily = ev.metrics.homophily;
    result.embedding = std::move(ev.embedding);
    return result;
}

AblationReport ablate(const MultiViewDataset& ds, const TrainConfig& cfg, Variant variant) {
    AblationReport report;
    report.variant = variant;
    TrainConfig base = cfg;
    base.variant = Variant::full;
    report.full = train(ds, base).metrics;
    if (variant == Variant::full) {
        report.ablated = report.full;
    } else {
        TrainConfig alt = cfg;
        alt.variant = variant;
        report.ablated = train(ds, alt).metrics;
    }
    return report;
}

std::vector<BetaPoint> sweep_beta(const MultiViewDataset& ds, const TrainConfig& cfg) {
    std::vector<BetaPoint> out;
    for (int k = 0; k <= 10; ++k) {
        TrainConfig c = cfg;
        c.beta = k / 10.0;
        const auto r = train(ds, c);
        out.push_back({c.beta, r.metrics.accuracy, r.metrics.macro_f1});
    }
    return out;
}

nlohmann::json metrics_to_json(const Metrics& m) {
    return {{"accuracy", m.accuracy},
            {"macro_f1", m.macro_f1},
            {"homophily", m.homophily},
            {"epoch_of_best", m.epoch_of_best},
            {"epochs_run", m.epochs_run},
            {"best_valid_accuracy", m.best_valid_accuracy},
            {"best_valid_loss", m.best_valid_loss},
            {"loss_curve", m.loss_curve},
            {"acc_curve", m.acc_curve},
            {"f1_curve", m.f1_curve}};
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DatasetError("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw DatasetError("failed writing " + path.string());
}

void write_curves_csv(const Metrics& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DatasetError("cannot write " + path.string());
    const std::size_t views = m.pi_curve.empty() ? 0 : m.pi_curve.front().size();
    out << "epoch,loss,acc,f1,alpha";
    for (std::size_t v = 0; v < views; ++v) out << ",pi_" << v;
    out << '\n';
    for (std::size_t e = 0; e < m.loss_curve.size(); ++e) {
        out << e << ',' << format_double(m.loss_curve[e]) << ',' << format_double(m.acc_curve[e]) << ','
            << format_double(m.f1_curve[e]) << ',' << format_double(m.alpha_curve[e]);
        for (double p : m.pi_curve[e]) out << ',' << format_double(p);
        out << '\n';
    }
    if (!out) throw DatasetError("failed writing " + path.string());
}

} // namespace mgcn
