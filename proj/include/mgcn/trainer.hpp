#pragma once

#include "mgcn/checkpoint.hpp"
#include "mgcn/config.hpp"
#include "mgcn/dataset.hpp"
#include "mgcn/granular_ball.hpp"
#include "mgcn/model.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mgcn {

/// Per-view inputs that do not change during training.
struct PreparedData {
    std::vector<ad::Var> features;  // enhanced (or raw for fe_off)
    std::vector<ad::Var> inter;     // granular-ball variants
    std::vector<ad::Var> intra;
    std::vector<ad::Var> knn;       // tc_knn only
    std::vector<GBPartition> partitions;
    /// Union of the per-view edge supports, used for the homophily figure.
    Matrix support;
};

PreparedData prepare(const MultiViewDataset& ds, const TrainConfig& cfg);

/// All trainables of one model instance plus the forward pipeline.
class Network {
public:
    Network(std::size_t n, std::span<const std::size_t> view_dims, int class_count, const TrainConfig& cfg, Rng& rng);
    /// Rebuilds the architecture from the checkpoint config and copies its tensors.
    static Network from_checkpoint(const Checkpoint& ck);

    struct Pass {
        ad::Var a_hat;
        ad::Var fused;    // H fed to the classifier
        GcnOutput gcn;
        ad::Var sae_loss; // sum over views; only set when decoding
    };

    /// `training` enables dropout and the decoder half of every autoencoder.
    Pass forward(const PreparedData& data, bool training, Rng& rng) const;

    std::vector<ad::Var> gcn_group() const;
    std::vector<ad::Var> sae_group() const;
    std::vector<std::pair<std::string, ad::Var>> named_tensors() const;
    Checkpoint snapshot() const;

    /// Sum of the per-view autoencoder losses alone (optional pretraining stage).
    ad::Var autoencoder_loss(const PreparedData& data) const;

    double alpha() const;
    std::vector<double> pi() const;
    const TrainConfig& config() const { return cfg_; }

private:
    ad::Var adjacency(const PreparedData& data) const;

    TrainConfig cfg_;
    std::size_t n_;
    int class_count_;
    std::vector<std::size_t> view_dims_;
    std::vector<SAEParams> sae_;
    std::optional<FusionParams> fusion_;
    GCNParams gcn_;
    ad::Var alpha_logit_;
    ad::Var pi_logits_;
    ad::Var view_logits_;  // if_weighted_sum and view_attention
};

struct Metrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    /// Training loss before each optimizer step.
    std::vector<double> loss_curve;
    /// Validation accuracy and macro-F1 after each step.
    std::vector<double> acc_curve;
    std::vector<double> f1_curve;
    std::vector<double> alpha_curve;
    std::vector<std::vector<double>> pi_curve;
    double homophily = 0.0;
    /// Epoch (0-based) whose post-step parameters were kept.
    std::size_t epoch_of_best = 0;
    std::size_t epochs_run = 0;
    double best_valid_accuracy = 0.0;
    double best_valid_loss = 0.0;
};

struct Classification {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
};

/// Accuracy and unweighted mean of per-class F1 over all `class_count`
/// classes, restricted to `mask`. A class with no predictions and no members
/// contributes F1 = 0.
Classification classification_metrics(std::span<const int> predicted, std::span<const int> labels,
                                       std::span<const std::size_t> mask, int class_count);

/// Row-wise argmax, ties to the lowest class index.
std::vector<int> predict_labels(const Matrix& probs);

struct TrainResult {
    Checkpoint checkpoint;
    Metrics metrics;
    SplitMask splits;
    /// Classifier hidden layer (N x gcn_hidden) of the kept parameters.
    Matrix embedding;
};

/// Joint training of autoencoders, fusion, topology scalars and classifier.
/// Throws NumericalError naming the epoch if the loss stops being finite.
TrainResult train(const MultiViewDataset& ds, const TrainConfig& cfg);

struct Evaluation {
    Metrics metrics;
    Matrix probs;
    Matrix embedding;
};

/// Pure: the same checkpoint, dataset and mask always give identical output.
Evaluation evaluate_full(const Checkpoint& ck, const MultiViewDataset& ds, std::span<const std::size_t> mask);
Metrics evaluate(const Checkpoint& ck, const MultiViewDataset& ds, std::span<const std::size_t> mask);

struct AblationReport {
    Variant variant = Variant::full;
    Metrics full;
    Metrics ablated;
};

AblationReport ablate(const MultiViewDataset& ds, const TrainConfig& cfg, Variant variant);

struct BetaPoint {
    double beta = 0.0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
};

/// One training run for each beta in {0.0, 0.1, ..., 1.0}.
std::vector<BetaPoint> sweep_beta(const MultiViewDataset& ds, const TrainConfig& cfg);

nlohmann::json metrics_to_json(const Metrics& m);
void write_json(const nlohmann::json& j, const std::filesystem::path& path);
/// Columns: epoch, loss, acc, f1, alpha, pi_0 ... pi_{V-1}.
void write_curves_csv(const Metrics& m, const std::filesystem::path& path);

} // namespace mgcn
