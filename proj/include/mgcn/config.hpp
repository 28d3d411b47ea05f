#pragma once

#include "mgcn/dataset.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mgcn {

enum class Variant { full, tc_knn, fe_off, if_weighted_sum, rep_center, rep_density_peak, view_attention };

const std::vector<std::string>& variant_names();
/// Throws ConfigError listing the valid names.
Variant parse_variant(const std::string& name);
std::string to_string(Variant v);

struct TrainConfig {
    double beta = 0.6;
    double gcn_lr = 0.01;
    double sae_lr = 0.001;
    double sae_weight_decay = 0.01;
    double dropout = 0.5;
    double rho = 0.05;
    double gamma = 1e-3;
    double lambda_sae = 1.0;
    std::size_t epochs = 1000;
    std::size_t patience = 200;
    std::size_t knn_k = 10;
    std::uint64_t seed = 0;
    SplitRatios splits;
    Variant variant = Variant::full;

    std::vector<std::size_t> sae_hidden{1024, 256};
    std::size_t gcn_hidden = 64;
    /// Initial alpha; with learn_topology off, alpha and pi stay fixed.
    double alpha = 0.5;
    bool learn_topology = true;
    /// false selects 1 x d fusion weights broadcast over nodes.
    bool per_node_fusion = true;
    bool standardize = false;
    std::size_t sae_pretrain_epochs = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Starts from `base` and overrides every key present in `j`. Unknown keys
/// and wrongly typed values throw ConfigError, as does a result that fails
/// validate().
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
const std::vector<std::string>& train_config_keys();

} // namespace mgcn
