#include "mgcn/config.hpp"

#include "mgcn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <type_traits>

namespace mgcn {

const std::vector<std::string>& variant_names() {
    static const std::vector<std::string> names{"full",       "tc_knn",           "fe_off",        "if_weighted_sum",
                                                "rep_center", "rep_density_peak", "view_attention"};
    return names;
}

Variant parse_variant(const std::string& name) {
    const auto& names = variant_names();
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        std::string list;
        for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
        throw ConfigError("unknown variant '" + name + "'; valid variants: " + list);
    }
    return static_cast<Variant>(it - names.begin());
}

std::string to_string(Variant v) { return variant_names()[static_cast<std::size_t>(v)]; }

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid config: " + what);
}

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

} // namespace

void TrainConfig::validate() const {
    require(in_unit(beta), "beta must be in [0, 1]");
    require(gcn_lr > 0.0 && std::isfinite(gcn_lr), "gcn_lr must be positive");
    require(sae_lr > 0.0 && std::isfinite(sae_lr), "sae_lr must be positive");
    require(sae_weight_decay >= 0.0 && sae_weight_decay * sae_lr < 1.0, "sae_weight_decay must be in [0, 1/sae_lr)");
    require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
    require(rho > 0.0 && rho < 1.0, "rho must be in (0, 1)");
    require(gamma >= 0.0 && std::isfinite(gamma), "gamma must be >= 0");
    require(lambda_sae >= 0.0 && std::isfinite(lambda_sae), "lambda_sae must be >= 0");
    require(epochs >= 1, "epochs must be >= 1");
    require(knn_k >= 1, "knn_k must be >= 1");
    require(splits.train > 0.0 && splits.valid > 0.0 && splits.test > 0.0 &&
                splits.train + splits.valid + splits.test <= 1.0 + 1e-9,
            "split ratios must be positive and sum to at most 1");
    require(!sae_hidden.empty(), "sae_hidden must list at least one width");
    for (std::size_t w : sae_hidden) require(w >= 1, "sae_hidden widths must be >= 1");
    require(gcn_hidden >= 1, "gcn_hidden must be >= 1");
    require(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
}

const std::vector<std::string>& train_config_keys() {
    static const std::vector<std::string> keys{
        "beta",        "gcn_lr",     "sae_lr",      "sae_weight_decay", "dropout",        "rho",
        "gamma",       "lambda_sae", "epochs",      "patience",         "knn_k",          "seed",
        "train_ratio", "valid_ratio", "test_ratio", "variant",          "sae_hidden",     "gcn_hidden",
        "alpha",       "learn_topology", "per_node_fusion", "standardize", "sae_pretrain_epochs"};
    return keys;
}

nlohmann::json to_json(const TrainConfig& c) {
    return {{"beta", c.beta},
            {"gcn_lr", c.gcn_lr},
            {"sae_lr", c.sae_lr},
            {"sae_weight_decay", c.sae_weight_decay},
            {"dropout", c.dropout},
            {"rho", c.rho},
            {"gamma", c.gamma},
            {"lambda_sae", c.lambda_sae},
            {"epochs", c.epochs},
            {"patience", c.patience},
            {"knn_k", c.knn_k},
            {"seed", c.seed},
            {"train_ratio", c.splits.train},
            {"valid_ratio", c.splits.valid},
            {"test_ratio", c.splits.test},
            {"variant", to_string(c.variant)},
            {"sae_hidden", c.sae_hidden},
            {"gcn_hidden", c.gcn_hidden},
            {"alpha", c.alpha},
            {"learn_topology", c.learn_topology},
            {"per_node_fusion", c.per_node_fusion},
            {"standardize", c.standardize},
            {"sae_pretrain_epochs", c.sae_pretrain_epochs}};
}

namespace {

template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(std::string("config key '") + key + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
            throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
    }
    out = v.get<T>();
}

} // namespace

TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    const auto& keys = train_config_keys();
    for (const auto& item : j.items()) {
        if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
            throw ConfigError("unknown config key '" + item.key() + "'");
    }
    read(j, "beta", c.beta);
    read(j, "gcn_lr", c.gcn_lr);
    read(j, "sae_lr", c.sae_lr);
    read(j, "sae_weight_decay", c.sae_weight_decay);
    read(j, "dropout", c.dropout);
    read(j, "rho", c.rho);
    read(j, "gamma", c.gamma);
    read(j, "lambda_sae", c.lambda_sae);
    read(j, "epochs", c.epochs);
    read(j, "patience", c.patience);
    read(j, "knn_k", c.knn_k);
    read(j, "seed", c.seed);
    read(j, "train_ratio", c.splits.train);
    read(j, "valid_ratio", c.splits.valid);
    read(j, "test_ratio", c.splits.test);
    if (j.contains("variant")) {
        if (!j["variant"].is_string()) throw ConfigError("config key 'variant' must be a string");
        c.variant = parse_variant(j["variant"].get<std::string>());
    }
    if (j.contains("sae_hidden")) {
        const auto& h = j["sae_hidden"];
        if (!h.is_array()) throw ConfigError("config key 'sae_hidden' must be an array of widths");
        c.sae_hidden.clear();
        for (const auto& w : h) {
            if (!w.is_number_integer() || w.get<long long>() < 1)
                throw ConfigError("config key 'sae_hidden' must hold positive integers");
            c.sae_hidden.push_back(w.get<std::size_t>());
        }
    }
    read(j, "gcn_hidden", c.gcn_hidden);
    read(j, "alpha", c.alpha);
    read(j, "learn_topology", c.learn_topology);
    read(j, "per_node_fusion", c.per_node_fusion);
    read(j, "standardize", c.standardize);
    read(j, "sae_pretrain_epochs", c.sae_pretrain_epochs);
    c.validate();
    return c;
}

} // namespace mgcn
