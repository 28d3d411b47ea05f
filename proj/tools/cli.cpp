#include "cli.hpp"

#include "mgcn/errors.hpp"
#include "mgcn/granular_ball.hpp"
#include "mgcn/topology.hpp"
#include "mgcn/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

namespace mgcn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string kebab(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        parts.push_back(item);
    }
    return parts;
}

std::uint64_t parse_unsigned(const std::string& text, const std::string& flag) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty())
        throw ConfigError(flag + ": expected a non-negative integer, got '" + text + "'");
    return v;
}

double parse_double(const std::string& text, const std::string& flag) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty() || !std::isfinite(v))
        throw ConfigError(flag + ": expected a number, got '" + text + "'");
    return v;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& flag) {
    std::vector<std::size_t> out;
    for (const auto& part : split_list(text)) out.push_back(parse_unsigned(part, flag));
    if (out.empty()) throw ConfigError(flag + ": list must not be empty");
    return out;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
    std::vector<double> out;
    for (const auto& part : split_list(text)) out.push_back(parse_double(part, flag));
    if (out.empty()) throw ConfigError(flag + ": list must not be empty");
    return out;
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw DatasetError("cannot create output directory " + dir.string());
}

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

class RunLog {
public:
    explicit RunLog(const fs::path& path) : out_(path, std::ios::app) {}
    void line(const std::string& msg) {
        if (out_) out_ << timestamp() << ' ' << msg << '\n';
    }

private:
    std::ofstream out_;
};

/// One flag per TrainConfig key, plus --config.
struct ConfigFlags {
    std::string config_path;
    std::map<std::string, std::string> raw;
    std::map<std::string, CLI::Option*> options;

    void attach(CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config; flags override its keys");
        for (const auto& key : train_config_keys())
            options[key] = sub->add_option("--" + kebab(key), raw[key], "config key " + key);
    }

    TrainConfig resolve() const {
        json overrides = config_path.empty() ? json::object() : read_json_file(config_path);
        if (!overrides.is_object()) throw ConfigError("config file must hold a JSON object: " + config_path);
        const json defaults = to_json(TrainConfig{});
        for (const auto& key : train_config_keys()) {
            if (options.at(key)->count() == 0) continue;
            const std::string& text = raw.at(key);
            const std::string flag = "--" + kebab(key);
            const json& like = defaults.at(key);
            if (like.is_boolean()) {
                if (text == "true" || text == "1") {
                    overrides[key] = true;
                } else if (text == "false" || text == "0") {
                    overrides[key] = false;
                } else {
                    throw ConfigError(flag + ": expected true or false, got '" + text + "'");
                }
            } else if (like.is_number_integer()) {
                overrides[key] = parse_unsigned(text, flag);
            } else if (like.is_number()) {
                overrides[key] = parse_double(text, flag);
            } else if (like.is_array()) {
                overrides[key] = parse_size_list(text, flag);
            } else {
                overrides[key] = text;
            }
        }
        return train_config_from_json(overrides);
    }
};

json optional_homophily(const Matrix& a, std::span<const int> labels) {
    if (edge_count(a) == 0) return nullptr;
    return homophily_ratio(a, labels);
}

void emit(const json& report, const std::string& out_path, std::ostream& out) {
    if (!out_path.empty()) {
        const fs::path p(out_path);
        if (p.has_parent_path()) ensure_dir(p.parent_path());
        write_json(report, p);
    }
    out << report.dump(2) << '\n';
}

void write_run_outputs(const fs::path& dir, const TrainConfig& cfg, const std::string& manifest) {
    json echo = to_json(cfg);
    echo["manifest"] = manifest;
    write_json(echo, dir / "config.json");
}

// gen-synth

struct GenSynthArgs {
    std::size_t n = 400;
    int classes = 4;
    std::string view_dims = "8,16";
    std::string spread = "1";
    double separation = 10.0;
    double label_noise = 0.0;
    std::uint64_t seed = 0;
    std::string out;
};

void cmd_gen_synth(const GenSynthArgs& a, std::ostream& out) {
    SynthConfig cfg;
    cfg.n = a.n;
    cfg.class_count = a.classes;
    cfg.view_dims = parse_size_list(a.view_dims, "--view-dims");
    cfg.cluster_spread = parse_double_list(a.spread, "--spread");
    cfg.center_separation = a.separation;
    cfg.label_noise_rate = a.label_noise;
    cfg.seed = a.seed;
    cfg.validate();
    const auto ds = gen_synthetic(cfg);
    ensure_dir(a.out);
    const auto manifest = save_dataset(ds, a.out);
    out << "wrote " << ds.name << ": N=" << ds.n() << " C=" << ds.class_count << " views=" << ds.view_count()
        << " -> " << manifest.string() << '\n';
}

// gb-stats

struct GbStatsArgs {
    std::string manifest;
    std::string strategy = "medoid";
    std::string out;
};

void cmd_gb_stats(const GbStatsArgs& a, std::ostream& out) {
    const auto strategy = parse_representative_strategy(a.strategy);
    const auto ds = load_dataset(a.manifest);
    json views = json::array();
    for (std::size_t v = 0; v < ds.view_count(); ++v) {
        const auto p = generate_gbs(ds.views[v], strategy);
        std::size_t smallest = ds.n(), largest = 0, pure_nodes = 0;
        for (const auto& ball : p.balls) {
            smallest = std::min(smallest, ball.members.size());
            largest = std::max(largest, ball.members.size());
            std::vector<std::size_t> counts(static_cast<std::size_t>(ds.class_count), 0);
            for (std::size_t i : ball.members) ++counts[static_cast<std::size_t>(ds.labels[i])];
            pure_nodes += *std::max_element(counts.begin(), counts.end());
        }
        views.push_back({{"view", v},
                         {"balls", p.balls.size()},
                         {"locked", p.locked_count()},
                         {"min_size", smallest},
                         {"max_size", largest},
                         {"mean_size", static_cast<double>(ds.n()) / static_cast<double>(p.balls.size())},
                         {"purity", static_cast<double>(pure_nodes) / static_cast<double>(ds.n())}});
    }
    const json report{{"dataset", ds.name},
                      {"n", ds.n()},
                      {"split_threshold", std::sqrt(static_cast<double>(ds.n()))},
                      {"strategy", to_string(strategy)},
                      {"views", views}};
    emit(report, a.out, out);
}

// topology

struct TopologyArgs {
    std::string manifest;
    std::string knn_k = "5,10";
    double alpha = 0.5;
    std::string strategy = "medoid";
    std::string out;
};

void cmd_topology(const TopologyArgs& a, std::ostream& out) {
    const auto ks = parse_size_list(a.knn_k, "--knn-k");
    if (!(a.alpha >= 0.0 && a.alpha <= 1.0)) throw ConfigError("--alpha must be in [0, 1]");
    const auto strategy = parse_representative_strategy(a.strategy);
    const auto ds = load_dataset(a.manifest);
    for (std::size_t k : ks) {
        if (k < 1 || k + 1 > ds.n())
            throw ConfigError("--knn-k: k must be in [1, " + std::to_string(ds.n() - 1) + "], got " + std::to_string(k));
    }

    std::vector<Matrix> per_view;
    json balls = json::array(), view_h = json::array(), view_edges = json::array();
    for (const auto& x : ds.views) {
        const auto p = generate_gbs(x, strategy);
        per_view.push_back(fuse_view(a.alpha, inter_adjacency(p, x), intra_adjacency(p)));
        balls.push_back(p.balls.size());
        view_h.push_back(optional_homophily(per_view.back(), ds.labels));
        view_edges.push_back(edge_count(per_view.back()));
    }
    const Matrix fused = fuse_views(TopologyParams::uniform(ds.view_count(), 0.5, false), per_view);

    json knn_h = json::object(), knn_edges = json::object();
    for (std::size_t k : ks) {
        std::vector<Matrix> graphs;
        for (const auto& x : ds.views) graphs.push_back(knn_adjacency(x, k));
        const Matrix u = elementwise_max(graphs);
        knn_h[std::to_string(k)] = optional_homophily(u, ds.labels);
        knn_edges[std::to_string(k)] = edge_count(u);
    }

    const json report{{"dataset", ds.name},
                      {"n", ds.n()},
                      {"alpha", a.alpha},
                      {"strategy", to_string(strategy)},
                      {"m_per_view", balls},
                      {"per_view_homophily", view_h},
                      {"fused_homophily", optional_homophily(fused, ds.labels)},
                      {"knn_homophily_by_k", knn_h},
                      {"edge_counts", {{"per_view", view_edges}, {"fused", edge_count(fused)}, {"knn", knn_edges}}}};
    emit(report, a.out, out);
}

// train

struct TrainArgs {
    std::string manifest;
    std::string out;
    ConfigFlags config;
};

void cmd_train(const TrainArgs& a, std::ostream& out) {
    const TrainConfig cfg = a.config.resolve();
    const auto ds = load_dataset(a.manifest);
    const fs::path dir(a.out);
    ensure_dir(dir);
    RunLog log(dir / "run.log");
    log.line("train start: dataset=" + ds.name + " variant=" + to_string(cfg.variant) + " seed=" +
             std::to_string(cfg.seed));
    write_run_outputs(dir, cfg, a.manifest);

    const auto result = train(ds, cfg);
    save_checkpoint(result.checkpoint, dir / "checkpoint.bin");
    json metrics = metrics_to_json(result.metrics);
    metrics["split"] = "test";
    write_json(metrics, dir / "metrics.json");
    write_curves_csv(result.metrics, dir / "curves.csv");
    write_csv_matrix(result.embedding, dir / "embeddings.csv");
    log.line("train done: epochs=" + std::to_string(result.metrics.epochs_run) +
             " accuracy=" + format_double(result.metrics.accuracy));

    out << "test accuracy " << format_double(result.metrics.accuracy) << ", macro-F1 "
        << format_double(result.metrics.macro_f1) << " (best epoch " << result.metrics.epoch_of_best << " of "
        << result.metrics.epochs_run << ") -> " << dir.string() << '\n';
}

// evaluate

struct EvaluateArgs {
    std::string checkpoint;
    std::string manifest;
    std::string split = "test";
    std::string out;
};

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const auto ck = load_checkpoint(a.checkpoint);
    const auto ds = load_dataset(a.manifest);
    const auto splits = make_splits(ds, ck.config.splits, ck.config.seed);
    const std::vector<std::size_t>* mask = nullptr;
    if (a.split == "train") mask = &splits.train;
    if (a.split == "valid") mask = &splits.valid;
    if (a.split == "test") mask = &splits.test;
    if (!mask) throw ConfigError("--split must be train, valid or test, got '" + a.split + "'");
    const auto m = evaluate(ck, ds, *mask);
    const json report{{"split", a.split},
                      {"size", mask->size()},
                      {"accuracy", m.accuracy},
                      {"macro_f1", m.macro_f1},
                      {"homophily", m.homophily}};
    emit(report, a.out, out);
}

// ablate

struct AblateArgs {
    std::string manifest;
    std::string out;
    ConfigFlags config;
};

json ablation_json(const AblationReport& r) {
    return {{"variant", to_string(r.variant)}, {"full", metrics_to_json(r.full)}, {"ablated", metrics_to_json(r.ablated)}};
}

void cmd_ablate(const AblateArgs& a, std::ostream& out) {
    const TrainConfig cfg = a.config.resolve();
    const auto ds = load_dataset(a.manifest);
    std::optional<RunLog> log;
    if (!a.out.empty()) {
        ensure_dir(a.out);
        log.emplace(fs::path(a.out) / "run.log");
        log->line("ablate start: variant=" + to_string(cfg.variant));
        write_run_outputs(a.out, cfg, a.manifest);
    }
    const auto report = ablate(ds, cfg, cfg.variant);
    if (log) {
        write_json(ablation_json(report), fs::path(a.out) / "ablation.json");
        log->line("ablate done");
    }
    const std::string name = to_string(report.variant);
    auto row = [&](const std::string& label, double full, double alt) {
        out << std::left << std::setw(12) << label << std::right << std::setw(10) << std::fixed << std::setprecision(4)
            << full << std::setw(18) << alt << '\n';
    };
    out << std::left << std::setw(12) << "metric" << std::right << std::setw(10) << "full" << std::setw(18) << name
        << '\n';
    row("accuracy", report.full.accuracy, report.ablated.accuracy);
    row("macro_f1", report.full.macro_f1, report.ablated.macro_f1);
    row("homophily", report.full.homophily, report.ablated.homophily);
}

// sweep-beta

struct SweepArgs {
    std::string manifest;
    std::string out;
    ConfigFlags config;
};

void cmd_sweep_beta(const SweepArgs& a, std::ostream& out) {
    const TrainConfig cfg = a.config.resolve();
    const auto ds = load_dataset(a.manifest);
    const fs::path dir(a.out);
    ensure_dir(dir);
    RunLog log(dir / "run.log");
    log.line("sweep-beta start");
    write_run_outputs(dir, cfg, a.manifest);
    const auto points = sweep_beta(ds, cfg);
    std::ofstream csv(dir / "sweep_beta.csv", std::ios::trunc);
    if (!csv) throw DatasetError("cannot write " + (dir / "sweep_beta.csv").string());
    csv << "beta,accuracy,macro_f1\n";
    for (const auto& p : points)
        csv << format_double(p.beta) << ',' << format_double(p.accuracy) << ',' << format_double(p.macro_f1) << '\n';
    log.line("sweep-beta done");
    out << "wrote " << points.size() << " rows -> " << (dir / "sweep_beta.csv").string() << '\n';
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-view granular-ball GCN toolkit", "mgcn"};
    app.require_subcommand(1);

    GenSynthArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-synth", "Write a synthetic multi-view dataset");
    gen_cmd->add_option("--n", gen.n, "node count");
    gen_cmd->add_option("--classes", gen.classes, "class count");
    gen_cmd->add_option("--view-dims", gen.view_dims, "comma-separated view widths");
    gen_cmd->add_option("--spread", gen.spread, "noise std, one value or one per class");
    gen_cmd->add_option("--separation", gen.separation, "distance between class centers");
    gen_cmd->add_option("--label-noise", gen.label_noise, "fraction of relabelled nodes");
    gen_cmd->add_option("--seed", gen.seed, "random seed");
    gen_cmd->add_option("--out", gen.out, "output directory")->required();

    GbStatsArgs gb;
    auto* gb_cmd = app.add_subcommand("gb-stats", "Granular-ball statistics per view");
    gb_cmd->add_option("--manifest", gb.manifest, "dataset manifest")->required();
    gb_cmd->add_option("--strategy", gb.strategy, "medoid, center or density_peak");
    gb_cmd->add_option("--out", gb.out, "also write the report here");

    TopologyArgs topo;
    auto* topo_cmd = app.add_subcommand("topology", "Homophily of granular-ball and kNN topologies");
    topo_cmd->add_option("--manifest", topo.manifest, "dataset manifest")->required();
    topo_cmd->add_option("--knn-k", topo.knn_k, "comma-separated k values for the kNN comparison");
    topo_cmd->add_option("--alpha", topo.alpha, "inter/intra mixing weight");
    topo_cmd->add_option("--strategy", topo.strategy, "medoid, center or density_peak");
    topo_cmd->add_option("--out", topo.out, "also write the report here");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train and write checkpoint, metrics, curves, embeddings");
    train_cmd->add_option("--manifest", tr.manifest, "dataset manifest")->required();
    train_cmd->add_option("--out", tr.out, "output directory")->required();
    tr.config.attach(train_cmd);

    EvaluateArgs ev;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score a checkpoint on one split");
    eval_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--manifest", ev.manifest, "dataset manifest")->required();
    eval_cmd->add_option("--split", ev.split, "train, valid or test");
    eval_cmd->add_option("--out", ev.out, "also write the report here");

    AblateArgs ab;
    auto* ablate_cmd = app.add_subcommand("ablate", "Compare a variant against the full model");
    ablate_cmd->add_option("--manifest", ab.manifest, "dataset manifest")->required();
    ablate_cmd->add_option("--out", ab.out, "output directory for ablation.json");
    ab.config.attach(ablate_cmd);

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep-beta", "Accuracy for beta in 0.0, 0.1, ..., 1.0");
    sweep_cmd->add_option("--manifest", sw.manifest, "dataset manifest")->required();
    sweep_cmd->add_option("--out", sw.out, "output directory")->required();
    sw.config.attach(sweep_cmd);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (gen_cmd->parsed()) cmd_gen_synth(gen, out);
        else if (gb_cmd->parsed()) cmd_gb_stats(gb, out);
        else if (topo_cmd->parsed()) cmd_topology(topo, out);
        else if (train_cmd->parsed()) cmd_train(tr, out);
        else if (eval_cmd->parsed()) cmd_evaluate(ev, out);
        else if (ablate_cmd->parsed()) cmd_ablate(ab, out);
        else if (sweep_cmd->parsed()) cmd_sweep_beta(sw, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace mgcn::cli
