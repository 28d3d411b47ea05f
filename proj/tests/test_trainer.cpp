#include <doctest.h>

#include "mgcn/errors.hpp"
#include "mgcn/trainer.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

using namespace mgcn;

namespace {

MultiViewDataset small_dataset(std::uint64_t seed = 3) {
    SynthConfig s;
    s.n = 60;
    s.class_count = 3;
    s.view_dims = {4, 6};
    s.cluster_spread = {1.5};
    s.center_separation = 4;
    s.seed = seed;
    return gen_synthetic(s);
}

TrainConfig small_config() {
    TrainConfig cfg;
    cfg.sae_hidden = {16, 8};
    cfg.gcn_hidden = 8;
    cfg.epochs = 25;
    cfg.patience = 0;
    cfg.splits = {0.2, 0.2, 0.6};
    cfg.seed = 4;
    return cfg;
}

void check_same_metrics(const Metrics& a, const Metrics& b) {
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.macro_f1 == b.macro_f1);
    CHECK(a.homophily == b.homophily);
    CHECK(a.loss_curve == b.loss_curve);
    CHECK(a.acc_curve == b.acc_curve);
    CHECK(a.f1_curve == b.f1_curve);
    CHECK(a.alpha_curve == b.alpha_curve);
    CHECK(a.pi_curve == b.pi_curve);
    CHECK(a.epoch_of_best == b.epoch_of_best);
    CHECK(a.epochs_run == b.epochs_run);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("classification metrics") {
    const std::vector<std::size_t> all3{0, 1, 2};
    auto m = classification_metrics(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 0}, all3, 2);
    CHECK(m.accuracy == doctest::Approx(2.0 / 3));
    // class 0: P = 1, R = 1/2; class 1: P = 1/2, R = 1. Both F1 = 2/3.
    CHECK(m.macro_f1 == doctest::Approx(2.0 / 3));

    auto perfect = classification_metrics(std::vector<int>{2, 0, 1}, std::vector<int>{2, 0, 1}, all3, 3);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.macro_f1 == 1.0);

    const std::vector<std::size_t> two{0, 1};
    auto wrong = classification_metrics(std::vector<int>{0, 0}, std::vector<int>{1, 1}, two, 2);
    CHECK(wrong.accuracy == 0.0);
    CHECK(wrong.macro_f1 == 0.0);

    // A class absent from both predictions and labels still counts, with F1 = 0.
    auto absent = classification_metrics(std::vector<int>{0, 1}, std::vector<int>{0, 1}, two, 3);
    CHECK(absent.macro_f1 == doctest::Approx(2.0 / 3));

    // Only masked nodes are scored.
    auto masked = classification_metrics(std::vector<int>{0, 1, 1}, std::vector<int>{0, 1, 0}, two, 2);
    CHECK(masked.accuracy == 1.0);

    CHECK_THROWS_AS(classification_metrics(std::vector<int>{0}, std::vector<int>{0}, std::vector<std::size_t>{}, 2),
                    ContractError);
    CHECK(predict_labels(Matrix::from_rows({{0.2, 0.4, 0.4}, {0.9, 0.05, 0.05}})) == std::vector<int>{1, 0});
}

TEST_CASE("one epoch means one step") {
    auto cfg = small_config();
    cfg.epochs = 1;
    const auto r = train(small_dataset(), cfg);
    CHECK(r.metrics.loss_curve.size() == 1);
    CHECK(r.metrics.epochs_run == 1);
    CHECK(r.metrics.epoch_of_best == 0);
}

TEST_CASE("training invariants and determinism") {
    const auto ds = small_dataset();
    const auto cfg = small_config();
    const auto a = train(ds, cfg);
    const auto b = train(ds, cfg);
    check_same_metrics(a.metrics, b.metrics);
    REQUIRE(a.checkpoint.tensors.size() == b.checkpoint.tensors.size());
    for (std::size_t k = 0; k < a.checkpoint.tensors.size(); ++k)
        CHECK(a.checkpoint.tensors[k] == b.checkpoint.tensors[k]);

    const auto& m = a.metrics;
    CHECK(m.loss_curve.size() == 25);
    for (double l : m.loss_curve) CHECK(std::isfinite(l));
    for (double alpha : m.alpha_curve) CHECK((alpha > 0.0 && alpha < 1.0));
    for (const auto& pi : m.pi_curve) {
        double s = 0;
        for (double p : pi) s += p;
        CHECK(std::abs(s - 1.0) <= 1e-12);
    }
    CHECK(m.loss_curve.back() < m.loss_curve.front());
    CHECK((m.accuracy >= 0.0 && m.accuracy <= 1.0));
    CHECK((m.macro_f1 >= 0.0 && m.macro_f1 <= 1.0));

    // Kept parameters score the best validation accuracy seen.
    const double best = *std::max_element(m.acc_curve.begin(), m.acc_curve.end());
    CHECK(m.best_valid_accuracy == best);
    CHECK(m.acc_curve[m.epoch_of_best] == best);
    CHECK(evaluate(a.checkpoint, ds, a.splits.valid).accuracy == best);

    // The reported test metrics are the checkpoint's.
    const auto test = evaluate(a.checkpoint, ds, a.splits.test);
    CHECK(test.accuracy == m.accuracy);
    CHECK(test.macro_f1 == m.macro_f1);
    CHECK(a.embedding.rows() == 60);
    CHECK(a.embedding.cols() == 8);

    auto other = cfg;
    other.seed = 5;
    CHECK(train(ds, other).metrics.loss_curve != m.loss_curve);
}

TEST_CASE("early stopping honours patience") {
    auto cfg = small_config();
    cfg.epochs = 200;
    cfg.patience = 5;
    const auto r = train(small_dataset(), cfg);
    CHECK(r.metrics.epochs_run <= 200);
    CHECK(r.metrics.epochs_run <= r.metrics.epoch_of_best + 1 + 5);
    if (r.metrics.epochs_run < 200) CHECK(r.metrics.epochs_run == r.metrics.epoch_of_best + 1 + 5);
}

TEST_CASE("evaluate is pure and checks compatibility") {
    const auto ds = small_dataset();
    const auto r = train(ds, small_config());
    const auto e1 = evaluate_full(r.checkpoint, ds, r.splits.test);
    const auto e2 = evaluate_full(r.checkpoint, ds, r.splits.test);
    CHECK(e1.probs == e2.probs);
    CHECK(e1.metrics.accuracy == e2.metrics.accuracy);

    SynthConfig s;
    s.n = 40;
    s.class_count = 3;
    s.view_dims = {4, 6};
    CHECK_THROWS_AS(evaluate(r.checkpoint, gen_synthetic(s), r.splits.test), DimensionError);
}

TEST_CASE("checkpoint round trip") {
    const auto ds = small_dataset();
    auto cfg = small_config();
    cfg.epochs = 3;
    const auto r = train(ds, cfg);
    const auto dir = testing::scratch_dir("ckpt");
    save_checkpoint(r.checkpoint, dir / "a.bin");
    const auto back = load_checkpoint(dir / "a.bin");
    CHECK(back.n == r.checkpoint.n);
    CHECK(back.view_dims == r.checkpoint.view_dims);
    CHECK(back.tensors == r.checkpoint.tensors);
    CHECK(to_json(back.config) == to_json(r.checkpoint.config));
    save_checkpoint(back, dir / "b.bin");
    CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));
    CHECK(evaluate(back, ds, r.splits.test).accuracy == r.metrics.accuracy);

    std::ofstream(dir / "junk.bin") << "not a checkpoint";
    CHECK_THROWS_AS(load_checkpoint(dir / "junk.bin"), DatasetError);
    const std::string bytes = slurp(dir / "a.bin");
    std::ofstream(dir / "short.bin", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
    CHECK_THROWS_AS(load_checkpoint(dir / "short.bin"), DatasetError);
    CHECK_THROWS_AS(r.checkpoint.tensor("nope"), ContractError);
}

TEST_CASE("ablation harness") {
    const auto ds = small_dataset();
    auto cfg = small_config();
    cfg.epochs = 10;

    const auto full = ablate(ds, cfg, Variant::full);
    check_same_metrics(full.ablated, full.full);
    check_same_metrics(full.full, train(ds, cfg).metrics);

    for (Variant v : {Variant::tc_knn, Variant::fe_off, Variant::if_weighted_sum, Variant::rep_center,
                      Variant::rep_density_peak, Variant::view_attention}) {
        CAPTURE(to_string(v));
        auto c = cfg;
        c.knn_k = 5;
        const auto rep = ablate(ds, c, v);
        CHECK(rep.variant == v);
        check_same_metrics(rep.full, full.full);
        CHECK((rep.ablated.accuracy >= 0.0 && rep.ablated.accuracy <= 1.0));
        CHECK(rep.ablated.loss_curve.size() == 10);
    }
}

TEST_CASE("fe_off matches full when the similarity matrix is the identity") {
    // Every node is nonzero in exactly one column, so columns are orthogonal.
    MultiViewDataset ds;
    ds.class_count = 3;
    Rng rng(2);
    for (std::size_t d : {3u, 5u}) {
        Matrix x(45, d);
        for (std::size_t i = 0; i < 45; ++i) x(i, (i + d) % d) = rng.uniform(0.5, 2.0) * (i % 3 == 0 ? 1 : -1);
        ds.views.push_back(x);
    }
    for (std::size_t i = 0; i < 45; ++i) ds.labels.push_back(static_cast<int>(i % 3));
    auto cfg = small_config();
    cfg.epochs = 8;
    const auto rep = ablate(ds, cfg, Variant::fe_off);
    check_same_metrics(rep.ablated, rep.full);
}

TEST_CASE("configuration options") {
    const auto ds = small_dataset();
    auto cfg = small_config();
    cfg.epochs = 6;

    SUBCASE("fixed topology") {
        cfg.learn_topology = false;
        cfg.alpha = 0.3;
        const auto r = train(ds, cfg);
        for (double a : r.metrics.alpha_curve) CHECK(a == doctest::Approx(0.3).epsilon(1e-15));
        for (const auto& pi : r.metrics.pi_curve) CHECK(pi == std::vector<double>{0.5, 0.5});
    }
    SUBCASE("broadcast fusion weights") {
        cfg.per_node_fusion = false;
        const auto r = train(ds, cfg);
        CHECK(r.checkpoint.tensor("fusion.w").rows() == 1);
    }
    SUBCASE("pretraining and standardization") {
        cfg.sae_pretrain_epochs = 3;
        cfg.standardize = true;
        CHECK(std::isfinite(train(ds, cfg).metrics.loss_curve.front()));
    }
    SUBCASE("empty validation split") {
        cfg.splits = {0.5, 0.01, 0.4};
        CHECK_THROWS_AS(train(ds, cfg), ConfigError);
    }
    SUBCASE("non-finite loss names the epoch") {
        auto bad = ds;
        for (double& v : bad.views[0].data()) v *= 1e200;
        try {
            (void)train(bad, cfg);
            FAIL("expected NumericalError");
        } catch (const NumericalError& e) {
            CHECK(std::string(e.what()).find("epoch 0") != std::string::npos);
        }
    }
}

TEST_CASE("config validation and JSON") {
    TrainConfig cfg;
    CHECK(cfg.beta == 0.6);
    CHECK(cfg.gcn_lr == 0.01);
    CHECK(cfg.sae_lr == 0.001);
    CHECK(cfg.sae_weight_decay == 0.01);
    CHECK(cfg.dropout == 0.5);
    CHECK(cfg.epochs == 1000);
    CHECK(cfg.patience == 200);
    CHECK(cfg.sae_hidden == std::vector<std::size_t>{1024, 256});

    const auto j = to_json(cfg);
    const auto back = train_config_from_json(j);
    CHECK(to_json(back) == j);
    for (const auto& key : train_config_keys()) CHECK(j.contains(key));

    CHECK(train_config_from_json({{"epochs", 7}, {"variant", "tc_knn"}}).epochs == 7);
    CHECK_THROWS_AS(train_config_from_json({{"epoch", 7}}), ConfigError);
    CHECK_THROWS_AS(train_config_from_json({{"epochs", "many"}}), ConfigError);
    CHECK_THROWS_AS(train_config_from_json({{"epochs", -1}}), ConfigError);
    CHECK_THROWS_AS(train_config_from_json({{"beta", 1.5}}), ConfigError);

    auto bad = cfg;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = cfg;
    bad.dropout = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    try {
        (void)parse_variant("bogus");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        for (const auto& name : variant_names()) CHECK(what.find(name) != std::string::npos);
    }
    for (const auto& name : variant_names()) CHECK(to_string(parse_variant(name)) == name);
}

TEST_CASE("beta sweep and output writers") {
    const auto ds = small_dataset();
    auto cfg = small_config();
    cfg.epochs = 2;
    const auto points = sweep_beta(ds, cfg);
    REQUIRE(points.size() == 11);
    for (int k = 0; k <= 10; ++k) CHECK(points[k].beta == doctest::Approx(k / 10.0).epsilon(1e-15));

    const auto r = train(ds, cfg);
    const auto dir = testing::scratch_dir("writers");
    write_curves_csv(r.metrics, dir / "curves.csv");
    std::ifstream in(dir / "curves.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "epoch,loss,acc,f1,alpha,pi_0,pi_1");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 2);

    const auto j = metrics_to_json(r.metrics);
    CHECK(j.at("accuracy").get<double>() == r.metrics.accuracy);
    write_json(j, dir / "m.json");
    CHECK(nlohmann::json::parse(slurp(dir / "m.json")) == j);
}
