// Acceptance checks, one PASS/FAIL line each. Usage: acceptance [webkb-manifest]
// (the manifest may also come from MGCN_WEBKB_MANIFEST).

#include "cli.hpp"
#include "e2e_gradcheck.hpp"
#include "fixtures.hpp"
#include "mgcn/feature_enhance.hpp"
#include "mgcn/granular_ball.hpp"
#include "mgcn/model.hpp"
#include "mgcn/topology.hpp"
#include "mgcn/trainer.hpp"
#include "op_cases.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

using namespace mgcn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    bool skipped = false;
};

int failures = 0;

struct Timed {
    Outcome outcome;
    double seconds = 0.0;
};

Timed timed(const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Timed t;
    try {
        t.outcome = check();
    } catch (const std::exception& e) {
        t.outcome = {false, std::string("exception: ") + e.what()};
    }
    t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return t;
}

void report(int id, const std::string& title, const Timed& t,
            double budget_seconds = std::numeric_limits<double>::infinity()) {
    const Outcome& o = t.outcome;
    const bool pass = o.pass && t.seconds < budget_seconds;
    char timing[96];
    if (std::isfinite(budget_seconds))
        std::snprintf(timing, sizeof timing, "%.2f s (limit %.0f s)", t.seconds, budget_seconds);
    else
        std::snprintf(timing, sizeof timing, "%.2f s", t.seconds);
    const char* tag = o.skipped ? "SKIP" : pass ? "PASS" : "FAIL";
    std::cout << tag << " [" << id << "] " << title << ": " << o.detail << "; " << timing << std::endl;
    if (!o.skipped && !pass) ++failures;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Trailing mean over `window` epochs, recomputed from scratch per position.
std::vector<double> smoothed(const std::vector<double>& xs, std::size_t window) {
    std::vector<double> out;
    for (std::size_t t = window; t <= xs.size(); ++t) {
        double s = 0;
        for (std::size_t k = t - window; k < t; ++k) s += xs[k];
        out.push_back(s / static_cast<double>(window));
    }
    return out;
}

Outcome gradients() {
    double per_op = 0.0;
    std::string worst_op;
    for (const auto& c : testing::op_gradient_cases()) {
        const double e = testing::gradient_error(c.f, c.inputs);
        if (e >= per_op) {
            per_op = e;
            worst_op = c.name;
        }
    }
    double e2e = 0.0;
    for (Variant v : {Variant::full, Variant::tc_knn, Variant::view_attention, Variant::if_weighted_sum})
        e2e = std::max(e2e, testing::end_to_end_gradient_check(v).worst);
    return {per_op <= 1e-4 && e2e <= 1e-3,
            "per-op max rel err " + fmt("%.2e", per_op) + " (" + worst_op + ", <= 1e-4), end-to-end " +
                fmt("%.2e", e2e) + " (<= 1e-3)"};
}

Outcome partition_invariants() {
    SynthConfig cfg;
    cfg.n = 1000;
    cfg.seed = 3;
    const auto ds = gen_synthetic(cfg);
    const std::size_t cap = 32;
    std::string problems;
    std::size_t balls = 0, largest = 0;
    for (std::size_t v = 0; v < ds.view_count(); ++v) {
        const Matrix& x = ds.views[v];
        const auto p = generate_gbs(x);
        balls += p.balls.size();
        std::vector<int> seen(ds.n(), 0);
        for (const auto& b : p.balls) {
            for (std::size_t i : b.members) ++seen[i];
            if (!b.locked) largest = std::max(largest, b.members.size());
            if (!b.locked && b.members.size() > cap) problems += " view " + std::to_string(v) + ": ball over cap;";
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t i : b.members) {
                double s = 0;
                for (std::size_t j : b.members) s += euclidean_distance(x.row_span(i), x.row_span(j));
                if (s < best) {
                    best = s;
                    arg = i;
                }
            }
            if (b.representative != arg) problems += " view " + std::to_string(v) + ": medoid mismatch;";
        }
        for (int c : seen)
            if (c != 1) {
                problems += " view " + std::to_string(v) + ": node covered " + std::to_string(c) + " times;";
                break;
            }
    }
    return {problems.empty(), problems.empty() ? std::to_string(balls) + " balls over 2 views, largest unlocked " +
                                                     std::to_string(largest) + " (<= 32), medoids match"
                                               : problems};
}

Outcome topology_identities(const Metrics& separable) {
    const auto ds = gen_synthetic(testing::separable_fixture());
    bool endpoints = true;
    for (const auto& x : ds.views) {
        const auto p = generate_gbs(x);
        const Matrix inter = inter_adjacency(p, x), intra = intra_adjacency(p);
        endpoints = endpoints && fuse_view(0.0, inter, intra) == intra && fuse_view(1.0, inter, intra) == inter;
    }
    double pi_err = 0.0;
    for (const auto& pi : separable.pi_curve) {
        double s = 0;
        for (double w : pi) s += w;
        pi_err = std::max(pi_err, std::abs(s - 1.0));
    }
    const Matrix n = normalize_adjacency(Matrix::from_rows({{0, 1}, {1, 0}}));
    const double norm_err = max_abs_diff(n, Matrix(2, 2, 0.5));
    const bool ok = endpoints && !separable.pi_curve.empty() && pi_err <= 1e-12 && norm_err <= 1e-12;
    return {ok, std::string("fuse_view endpoints ") + (endpoints ? "exact" : "differ") + ", max |sum(pi)-1| " +
                    fmt("%.1e", pi_err) + " over " + std::to_string(separable.pi_curve.size()) +
                    " epochs, 2-node normalize err " + fmt("%.1e", norm_err)};
}

Outcome homophily_trend() {
    const auto inter = gen_synthetic(testing::interleaved_fixture());
    std::vector<Matrix> per_view;
    for (const auto& x : inter.views) {
        const auto p = generate_gbs(x);
        per_view.push_back(fuse_view(0.5, inter_adjacency(p, x), intra_adjacency(p)));
    }
    const double gb = homophily_ratio(fuse_views(TopologyParams::uniform(2), per_view), inter.labels);
    std::string detail = "interleaved: GB " + fmt("%.4f", gb);
    bool ok = true;
    for (std::size_t k : {5, 10}) {
        std::vector<Matrix> graphs;
        for (const auto& x : inter.views) graphs.push_back(knn_adjacency(x, k));
        const double h = homophily_ratio(elementwise_max(graphs), inter.labels);
        ok = ok && gb > h;
        detail += ", kNN(k=" + std::to_string(k) + ") " + fmt("%.4f", h);
    }

    const auto sep = gen_synthetic(testing::separable_fixture());
    per_view.clear();
    for (const auto& x : sep.views) {
        const auto p = generate_gbs(x);
        per_view.push_back(fuse_view(0.5, inter_adjacency(p, x), intra_adjacency(p)));
    }
    const double pure = homophily_ratio(fuse_views(TopologyParams::uniform(2), per_view), sep.labels);
    ok = ok && pure == 1.0;
    return {ok, detail + "; separable fused " + fmt("%.17g", pure)};
}

Outcome fusion_identities() {
    Rng rng(21);
    const auto h1 = ad::constant(testing::random_matrix(50, 16, rng));
    const auto h2 = ad::constant(testing::random_matrix(50, 16, rng));
    const std::vector<ad::Var> two{h1, h2};
    const auto c2 = interact(two);
    const bool pair_equal = c2.size() == 2 && c2[0].value() == c2[1].value();

    const std::vector<ad::Var> same{h1, h1, h1};
    const Matrix expect = 2.0 * hadamard(h1.value(), h1.value());
    double triple_err = 0.0;
    for (const auto& c : interact(same)) triple_err = std::max(triple_err, max_abs_diff(c.value(), expect));

    const Matrix x = testing::random_matrix(30, 12, rng, -5, 5);
    bool pool = true;
    for (double beta : {0.0, 0.6, 1.0}) pool = pool && mixed_pool(x, x, beta) == x;
    return {pair_equal && triple_err <= 1e-12 && pool,
            std::string("V=2 ") + (pair_equal ? "bit-exact" : "differ") + ", V=3 err " + fmt("%.1e", triple_err) +
                ", mixed_pool(x,x,b) " + (pool ? "= x" : "!= x")};
}

Outcome learning(const TrainResult& r) {
    const auto& loss = r.metrics.loss_curve;
    const auto s = smoothed(loss, 20);
    std::size_t rises = 0;
    double worst = 0.0;
    for (std::size_t t = 1; t < s.size(); ++t)
        if (s[t] > s[t - 1]) {
            ++rises;
            worst = std::max(worst, s[t] - s[t - 1]);
        }
    const bool ok = r.metrics.accuracy >= 0.95 && !s.empty() && rises == 0 && loss.size() <= 300;
    return {ok, "test ACC " + fmt("%.4f", r.metrics.accuracy) + " (>= 0.95) after " + std::to_string(loss.size()) +
                    " epochs, smoothed-loss rises " + std::to_string(rises) +
                    (rises ? " (largest " + fmt("%.2e", worst) + ")" : "") + ", loss " + fmt("%.4f", loss.front()) +
                    " -> " + fmt("%.4f", loss.back())};
}

Outcome ablation_direction() {
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.seed = 11;
    const auto rep = ablate(gen_synthetic(testing::interleaved_fixture()), cfg, Variant::tc_knn);
    return {rep.full.accuracy >= rep.ablated.accuracy,
            "full ACC " + fmt("%.4f", rep.full.accuracy) + " vs tc_knn " + fmt("%.4f", rep.ablated.accuracy)};
}

Outcome determinism() {
    const fs::path dir = testing::scratch_dir("acceptance_determinism");
    const auto manifest = save_dataset(gen_synthetic(testing::separable_fixture()), dir / "data");
    std::string diff;
    for (const char* run : {"a", "b"}) {
        std::ostringstream out, err;
        const int code = cli::run({"train", "--manifest", manifest.string(), "--out", (dir / run).string(), "--epochs",
                                   "20", "--seed", "7"},
                                  out, err);
        if (code != 0) return {false, "train exited " + std::to_string(code) + ": " + err.str()};
    }
    for (const char* f : {"metrics.json", "checkpoint.bin"}) {
        const std::string a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
        if (a.empty() || a != b) diff += std::string(" ") + f;
    }
    return {diff.empty(), diff.empty() ? "metrics.json and checkpoint.bin byte-identical" : "differs:" + diff};
}

Outcome webkb(const std::optional<std::string>& manifest) {
    if (!manifest) return {true, "no manifest given (argument or MGCN_WEBKB_MANIFEST)", true};
    const auto ds = load_dataset(*manifest);
    const auto r = train(ds, TrainConfig{});
    const double points = 100.0 * r.metrics.accuracy;
    return {std::abs(points - 91.8) <= 3.0, "test ACC " + fmt("%.2f", points) + " (91.8 +/- 3.0)"};
}

} // namespace

int main(int argc, char** argv) {
    std::optional<std::string> webkb_manifest;
    if (argc > 1)
        webkb_manifest = argv[1];
    else if (const char* env = std::getenv("MGCN_WEBKB_MANIFEST"); env && *env)
        webkb_manifest = env;

    report(1, "gradient soundness", timed(gradients), 10.0);
    report(2, "granular-ball partition invariants", timed(partition_invariants), 5.0);

    // Criterion 6 trains first so criterion 3 can inspect its logged mixing weights.
    std::optional<TrainResult> separable;
    const Timed learned = timed([&] {
        TrainConfig cfg;
        cfg.epochs = 300;
        cfg.seed = 7;
        separable = train(gen_synthetic(testing::separable_fixture()), cfg);
        return learning(*separable);
    });

    report(3, "topology identities", timed([&] {
               if (!separable) return Outcome{false, "separable training run failed"};
               return topology_identities(separable->metrics);
           }));
    report(4, "homophily trend", timed(homophily_trend), 10.0);
    report(5, "fusion identities", timed(fusion_identities));
    report(6, "end-to-end learning", learned, 60.0);
    report(7, "ablation direction", timed(ablation_direction));
    report(8, "determinism", timed(determinism));
    report(9, "WebKB accuracy (optional)", timed([&] { return webkb(webkb_manifest); }));

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
