#include "mgcn/dataset.hpp"

#include "mgcn/errors.hpp"
#include "mgcn/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mgcn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::ifstream open_input(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw DatasetError(std::string("missing ") + what + " file: " + path.string());
    return in;
}

std::vector<int> read_labels(const fs::path& path) {
    auto in = open_input(path, "labels");
    std::vector<int> labels;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto text = trim(line);
        if (text.empty()) continue;
        int value = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size()) {
            throw DatasetError("unparseable label '" + std::string(text) + "' in " + path.string() +
                               " line " + std::to_string(row));
        }
        labels.push_back(value);
    }
    return labels;
}

} // namespace

std::vector<std::size_t> MultiViewDataset::view_dims() const {
    std::vector<std::size_t> dims;
    for (const auto& v : views) dims.push_back(v.cols());
    return dims;
}

void MultiViewDataset::validate() const {
    if (views.empty()) throw DatasetError("dataset '" + name + "' has no views");
    if (labels.empty()) throw DatasetError("dataset '" + name + "' has no nodes");
    if (class_count < 1) throw DatasetError("dataset '" + name + "' has class_count < 1");
    for (std::size_t v = 0; v < views.size(); ++v) {
        if (views[v].rows() != labels.size()) {
            throw DatasetError("view " + std::to_string(v) + " has " + std::to_string(views[v].rows()) +
                               " rows but there are " + std::to_string(labels.size()) + " labels");
        }
        if (!all_finite(views[v])) throw DatasetError("view " + std::to_string(v) + " has non-finite entries");
    }
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= class_count) {
            throw DatasetError("label " + std::to_string(labels[i]) + " at node " + std::to_string(i) +
                               " outside [0, " + std::to_string(class_count) + ")");
        }
        ++counts[static_cast<std::size_t>(labels[i])];
    }
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) throw DatasetError("class " + std::to_string(c) + " has no members");
    }
}

SplitMask make_splits(const MultiViewDataset& ds, SplitRatios ratios, std::uint64_t seed) {
    if (!(ratios.train > 0.0 && ratios.valid > 0.0 && ratios.test > 0.0)) {
        throw ConfigError("split ratios must be positive");
    }
    if (ratios.train + ratios.valid + ratios.test > 1.0 + 1e-9) {
        throw ConfigError("split ratios sum to more than 1");
    }
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.class_count));
    for (std::size_t i = 0; i < ds.n(); ++i) by_class.at(static_cast<std::size_t>(ds.labels[i])).push_back(i);

    Rng rng(derive_seed(seed, 0x5b117));
    SplitMask mask;
    // 1e-9 slack keeps products like 0.1 * 30 from flooring to 2.
    auto quota = [](double ratio, std::size_t count) {
        return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(count) + 1e-9));
    };
    for (auto& members : by_class) {
        if (members.empty()) continue;
        rng.shuffle(members);
        const std::size_t count = members.size();
        const std::size_t n_train = std::max<std::size_t>(1, quota(ratios.train, count));
        const std::size_t n_valid = std::min(quota(ratios.valid, count), count - n_train);
        mask.train.insert(mask.train.end(), members.begin(), members.begin() + n_train);
        mask.valid.insert(mask.valid.end(), members.begin() + n_train, members.begin() + n_train + n_valid);
        mask.test.insert(mask.test.end(), members.begin() + n_train + n_valid, members.end());
    }
    std::sort(mask.train.begin(), mask.train.end());
    std::sort(mask.valid.begin(), mask.valid.end());
    std::sort(mask.test.begin(), mask.test.end());
    return mask;
}

void SynthConfig::validate() const {
    if (class_count < 1) throw ConfigError("synth: class_count must be >= 1");
    if (n < static_cast<std::size_t>(class_count)) throw ConfigError("synth: n must be >= class_count");
    if (view_dims.empty()) throw ConfigError("synth: view_dims must not be empty");
    for (auto d : view_dims) {
        if (d < 1) throw ConfigError("synth: every view dim must be >= 1");
    }
    if (cluster_spread.size() != 1 && cluster_spread.size() != static_cast<std::size_t>(class_count)) {
        throw ConfigError("synth: cluster_spread needs 1 or class_count values");
    }
    for (double s : cluster_spread) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw ConfigError("synth: cluster_spread must be finite and >= 0");
    }
    if (!(center_separation >= 0.0) || !std::isfinite(center_separation)) {
        throw ConfigError("synth: center_separation must be finite and >= 0");
    }
    if (!(label_noise_rate >= 0.0 && label_noise_rate <= 1.0)) {
        throw ConfigError("synth: label_noise_rate must be in [0, 1]");
    }
}

double SynthConfig::spread_for(int cls) const {
    return cluster_spread.size() == 1 ? cluster_spread[0] : cluster_spread[static_cast<std::size_t>(cls)];
}

MultiViewDataset gen_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    const auto classes = static_cast<std::size_t>(cfg.class_count);
    MultiViewDataset ds;
    ds.name = "synthetic";
    ds.class_count = cfg.class_count;
    ds.labels.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) ds.labels[i] = static_cast<int>(i % classes);

    Rng rng(derive_seed(cfg.seed, 0xda7a));
    for (std::size_t dim : cfg.view_dims) {
        Matrix centers(classes, dim);
        if (dim >= classes) {
            // scaled basis vectors: |e_a - e_b| * s = s * sqrt(2)
            const double s = cfg.center_separation / std::sqrt(2.0);
            for (std::size_t c = 0; c < classes; ++c) centers(c, c) = s;
        } else {
            for (std::size_t c = 0; c < classes; ++c) centers(c, 0) = cfg.center_separation * static_cast<double>(c);
        }
        Matrix x(cfg.n, dim);
        for (std::size_t i = 0; i < cfg.n; ++i) {
            const auto cls = static_cast<std::size_t>(ds.labels[i]);
            const double spread = cfg.spread_for(ds.labels[i]);
            for (std::size_t j = 0; j < dim; ++j) x(i, j) = centers(cls, j) + spread * rng.normal();
        }
        ds.views.push_back(std::move(x));
    }

    const auto flips = static_cast<std::size_t>(std::floor(cfg.label_noise_rate * static_cast<double>(cfg.n)));
    if (flips > 0) {
        std::vector<std::size_t> order(cfg.n);
        for (std::size_t i = 0; i < cfg.n; ++i) order[i] = i;
        rng.shuffle(order);
        for (std::size_t k = 0; k < flips; ++k) ds.labels[order[k]] = static_cast<int>(rng.below(classes));
    }
    ds.validate();
    return ds;
}

Matrix read_csv_matrix(const fs::path& path) {
    auto in = open_input(path, "matrix");
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::size_t fields = 0;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            const auto field = trim(rest.substr(0, comma));
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
            if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
                throw DatasetError("unparseable number '" + std::string(field) + "' in " + path.string() +
                                   " row " + std::to_string(line_no));
            }
            if (!std::isfinite(value)) {
                throw DatasetError("non-finite entry in " + path.string() + " row " + std::to_string(line_no) +
                                   " column " + std::to_string(fields + 1));
            }
            values.push_back(value);
            ++fields;
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (rows == 0) {
            cols = fields;
        } else if (fields != cols) {
            throw DatasetError("ragged row in " + path.string() + " row " + std::to_string(line_no) + ": " +
                               std::to_string(fields) + " columns, expected " + std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0) throw DatasetError("empty matrix file: " + path.string());
    return Matrix(rows, cols, std::move(values));
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_csv_matrix(const Matrix& m, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw DatasetError("cannot write " + path.string());
    std::string line;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        line.clear();
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) line += ',';
            line += format_double(m(r, c));
        }
        line += '\n';
        out << line;
    }
    if (!out) throw DatasetError("write failed for " + path.string());
}

MultiViewDataset load_dataset(const fs::path& manifest_path) {
    auto in = open_input(manifest_path, "manifest");
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw DatasetError("malformed manifest " + manifest_path.string() + ": " + e.what());
    }
    const fs::path base = manifest_path.parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    MultiViewDataset ds;
    try {
        ds.name = manifest.value("name", manifest_path.stem().string());
        ds.class_count = manifest.at("class_count").get<int>();
        const auto n = manifest.at("n").get<std::size_t>();
        const fs::path labels_path = resolve(manifest.at("labels_path").get<std::string>());
        ds.labels = read_labels(labels_path);
        if (ds.labels.size() != n) {
            throw DatasetError("row-count mismatch: " + labels_path.string() + " has " +
                               std::to_string(ds.labels.size()) + " labels, manifest says n=" + std::to_string(n));
        }
        for (std::size_t i = 0; i < ds.labels.size(); ++i) {
            if (ds.labels[i] < 0 || ds.labels[i] >= ds.class_count) {
                throw DatasetError("label out of range: " + labels_path.string() + " row " + std::to_string(i + 1) +
                                   " has " + std::to_string(ds.labels[i]) + ", class_count is " +
                                   std::to_string(ds.class_count));
            }
        }
        for (const auto& view : manifest.at("views")) {
            const fs::path path = resolve(view.at("path").get<std::string>());
            Matrix x = read_csv_matrix(path);
            if (x.rows() != n) {
                throw DatasetError("row-count mismatch: " + path.string() + " has " + std::to_string(x.rows()) +
                                   " rows, expected " + std::to_string(n));
            }
            if (view.contains("dim") && view.at("dim").get<std::size_t>() != x.cols()) {
                throw DatasetError("dimension mismatch: " + path.string() + " has " + std::to_string(x.cols()) +
                                   " columns, manifest says " + std::to_string(view.at("dim").get<std::size_t>()));
            }
            ds.views.push_back(std::move(x));
        }
    } catch (const json::exception& e) {
        throw DatasetError("manifest " + manifest_path.string() + ": " + e.what());
    }
    ds.validate();
    return ds;
}

fs::path save_dataset(const MultiViewDataset& ds, const fs::path& dir) {
    ds.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DatasetError("cannot create directory " + dir.string() + ": " + ec.message());

    json manifest;
    manifest["name"] = ds.name;
    manifest["n"] = ds.n();
    manifest["class_count"] = ds.class_count;
    manifest["views"] = json::array();
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        const std::string file = "view_" + std::to_string(v) + ".csv";
        write_csv_matrix(ds.views[v], dir / file);
        manifest["views"].push_back({{"path", file}, {"dim", ds.views[v].cols()}});
    }
    {
        std::ofstream out(dir / "labels.txt");
        if (!out) throw DatasetError("cannot write " + (dir / "labels.txt").string());
        for (int y : ds.labels) out << y << '\n';
    }
    manifest["labels_path"] = "labels.txt";
    const fs::path manifest_path = dir / "manifest.json";
    std::ofstream out(manifest_path);
    if (!out) throw DatasetError("cannot write " + manifest_path.string());
    out << manifest.dump(2) << '\n';
    return manifest_path;
}

Matrix standardize_columns(const Matrix& x) {
    Matrix out = x;
    const double n = static_cast<double>(x.rows());
    for (std::size_t c = 0; c < x.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) mean += x(r, c);
        mean /= n;
        double var = 0.0;
        for (std::size_t r = 0; r < x.rows(); ++r) var += (x(r, c) - mean) * (x(r, c) - mean);
        const double sd = std::sqrt(var / n);
        for (std::size_t r = 0; r < x.rows(); ++r) out(r, c) = sd > 0.0 ? (x(r, c) - mean) / sd : 0.0;
    }
    return out;
}

} // namespace mgcn
