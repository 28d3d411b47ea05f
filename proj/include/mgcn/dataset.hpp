#pragma once

#include "mgcn/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mgcn {

/// V aligned feature matrices over the same N nodes plus class labels.
struct MultiViewDataset {
    std::string name;
    std::vector<Matrix> views;  // view v is N x d_v
    std::vector<int> labels;    // N entries in [0, class_count)
    int class_count = 0;

    std::size_t n() const noexcept { return labels.size(); }
    std::size_t view_count() const noexcept { return views.size(); }
    std::vector<std::size_t> view_dims() const;

    /// Throws DatasetError when a documented invariant does not hold.
    void validate() const;
};

struct SplitMask {
    std::vector<std::size_t> train;
    std::vector<std::size_t> valid;
    std::vector<std::size_t> test;
};

struct SplitRatios {
    double train = 0.1;
    double valid = 0.1;
    double test = 0.8;
};

/// Per-class stratified split; see make_splits.
SplitMask make_splits(const MultiViewDataset& ds, SplitRatios ratios, std::uint64_t seed);

struct SynthConfig {
    std::size_t n = 400;
    int class_count = 4;
    std::vector<std::size_t> view_dims{8, 16};
    /// Noise standard deviation; one value for all classes or one per class.
    std::vector<double> cluster_spread{1.0};
    double center_separation = 10.0;
    double label_noise_rate = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
    double spread_for(int cls) const;
};

/// Gaussian class clusters per view. Centers are pairwise `center_separation`
/// apart when d_v >= class_count; narrower views place them on a line at that
/// spacing. Node i belongs to class i mod C before label noise.
MultiViewDataset gen_synthetic(const SynthConfig& cfg);

/// Reads a JSON manifest {name, n, class_count, views: [{path, dim}], labels_path}.
/// Relative paths resolve against the manifest's directory.
MultiViewDataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes manifest.json, view_<v>.csv and labels.txt into `dir` and returns
/// the manifest path. Numbers use the shortest round-trip representation.
std::filesystem::path save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir);

/// Headerless CSV, one row per line.
Matrix read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const Matrix& m, const std::filesystem::path& path);

/// Column-wise z-scoring; constant columns become zero.
Matrix standardize_columns(const Matrix& x);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

} // namespace mgcn
